#include "wm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wm/errors.hpp"

namespace wm {

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

double parse_number(const std::string& s, int line) {
    if (s.empty()) return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("csv: not a number '" + s + "'", line);
    }
}

// Splits RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> records(const std::string& text) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(field);
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                rec.push_back(field);
                out.push_back(rec);
            }
            rec.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw ConfigError("csv: unterminated quote", static_cast<int>(out.size()) + 1);
    if (any || !field.empty()) {
        rec.push_back(field);
        out.push_back(rec);
    }
    return out;
}

}  // namespace

int Table::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

std::vector<double> Table::values(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw DomainError("no column '" + name + "'");
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.at(c));
    return v;
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + quote(t.columns[i]);
    out += "\r\n";
    for (const auto& r : t.rows) {
        if (r.size() != t.columns.size()) throw DomainError("row width does not match the header");
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_number(r[i]);
        out += "\r\n";
    }
    return out;
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + quote(r[i]);
        out += "\r\n";
    };
    line(header);
    for (const auto& r : rows) {
        if (r.size() != header.size()) throw DomainError("row width does not match the header");
        line(r);
    }
    return out;
}

Table from_csv(const std::string& text) {
    auto recs = records(text);
    if (recs.empty()) throw ConfigError("csv: empty input", 1);
    Table t;
    t.columns = recs[0];
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (recs[i].size() != t.columns.size())
            throw ConfigError("csv: row width does not match the header", static_cast<int>(i) + 1);
        std::vector<double> row;
        for (const auto& f : recs[i]) row.push_back(parse_number(f, static_cast<int>(i) + 1));
        t.rows.push_back(row);
    }
    return t;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_csv(const std::string& path, const Table& t) { write_text(path, to_csv(t)); }

Table read_csv(const std::string& path) { return from_csv(read_text(path)); }

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_text(path)); }

std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    const double left = 70, right = 20, top = 40, bottom = 50;
    double W = spec.width, H = spec.height;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return spec.log_y ? (y > 0 ? std::log10(y) : NAN) : y; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            double y = ty(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * (H - top - bottom); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
    std::ostringstream o;
    char buf[128];
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << spec.title << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
      << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        std::snprintf(buf, sizeof buf, "%.3g", xv);
        o << "<text x=\"" << px(xv) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << buf << "</text>\n";
        std::snprintf(buf, sizeof buf, spec.log_y ? "1e%.2g" : "%.3g", yv);
        o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
    }
    o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << spec.xlabel
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (top + H - bottom) / 2 << ")\">" << spec.ylabel << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = colors[k % 6];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            double y = ty(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) {
                pen = false;
                continue;
            }
            std::snprintf(buf, sizeof buf, "%c%.2f %.2f ", pen ? 'L' : 'M', px(s.x[i]), py(y));
            path += buf;
            pen = true;
        }
        o << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\"/>\n";
        o << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 + 14 * k << "\" fill=\"" << col << "\">" << s.name
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace wm
