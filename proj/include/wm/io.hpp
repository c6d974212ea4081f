#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace wm {

// Numeric table with named columns; NaN cells are written empty.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;   // -1 if absent
    std::vector<double> values(const std::string& name) const;
};

// RFC 4180: CRLF line ends, fields quoted when they contain a comma, quote or line break.
std::string to_csv(const Table& t);
Table from_csv(const std::string& text);
// Same quoting for tables with text cells.
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);
std::string format_number(double v);   // %.17g; NaN empty, inf as "inf"
void write_csv(const std::string& path, const Table& t);
Table read_csv(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool log_y = false;
    int width = 720, height = 440;
};

// Static line plot; non-finite points break the polyline.
std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace wm
