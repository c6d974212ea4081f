#include "wm/fields.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "wm/errors.hpp"

namespace wm {

namespace {

constexpr double kPi = std::numbers::pi;

void check_range(double r1, double r2) {
    if (!(r1 >= 0.0) || !(r2 > r1)) throw DomainError("range must satisfy 0 <= r1 < r2");
}

// Adds the analytic contribution of `density` outside the sampled interval.
double tail_integral(const RadialGrid& grid, const std::function<double(double)>& density, double r1, double r2) {
    double acc = 0.0;
    if (!grid.origin_closed() && r1 < grid.r_first()) {
        double b = std::min(r2, grid.r_first());
        acc += integrate_radial(density, r1, b).value;
    }
    if (r2 > grid.r_last()) {
        double a = std::max(r1, grid.r_last());
        acc += integrate_radial(density, a, r2).value;
    }
    return acc;
}

}  // namespace

double FieldState::origin_value() const { return sector.ell * kPi; }

std::vector<double> FieldState::u_r() const { return grid->d_dr(u, parity(), origin_value()); }

void FieldState::validate() const {
    if (!grid) throw DomainError("field has no grid");
    if (k < 1) throw DomainError("equivariance degree must be >= 1");
    if (static_cast<int>(u.size()) != grid->size() || static_cast<int>(u_dot.size()) != grid->size())
        throw DomainError("field samples do not match grid");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!std::isfinite(u[i]) || !std::isfinite(u_dot[i])) throw DomainError("non-finite field sample");
    if (background) background->validate();
}

FieldState field_from_config(int k, const BubbleConfig& cfg, GridPtr grid, bool attach_background) {
    cfg.validate();
    FieldState f;
    f.grid = std::move(grid);
    f.k = k;
    f.u = f.grid->sample([&](double r) { return multi_bubble(k, cfg, r); });
    f.u_dot.assign(f.u.size(), 0.0);
    f.sector = {sector_of_config(cfg), cfg.m};
    if (attach_background) f.background = cfg;
    return f;
}

FieldState make_pair_state(int k, GridPtr grid, std::vector<double> g, std::vector<double> g_dot) {
    FieldState f;
    f.grid = std::move(grid);
    f.k = k;
    f.u = std::move(g);
    f.u_dot = g_dot.empty() ? std::vector<double>(f.u.size(), 0.0) : std::move(g_dot);
    f.validate();
    return f;
}

std::vector<double> energy_density(const FieldState& field) {
    const auto& r = field.grid->r();
    std::vector<double> ur = field.u_r();
    std::vector<double> d(r.size(), 0.0);
    double k2 = double(field.k) * field.k;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] == 0.0) continue;
        double s = std::sin(field.u[i]);
        d[i] = kPi * (field.u_dot[i] * field.u_dot[i] + ur[i] * ur[i] + k2 * s * s / (r[i] * r[i]));
    }
    return d;
}

double energy(const FieldState& field, double r1, double r2) {
    check_range(r1, r2);
    double e = 0.0;
    if (r1 < field.grid->r_last() && r2 > field.grid->r_first())
        e = field.grid->integrate_range(energy_density(field), r1, r2);
    if (field.background) {
        const BubbleConfig& bg = *field.background;
        int k = field.k;
        auto dens = [&](double r) {
            double ur = multi_bubble_dr(k, bg, r);
            double s = std::sin(multi_bubble(k, bg, r));
            return kPi * (ur * ur + double(k) * k * s * s / (r * r));
        };
        e += tail_integral(*field.grid, dens, r1, r2);
    }
    return e;
}

double norm_e_sq(int k, const RadialGrid& grid, const std::vector<double>& g, const std::vector<double>& g_dot,
                 double r1, double r2) {
    check_range(r1, r2);
    int parity = k % 2 == 0 ? 1 : -1;
    std::vector<double> gr = grid.d_dr(g, parity, 0.0);
    const auto& r = grid.r();
    std::vector<double> d(r.size(), 0.0);
    double k2 = double(k) * k;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] == 0.0) continue;
        double gd = g_dot.empty() ? 0.0 : g_dot[i];
        d[i] = gd * gd + gr[i] * gr[i] + k2 * g[i] * g[i] / (r[i] * r[i]);
    }
    if (r1 >= grid.r_last() || r2 <= grid.r_first()) return 0.0;
    return grid.integrate_range(d, r1, r2);
}

double norm_e_sq(const FieldState& pair, double r1, double r2) {
    double v = norm_e_sq(pair.k, *pair.grid, pair.u, pair.u_dot, r1, r2);
    if (pair.background) {
        const BubbleConfig& bg = *pair.background;
        int k = pair.k;
        auto dens = [&](double r) {
            double gr = multi_bubble_dr(k, bg, r);
            double g = multi_bubble(k, bg, r);
            return gr * gr + double(k) * k * g * g / (r * r);
        };
        bool inner_ok = sector_of_config(bg) == 0, outer_ok = bg.m == 0;
        const RadialGrid& grid = *pair.grid;
        if (!grid.origin_closed() && r1 < grid.r_first() && inner_ok)
            v += integrate_radial(dens, r1, std::min(r2, grid.r_first())).value;
        if (r2 > grid.r_last() && outer_ok) v += integrate_radial(dens, std::max(r1, grid.r_last()), r2).value;
    }
    return v;
}

double norm_h_sq(int k, const RadialGrid& grid, const std::vector<double>& g) { return norm_e_sq(k, grid, g); }

double pairing(const RadialGrid& grid, const std::vector<double>& f, const std::vector<double>& g) {
    if (f.size() != g.size() || static_cast<int>(f.size()) != grid.size())
        throw DomainError("pairing: samples do not match grid");
    const auto& w = grid.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * (f[i] * g[i]);
    return acc;
}

double pairing(const RadialGrid& grid, const std::vector<double>& f, const std::vector<double>& g, double r1,
               double r2) {
    if (f.size() != g.size()) throw DomainError("pairing: sample counts differ");
    std::vector<double> fg(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) fg[i] = f[i] * g[i];
    return grid.integrate_range(fg, r1, r2);
}

double pairing(const RadialGrid& gf, const std::vector<double>& f, const RadialGrid& gg,
               const std::vector<double>& g) {
    if (!gf.compatible(gg)) throw DomainError("pairing: incompatible grids");
    return pairing(gf, f, g);
}

FieldState rescale_h(const FieldState& field, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("scale must be positive");
    FieldState out = field;
    out.grid = make_grid(field.grid->scaled(lambda));
    for (double& v : out.u_dot) v /= lambda;
    if (out.background)
        for (double& l : out.background->lambda) l *= lambda;
    return out;
}

std::pair<RadialGrid, std::vector<double>> rescale_l2(const RadialGrid& grid, const std::vector<double>& f,
                                                       double lambda) {
    if (!(lambda > 0.0)) throw DomainError("scale must be positive");
    std::vector<double> out(f);
    for (double& v : out) v /= lambda;
    return {grid.scaled(lambda), std::move(out)};
}

double LinearizedOperator::potential(int k, double r) const {
    double k2 = double(k) * k;
    if (kind == Kind::vacuum) return k2;
    return k2 * nonlinearity_fprime(multi_bubble(k, background, r));
}

std::vector<double> apply_linearized(const LinearizedOperator& op, int k, const RadialGrid& grid,
                                     const std::vector<double>& g, Stencil stencil) {
    if (static_cast<int>(g.size()) != grid.size()) throw DomainError("samples do not match grid");
    int parity = k % 2 == 0 ? 1 : -1;
    std::vector<double> lap = stencil == Stencil::second_order ? grid.laplacian2(g) : grid.laplacian(g, parity, 0.0);
    const auto& r = grid.r();
    int n = grid.size();
    std::vector<double> out(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) out[i] = -lap[i] + op.potential(k, r[i]) * g[i] / (r[i] * r[i]);
    return out;
}

double quadratic_form(const LinearizedOperator& op, int k, const RadialGrid& grid, const std::vector<double>& g) {
    int parity = k % 2 == 0 ? 1 : -1;
    std::vector<double> gr = grid.d_dr(g, parity, 0.0);
    const auto& r = grid.r();
    std::vector<double> d(r.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] == 0.0) continue;
        d[i] = gr[i] * gr[i] + op.potential(k, r[i]) * g[i] * g[i] / (r[i] * r[i]);
    }
    return grid.integrate(d);
}

PlateauResult plateau_detect(const FieldState& field, double r1, double r2, double min_ratio) {
    if (!(r1 > 0.0) || !(r2 > r1)) throw DomainError("plateau_detect: empty annulus");
    if (r2 / r1 < min_ratio) throw DomainError("plateau_detect: annulus ratio below minimum");
    const auto& r = field.grid->r();
    std::vector<double> vals;
    if (r1 >= field.grid->r_first() && r1 <= field.grid->r_last())
        vals.push_back(field.grid->interpolate(field.u, r1, field.parity(), field.origin_value()));
    if (r2 >= field.grid->r_first() && r2 <= field.grid->r_last())
        vals.push_back(field.grid->interpolate(field.u, r2, field.parity(), field.origin_value()));
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] >= r1 && r[i] <= r2) vals.push_back(field.u[i]);
    if (vals.empty()) throw DomainError("plateau_detect: no samples in annulus");
    double lo = *std::min_element(vals.begin(), vals.end());
    double hi = *std::max_element(vals.begin(), vals.end());
    PlateauResult best{0, kInf};
    for (int l = static_cast<int>(std::floor(lo / kPi)); l <= static_cast<int>(std::ceil(hi / kPi)); ++l) {
        double dev = std::max(std::abs(lo - l * kPi), std::abs(hi - l * kPi));
        if (dev < best.deviation) best = {l, dev};
    }
    return best;
}

double jia_kenig_functional(const FieldState& field, std::optional<double> cutoff_radius) {
    if (cutoff_radius && !(*cutoff_radius > 0.0)) throw DomainError("cutoff radius must be positive");
    int k = field.k;
    double k2 = double(k) * k;
    auto point = [&](double r, double u, double ur) {
        double s = std::sin(2.0 * u);
        double v = k2 * s * s / (2.0 * r * r) + 2.0 * ur * ur * std::cos(2.0 * u);
        return cutoff_radius ? v * chi(r / *cutoff_radius) : v;
    };
    const auto& r = field.grid->r();
    std::vector<double> ur = field.u_r();
    std::vector<double> d(r.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] > 0.0) d[i] = point(r[i], field.u[i], ur[i]);
    double v = field.grid->integrate(d);
    if (field.background) {
        const BubbleConfig& bg = *field.background;
        auto dens = [&](double rr) { return point(rr, multi_bubble(k, bg, rr), multi_bubble_dr(k, bg, rr)); };
        v += tail_integral(*field.grid, dens, 0.0, kInf);
    }
    return v;
}

namespace {

using nlohmann::json;

constexpr int kSnapshotVersion = 1;

json to_json(const FieldState& f, double t) {
    const GridSpec& g = f.grid->spec();
    json j;
    j["format"] = "wm-snapshot";
    j["version"] = kSnapshotVersion;
    j["k"] = f.k;
    j["t"] = t;
    j["sector"] = {{"ell", f.sector.ell}, {"m", f.sector.m}};
    j["grid"] = {{"kind", g.kind == GridKind::sinh ? "sinh" : "geometric"},
                 {"scale", g.scale},
                 {"ds", g.ds},
                 {"n", g.n}};
    j["r"] = f.grid->r();
    j["u"] = f.u;
    j["u_dot"] = f.u_dot;
    if (f.background)
        j["background"] = {{"m", f.background->m}, {"iota", f.background->iota}, {"lambda", f.background->lambda}};
    else
        j["background"] = nullptr;
    return j;
}

FieldState from_json(const json& j, double* t) {
    if (j.value("format", "") != "wm-snapshot") throw ConfigError("not a field snapshot");
    if (j.value("version", 0) != kSnapshotVersion) throw ConfigError("unsupported snapshot version");
    GridSpec g;
    std::string kind = j.at("grid").at("kind");
    if (kind == "sinh")
        g.kind = GridKind::sinh;
    else if (kind == "geometric")
        g.kind = GridKind::geometric;
    else
        throw ConfigError("unknown grid kind " + kind);
    g.scale = j.at("grid").at("scale");
    g.ds = j.at("grid").at("ds");
    g.n = j.at("grid").at("n");
    FieldState f;
    f.grid = make_grid(RadialGrid(g));
    if (j.at("r").get<std::vector<double>>() != f.grid->r())
        throw ConfigError("snapshot radii do not match the grid specification");
    f.k = j.at("k");
    f.u = j.at("u").get<std::vector<double>>();
    f.u_dot = j.at("u_dot").get<std::vector<double>>();
    f.sector = {j.at("sector").at("ell"), j.at("sector").at("m")};
    if (!j.at("background").is_null()) {
        BubbleConfig b;
        b.m = j["background"].at("m");
        b.iota = j["background"].at("iota").get<std::vector<int>>();
        b.lambda = j["background"].at("lambda").get<std::vector<double>>();
        f.background = b;
    }
    if (t) *t = j.value("t", 0.0);
    f.validate();
    return f;
}

}  // namespace

std::string snapshot_to_string(const FieldState& field, double t) { return to_json(field, t).dump(); }

FieldState snapshot_from_string(const std::string& text, double* t) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("snapshot parse error: ") + e.what());
    }
    return from_json(j, t);
}

void save_snapshot(const std::string& path, const FieldState& field, double t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << snapshot_to_string(field, t) << '\n';
}

FieldState load_snapshot(const std::string& path, double* t) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return snapshot_from_string(ss.str(), t);
}

}  // namespace wm
