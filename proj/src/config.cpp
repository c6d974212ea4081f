#include "wm/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "wm/errors.hpp"
#include "wm/io.hpp"

namespace wm {

namespace {

constexpr const char* kHeader = "wmlab-config";

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

struct Entry {
    std::string value;
    int line;
};

double to_double(const std::string& key, const Entry& e) {
    try {
        std::size_t pos = 0;
        double v = std::stod(e.value, &pos);
        if (pos == e.value.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': expected a finite number, got '" + e.value + "'", e.line);
}

long to_int(const std::string& key, const Entry& e) {
    try {
        std::size_t pos = 0;
        long v = std::stol(e.value, &pos);
        if (pos == e.value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': expected an integer, got '" + e.value + "'", e.line);
}

bool to_bool(const std::string& key, const Entry& e) {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + e.value + "'", e.line);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const Entry&)>;

const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> s = {
        {"scenario", [](RunConfig& c, const std::string&, const Entry& e) { c.scenario = e.value; }},
        {"k",
         [](RunConfig& c, const std::string& key, const Entry& e) {
             long k = to_int(key, e);
             if (k < 1 || k > 12) throw ConfigError("key 'k': must be in 1..12", e.line);
             c.k = static_cast<int>(k);
         }},
        {"seed",
         [](RunConfig& c, const std::string& key, const Entry& e) {
             long v = to_int(key, e);
             if (v < 0) throw ConfigError("key 'seed': must be non-negative", e.line);
             c.seed = static_cast<std::uint64_t>(v);
         }},
        {"grid.kind",
         [](RunConfig& c, const std::string&, const Entry& e) {
             if (e.value != "sinh" && e.value != "geometric")
                 throw ConfigError("key 'grid.kind': expected sinh or geometric", e.line);
             c.grid.kind = e.value;
         }},
        {"grid.a", [](RunConfig& c, const std::string& k, const Entry& e) { c.grid.a = to_double(k, e); }},
        {"grid.rmax", [](RunConfig& c, const std::string& k, const Entry& e) { c.grid.rmax = to_double(k, e); }},
        {"grid.ds", [](RunConfig& c, const std::string& k, const Entry& e) { c.grid.ds = to_double(k, e); }},
        {"initial.m",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.initial.m = static_cast<int>(to_int(k, e)); }},
        {"initial.iota",
         [](RunConfig& c, const std::string& key, const Entry& e) {
             c.initial.iota.clear();
             for (const auto& w : words(e.value)) c.initial.iota.push_back(static_cast<int>(to_int(key, {w, e.line})));
         }},
        {"initial.lambda",
         [](RunConfig& c, const std::string& key, const Entry& e) {
             c.initial.lambda.clear();
             for (const auto& w : words(e.value)) c.initial.lambda.push_back(to_double(key, {w, e.line}));
         }},
        {"initial.snapshot", [](RunConfig& c, const std::string&, const Entry& e) { c.snapshot = e.value; }},
        {"initial.perturbation.amplitude",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.perturbation.amplitude = to_double(k, e); }},
        {"initial.perturbation.center",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.perturbation.center = to_double(k, e); }},
        {"initial.perturbation.width",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.perturbation.width = to_double(k, e); }},
        {"initial.perturbation.velocity",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.perturbation.velocity = to_bool(k, e); }},
        {"initial.perturbation.random_bumps",
         [](RunConfig& c, const std::string& k, const Entry& e) {
             c.perturbation.random_bumps = static_cast<int>(to_int(k, e));
         }},
        {"solver.T", [](RunConfig& c, const std::string& k, const Entry& e) { c.solver.T = to_double(k, e); }},
        {"solver.cadence",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.solver.cadence = to_double(k, e); }},
        {"solver.c_cfl", [](RunConfig& c, const std::string& k, const Entry& e) { c.solver.c_cfl = to_double(k, e); }},
        {"solver.dt", [](RunConfig& c, const std::string& k, const Entry& e) { c.solver.dt = to_double(k, e); }},
        {"solver.scheme",
         [](RunConfig& c, const std::string&, const Entry& e) {
             try {
                 c.solver.scheme = scheme_from_name(e.value);
             } catch (const std::exception&) {
                 throw ConfigError("key 'solver.scheme': unknown scheme '" + e.value + "'", e.line);
             }
         }},
        {"solver.max_energy_growth",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.solver.max_energy_growth = to_double(k, e); }},
        {"analysis.track",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.track = to_bool(k, e); }},
        {"analysis.virial",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.virial = to_bool(k, e); }},
        {"analysis.ode_compare",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.ode_compare = to_bool(k, e); }},
        {"analysis.eta0", [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.eta0 = to_double(k, e); }},
        {"analysis.L", [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.L = to_double(k, e); }},
        {"analysis.cutoff_c",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.cutoff_c = to_double(k, e); }},
        {"analysis.cutoff_R",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.cutoff_R = to_double(k, e); }},
        {"analysis.ode_dt",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.ode_dt = to_double(k, e); }},
        {"analysis.max_rel",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.max_rel = to_double(k, e); }},
        {"analysis.virial_rho",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.virial_rho = to_double(k, e); }},
        {"analysis.accel_window",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.analysis.accel_window = to_double(k, e); }},
        {"output.dir", [](RunConfig& c, const std::string&, const Entry& e) { c.out_dir = e.value; }},
    };
    return s;
}

void check_positive(const char* key, double v, int line) {
    if (!(v > 0.0)) throw ConfigError(std::string("key '") + key + "': must be positive", line);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    bool header = false;
    std::vector<std::string> stack;
    std::map<std::string, Entry> entries;
    std::map<std::string, int> lines;
    RunConfig cfg;
    while (std::getline(is, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (!header) {
            auto w = words(s);
            if (w.size() != 2 || w[0] != kHeader)
                throw ConfigError(std::string("expected header '") + kHeader + " 1'", line);
            if (w[1] != "1") throw ConfigError("unsupported config version " + w[1], line);
            header = true;
            continue;
        }
        if (s == "}") {
            if (stack.empty()) throw ConfigError("unbalanced '}'", line);
            stack.pop_back();
            continue;
        }
        std::string prefix;
        for (const auto& b : stack) prefix += b + ".";
        if (s.back() == '{') {
            std::string name = trim(s.substr(0, s.size() - 1));
            if (name.empty() || name.find_first_of(" =") != std::string::npos)
                throw ConfigError("malformed block name '" + name + "'", line);
            stack.push_back(name);
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", line);
        std::string key = prefix + trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (!schema().count(key)) throw ConfigError("unknown key '" + key + "'", line);
        if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
        if (value.empty()) throw ConfigError("key '" + key + "': empty value", line);
        entries[key] = {value, line};
    }
    if (!header) throw ConfigError("empty config", line);
    if (!stack.empty()) throw ConfigError("block '" + stack.back() + "' is not closed", line);
    for (const auto& [key, e] : entries) schema().at(key)(cfg, key, e);

    auto at = [&](const char* key) { return entries.count(key) ? entries.at(key).line : 0; };
    check_positive("grid.a", cfg.grid.a, at("grid.a"));
    check_positive("grid.rmax", cfg.grid.rmax, at("grid.rmax"));
    check_positive("grid.ds", cfg.grid.ds, at("grid.ds"));
    check_positive("solver.cadence", cfg.solver.cadence, at("solver.cadence"));
    check_positive("solver.c_cfl", cfg.solver.c_cfl, at("solver.c_cfl"));
    check_positive("initial.perturbation.center", cfg.perturbation.center, at("initial.perturbation.center"));
    check_positive("initial.perturbation.width", cfg.perturbation.width, at("initial.perturbation.width"));
    check_positive("analysis.ode_dt", cfg.analysis.ode_dt, at("analysis.ode_dt"));
    if (cfg.solver.T < 0.0) throw ConfigError("key 'solver.T': must be non-negative", at("solver.T"));
    if (cfg.grid.rmax <= cfg.grid.a && cfg.grid.kind == "geometric")
        throw ConfigError("key 'grid.rmax': must exceed grid.a", at("grid.rmax"));
    if (cfg.snapshot.empty()) {
        try {
            cfg.initial.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("initial configuration: ") + e.what(),
                              std::max(at("initial.lambda"), at("initial.iota")));
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text(path)); }

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["version"] = version;
    j["scenario"] = scenario;
    j["k"] = k;
    j["seed"] = seed;
    j["grid"] = {{"kind", grid.kind}, {"a", grid.a}, {"rmax", grid.rmax}, {"ds", grid.ds}};
    j["initial"] = {{"m", initial.m}, {"iota", initial.iota}, {"lambda", initial.lambda}, {"snapshot", snapshot}};
    j["perturbation"] = {{"amplitude", perturbation.amplitude}, {"center", perturbation.center},
                         {"width", perturbation.width},         {"velocity", perturbation.velocity},
                         {"random_bumps", perturbation.random_bumps}};
    j["solver"] = solver.to_json();
    j["analysis"] = {{"track", analysis.track},     {"virial", analysis.virial},
                     {"ode_compare", analysis.ode_compare}, {"eta0", analysis.eta0},
                     {"L", analysis.L},             {"cutoff_c", analysis.cutoff_c},
                     {"cutoff_R", analysis.cutoff_R}, {"ode_dt", analysis.ode_dt},
                     {"max_rel", analysis.max_rel}, {"virial_rho", analysis.virial_rho},
                     {"accel_window", analysis.accel_window}};
    j["output"] = {{"dir", out_dir}};
    return j;
}

std::string RunConfig::hash() const { return config_hash(to_json()); }

std::string RunConfig::to_text() const {
    std::ostringstream o;
    auto list = [](const auto& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ' ';
            if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, double>)
                s += fmt(v[i]);
            else
                s += std::to_string(v[i]);
        }
        return s;
    };
    auto b = [](bool v) { return v ? "true" : "false"; };
    o << kHeader << " 1\n";
    o << "scenario = " << scenario << "\n";
    o << "k = " << k << "\n";
    o << "seed = " << seed << "\n";
    o << "grid {\n  kind = " << grid.kind << "\n  a = " << fmt(grid.a) << "\n  rmax = " << fmt(grid.rmax)
      << "\n  ds = " << fmt(grid.ds) << "\n}\n";
    o << "initial {\n  m = " << initial.m << "\n";
    if (!initial.iota.empty()) o << "  iota = " << list(initial.iota) << "\n";
    if (!initial.lambda.empty()) o << "  lambda = " << list(initial.lambda) << "\n";
    if (!snapshot.empty()) o << "  snapshot = " << snapshot << "\n";
    o << "  perturbation {\n    amplitude = " << fmt(perturbation.amplitude)
      << "\n    center = " << fmt(perturbation.center) << "\n    width = " << fmt(perturbation.width)
      << "\n    velocity = " << b(perturbation.velocity) << "\n    random_bumps = " << perturbation.random_bumps
      << "\n  }\n}\n";
    o << "solver {\n  T = " << fmt(solver.T) << "\n  cadence = " << fmt(solver.cadence)
      << "\n  c_cfl = " << fmt(solver.c_cfl) << "\n  dt = " << fmt(solver.dt)
      << "\n  scheme = " << scheme_name(solver.scheme) << "\n  max_energy_growth = " << fmt(solver.max_energy_growth)
      << "\n}\n";
    o << "analysis {\n  track = " << b(analysis.track) << "\n  virial = " << b(analysis.virial)
      << "\n  ode_compare = " << b(analysis.ode_compare) << "\n  eta0 = " << fmt(analysis.eta0)
      << "\n  L = " << fmt(analysis.L) << "\n  cutoff_c = " << fmt(analysis.cutoff_c)
      << "\n  cutoff_R = " << fmt(analysis.cutoff_R) << "\n  ode_dt = " << fmt(analysis.ode_dt)
      << "\n  max_rel = " << fmt(analysis.max_rel) << "\n  virial_rho = " << fmt(analysis.virial_rho)
      << "\n  accel_window = " << fmt(analysis.accel_window) << "\n}\n";
    o << "output {\n  dir = " << out_dir << "\n}\n";
    return o.str();
}

GridPtr build_grid(const GridSpecConfig& g) {
    if (g.kind == "sinh") return make_grid(RadialGrid::sinh(g.a, g.rmax, g.ds));
    if (g.kind == "geometric") return make_grid(RadialGrid::geometric(g.a, g.rmax, g.ds));
    throw ConfigError("unknown grid kind '" + g.kind + "'");
}

FieldState initial_field(const RunConfig& cfg) {
    if (!cfg.snapshot.empty()) return load_snapshot(cfg.snapshot);
    FieldState f = field_from_config(cfg.k, cfg.initial, build_grid(cfg.grid));
    const auto& p = cfg.perturbation;
    if (p.amplitude == 0.0) return f;
    struct Bump {
        double amp, center;
    };
    std::vector<Bump> bumps;
    if (p.random_bumps > 0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> logc(-2.0, 2.0), sgn(-1.0, 1.0);
        for (int i = 0; i < p.random_bumps; ++i) bumps.push_back({p.amplitude * sgn(rng), p.center * std::exp(logc(rng))});
    } else {
        bumps.push_back({p.amplitude, p.center});
    }
    auto& target = p.velocity ? f.u_dot : f.u;
    const auto& r = f.grid->r();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0)) continue;   // the origin node stays at its boundary value
        for (const auto& b : bumps) {
            double s = std::log(r[i] / b.center) / p.width;
            target[i] += b.amp * std::exp(-s * s);
        }
    }
    // bumps decay like exp(-log^2 r), so the analytic tails beyond the grid stay valid
    return f;
}

}  // namespace wm
