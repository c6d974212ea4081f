#include "wm/solver.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "wm/errors.hpp"

namespace wm {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(2u) after removing the nearest multiple of pi, so u = m*pi gives exactly 0.
double sin2u(double u) { return std::sin(2.0 * (u - kPi * std::round(u / kPi))); }

void accel(const FieldState& st, const std::vector<double>& u, std::vector<double>& out, bool linear) {
    const RadialGrid& g = *st.grid;
    out = g.laplacian2(u);
    const auto& r = g.r();
    double k2 = double(st.k) * st.k;
    int n = g.size();
    for (int i = 1; i + 1 < n; ++i) {
        double inv = 1.0 / (r[i] * r[i]);
        out[i] -= linear ? k2 * u[i] * inv : 0.5 * k2 * sin2u(u[i]) * inv;
    }
    out[0] = 0.0;
    out[n - 1] = 0.0;
}

struct Stepper {
    Stepper(const FieldState& p, bool lin) : proto(p), linear(lin) {}

    const FieldState& proto;
    bool linear;
    std::vector<double> a, k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, tu, tv;

    void leapfrog(std::vector<double>& u, std::vector<double>& v, double dt) {
        std::size_t n = u.size();
        for (std::size_t i = 0; i < n; ++i) v[i] += 0.5 * dt * a[i];
        for (std::size_t i = 0; i < n; ++i) u[i] += dt * v[i];
        accel(proto, u, a, linear);
        for (std::size_t i = 0; i < n; ++i) v[i] += 0.5 * dt * a[i];
    }

    void rk4(std::vector<double>& u, std::vector<double>& v, double dt) {
        std::size_t n = u.size();
        k1u = v;
        accel(proto, u, k1v, linear);
        tu.resize(n);
        tv.resize(n);
        for (std::size_t i = 0; i < n; ++i) tu[i] = u[i] + 0.5 * dt * k1u[i], tv[i] = v[i] + 0.5 * dt * k1v[i];
        k2u = tv;
        accel(proto, tu, k2v, linear);
        for (std::size_t i = 0; i < n; ++i) tu[i] = u[i] + 0.5 * dt * k2u[i], tv[i] = v[i] + 0.5 * dt * k2v[i];
        k3u = tv;
        accel(proto, tu, k3v, linear);
        for (std::size_t i = 0; i < n; ++i) tu[i] = u[i] + dt * k3u[i], tv[i] = v[i] + dt * k3v[i];
        k4u = tv;
        accel(proto, tu, k4v, linear);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] += dt / 6.0 * (k1u[i] + 2 * k2u[i] + 2 * k3u[i] + k4u[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]);
        }
        // Dirichlet nodes stay put.
        v.front() = 0.0;
        v.back() = 0.0;
    }
};

Trajectory run(const FieldState& state, const SolverConfig& cfg, bool linear) {
    state.validate();
    if (!(cfg.T >= 0.0) || !(cfg.cadence > 0.0)) throw DomainError("solver needs T >= 0 and cadence > 0");
    if (!(cfg.c_cfl > 0.0) || cfg.c_cfl > 1.0) throw DomainError("c_cfl must lie in (0, 1]");
    if (linear && !(state.sector == Sector{0, 0})) throw DomainError("linear flow is posed in the vacuum sector");
    const RadialGrid& grid = *state.grid;
    double dt_max = cfg.max_dt(grid, state.k);
    int per = 0;
    if (cfg.dt > 0.0) {
        if (cfg.dt > dt_max * (1 + 1e-12)) throw DomainError("time step exceeds the CFL bound");
        double ratio = cfg.cadence / cfg.dt;
        per = static_cast<int>(std::llround(ratio));
        if (per < 1 || std::abs(ratio - per) > 1e-9 * ratio) throw DomainError("cadence must be a multiple of dt");
    } else {
        per = static_cast<int>(std::ceil(cfg.cadence / dt_max - 1e-12));
    }
    double dt = cfg.cadence / per;
    double nsnap = cfg.T / cfg.cadence;
    long nframes = std::lround(nsnap);
    if (std::abs(nsnap - nframes) > 1e-9 * std::max(1.0, nsnap)) throw DomainError("T must be a multiple of cadence");

    Trajectory traj;
    traj.dt = dt;
    nlohmann::json cj = cfg.to_json();
    cj["dt"] = dt;
    traj.manifest = {{"format", "wm-trajectory"}, {"version", 1},     {"config", cj},
                     {"config_hash", config_hash(cj)}, {"linear", linear}, {"k", state.k},
                     {"grid", {{"kind", grid.origin_closed() ? "sinh" : "geometric"},
                               {"scale", grid.spec().scale},
                               {"ds", grid.spec().ds},
                               {"n", grid.spec().n}}}};

    FieldState cur = state;
    std::vector<double>& u = cur.u;
    std::vector<double>& v = cur.u_dot;
    v.front() = 0.0;
    v.back() = 0.0;
    double e0 = discrete_energy(cur, linear);
    traj.snapshots.push_back({0.0, cur, e0});
    Stepper st(cur, linear);
    accel(cur, u, st.a, linear);
    double scale = std::max(std::abs(e0), 1e-300);
    for (long f = 1; f <= nframes; ++f) {
        for (int s = 0; s < per; ++s) {
            if (cfg.scheme == Scheme::leapfrog)
                st.leapfrog(u, v, dt);
            else
                st.rk4(u, v, dt);
        }
        double e = discrete_energy(cur, linear);
        if (!std::isfinite(e) || (e - e0) > cfg.max_energy_growth * scale + 1e-12) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "instability at t = %.6g: energy %.6g vs initial %.6g", f * cfg.cadence, e,
                          e0);
            throw NumericalError(buf, e, e - e0);
        }
        traj.snapshots.push_back({f * cfg.cadence, cur, e});
    }
    traj.manifest["steps"] = nframes * per;
    return traj;
}

}  // namespace

std::string scheme_name(Scheme s) { return s == Scheme::leapfrog ? "leapfrog" : "rk4"; }

Scheme scheme_from_name(const std::string& name) {
    if (name == "leapfrog") return Scheme::leapfrog;
    if (name == "rk4") return Scheme::rk4;
    throw DomainError("unknown scheme '" + name + "'");
}

double SolverConfig::max_dt(const RadialGrid& grid, int k) const {
    return c_cfl * std::min(grid.min_spacing(), grid.min_positive_radius() / k);
}

nlohmann::json SolverConfig::to_json() const {
    return {{"T", T}, {"cadence", cadence}, {"c_cfl", c_cfl}, {"dt", dt}, {"scheme", scheme_name(scheme)},
            {"max_energy_growth", max_energy_growth}};
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j) {
    SolverConfig c;
    c.T = j.at("T");
    c.cadence = j.at("cadence");
    c.c_cfl = j.at("c_cfl");
    c.dt = j.at("dt");
    c.scheme = scheme_from_name(j.at("scheme"));
    c.max_energy_growth = j.at("max_energy_growth");
    return c;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t;
    for (const auto& s : snapshots) t.push_back(s.t);
    return t;
}

std::vector<double> rhs_nonlinear(const FieldState& state) {
    state.validate();
    std::vector<double> out;
    accel(state, state.u, out, false);
    return out;
}

std::vector<double> rhs_linear(const FieldState& state) {
    state.validate();
    std::vector<double> out;
    accel(state, state.u, out, true);
    return out;
}

double discrete_energy(const FieldState& state, bool linear) {
    const RadialGrid& g = *state.grid;
    const auto& r = g.r();
    const auto& m = g.mass();
    const auto& rh = g.half_r();
    const auto& hh = g.half_h();
    double k2 = double(state.k) * state.k;
    double acc = 0.0;
    int n = g.size();
    for (int i = 0; i + 1 < n; ++i) {
        double du = state.u[i + 1] - state.u[i];
        acc += rh[i] * du * du / hh[i];
    }
    for (int i = 1; i + 1 < n; ++i) {
        double pot = linear ? state.u[i] * state.u[i] : std::pow(std::sin(state.u[i]), 2);
        acc += m[i] * (state.u_dot[i] * state.u_dot[i] + k2 * pot / (r[i] * r[i]));
    }
    return kPi * acc;
}

Trajectory evolve(const FieldState& state, const SolverConfig& config) { return run(state, config, false); }

Trajectory evolve_linear(const FieldState& pair, const SolverConfig& config) { return run(pair, config, true); }

FiniteSpeedReport check_finite_speed(const Trajectory& traj, double R) {
    if (traj.snapshots.empty()) throw DomainError("empty trajectory");
    double T = traj.snapshots.back().t;
    if (!(R > T)) throw DomainError("finite-speed check needs R > T");
    FiniteSpeedReport rep;
    rep.R = R;
    bool linear = traj.manifest.value("linear", false);
    auto ball = [&](const FieldState& st, double r2) {
        if (linear) return kPi * norm_e_sq(st.k, *st.grid, st.u, st.u_dot, 0.0, r2);
        FieldState c = st;
        c.background.reset();
        return energy(c, 0.0, r2);
    };
    const FieldState& s0 = traj.snapshots.front().state;
    double e0 = ball(s0, R);
    double etot = ball(s0, kInf);
    rep.h = s0.grid->ds();
    rep.min_margin = kInf;
    for (const auto& snap : traj.snapshots) {
        double m = e0 - ball(snap.state, R - snap.t);
        rep.times.push_back(snap.t);
        rep.margins.push_back(m);
        rep.min_margin = std::min(rep.min_margin, m);
    }
    rep.measured_c = etot > 0.0 ? std::max(0.0, -rep.min_margin) / (rep.h * rep.h * etot) : 0.0;
    return rep;
}

ConvergenceReport temporal_convergence(const FieldState& state, SolverConfig config, int levels, bool linear) {
    if (levels < 2) throw DomainError("need at least two levels");
    config.cadence = config.T;
    double dt0 = config.dt > 0.0 ? config.dt : config.max_dt(*state.grid, state.k);
    dt0 = config.T / std::ceil(config.T / dt0 - 1e-12);
    auto final_state = [&](double dt) {
        SolverConfig c = config;
        c.dt = dt;
        Trajectory tr = linear ? evolve_linear(state, c) : evolve(state, c);
        return tr.snapshots.back().state;
    };
    FieldState ref = final_state(dt0 / std::pow(2.0, levels + 2));
    ConvergenceReport rep;
    for (int l = 0; l < levels; ++l) {
        double dt = dt0 / std::pow(2.0, l);
        FieldState s = final_state(dt);
        std::vector<double> du(s.u.size()), dv(s.u.size());
        for (std::size_t i = 0; i < du.size(); ++i) du[i] = s.u[i] - ref.u[i], dv[i] = s.u_dot[i] - ref.u_dot[i];
        rep.dts.push_back(dt);
        rep.errors.push_back(std::sqrt(norm_e_sq(state.k, *state.grid, du, dv)));
    }
    for (int l = 0; l + 1 < levels; ++l) rep.ratios.push_back(rep.errors[l] / rep.errors[l + 1]);
    return rep;
}

std::string config_hash(const nlohmann::json& j) {
    // FNV-1a over the canonical dump; stable across platforms.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void save_trajectory(const std::string& dir, const Trajectory& traj) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json j;
    j["format"] = "wm-trajectory";
    j["version"] = 1;
    j["dt"] = traj.dt;
    j["manifest"] = traj.manifest;
    j["snapshots"] = nlohmann::json::array();
    for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05zu.json", n);
        const auto& s = traj.snapshots[n];
        save_snapshot((fs::path(dir) / name).string(), s.state, s.t);
        j["snapshots"].push_back({{"file", name}, {"t", s.t}, {"discrete_energy", s.discrete_energy}});
    }
    std::ofstream os(fs::path(dir) / "trajectory.json");
    if (!os) throw std::runtime_error("cannot write " + dir + "/trajectory.json");
    os << j.dump(2) << '\n';
}

Trajectory load_trajectory(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream is(fs::path(dir) / "trajectory.json");
    if (!is) throw std::runtime_error("cannot read " + dir + "/trajectory.json");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("trajectory parse error: ") + e.what());
    }
    if (j.value("format", "") != "wm-trajectory") throw ConfigError("not a trajectory directory: " + dir);
    Trajectory tr;
    tr.dt = j.at("dt");
    tr.manifest = j.at("manifest");
    GridPtr grid;
    for (const auto& e : j.at("snapshots")) {
        Snapshot s;
        s.state = load_snapshot((fs::path(dir) / e.at("file").get<std::string>()).string(), &s.t);
        // share one grid object between snapshots, as evolve does
        if (grid && grid->compatible(*s.state.grid)) s.state.grid = grid;
        grid = s.state.grid;
        s.discrete_energy = e.at("discrete_energy");
        tr.snapshots.push_back(std::move(s));
    }
    if (tr.snapshots.empty()) throw ConfigError("trajectory has no snapshots: " + dir);
    return tr;
}

}  // namespace wm

