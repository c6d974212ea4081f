// wmlab: command-line driver for the radial wave map library.
//
// Exit codes: 0 success, 1 a verification check failed, 2 bad configuration or
// usage, 3 I/O error, 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wm/config.hpp"
#include "wm/errors.hpp"
#include "wm/io.hpp"
#include "wm/modulation.hpp"
#include "wm/reduced_ode.hpp"
#include "wm/solver.hpp"
#include "wm/verify.hpp"
#include "wm/virial.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wm;

namespace {

struct Globals {
    std::string config_path;
    std::string out;
    double tolerance = 0.0;
    long seed = -1;
};

RunConfig resolve(const Globals& g) {
    RunConfig c = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
    if (!g.out.empty()) c.out_dir = g.out;
    if (g.seed >= 0) c.seed = static_cast<std::uint64_t>(g.seed);
    return c;
}

std::string out_dir(const Globals& g, const std::string& fallback) {
    std::string d = g.out.empty() ? fallback : g.out;
    fs::create_directories(d);
    return d;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// Every JSON artifact records the hash; CSV and SVG files are listed in the
// command's manifest next to it.
void write_manifest(const std::string& dir, const std::string& command, const std::string& hash, json body,
                    const std::vector<std::string>& files) {
    body["command"] = command;
    body["config_hash"] = hash;
    body["artifacts"] = files;
    write_json(join(dir, command + ".json"), body);
}

std::string tag_svg(std::string svg, const std::string& hash) {
    auto pos = svg.find('>');
    return svg.insert(pos + 1, "\n<desc>config_hash=" + hash + "</desc>");
}

json bubble_json(const BubbleConfig& b) { return {{"m", b.m}, {"iota", b.iota}, {"lambda", b.lambda}}; }

TrackOptions track_options(const RunConfig& c) {
    TrackOptions o;
    o.eta0 = c.analysis.eta0;
    o.L = c.analysis.L;
    o.cutoff_c = c.analysis.cutoff_c;
    o.cutoff_R = c.analysis.cutoff_R;
    return o;
}

Trajectory trajectory_for(const RunConfig& c, const std::string& dir) {
    if (!dir.empty()) return load_trajectory(dir);
    return evolve(initial_field(c), c.solver);
}

// ---- subcommands

int cmd_verify_constants(const Globals& g, int k_max) {
    VerifyOptions o;
    o.tolerance = g.tolerance;
    o.k_max = k_max;
    auto rows = verify_constants(o);
    std::string dir = out_dir(g, "out");
    std::string hash = config_hash({{"command", "verify-constants"}, {"tolerance", o.tolerance}, {"k_max", k_max}});
    write_text(join(dir, "constants.csv"), check_csv(rows));
    int failed = 0;
    for (const auto& r : rows) failed += !r.pass;
    write_manifest(dir, "verify-constants", hash,
                   {{"checks", check_json(rows)}, {"failed", failed}, {"total", rows.size()}}, {"constants.csv"});
    for (const auto& r : rows)
        if (!r.pass)
            std::printf("FAIL %-26s k=%d param=%-8g error=%.3g tolerance=%.3g (%s)\n", r.check.c_str(), r.k, r.param,
                        r.error, r.tolerance, r.failure.c_str());
    std::printf("%zu checks, %d failed\n", rows.size(), failed);
    return failed ? 1 : 0;
}

int cmd_build_cutoff(const Globals& g, double c, double R) {
    RunConfig cfg = resolve(g);
    if (c <= 0) c = cfg.analysis.cutoff_c;
    if (R <= 0) R = cfg.analysis.cutoff_R;
    auto profile = build_cutoff(c, R);
    auto report = verify_cutoff(profile);
    std::string dir = out_dir(g, cfg.out_dir);
    std::string hash = config_hash({{"command", "build-cutoff"}, {"c", c}, {"R", R}});
    Table t;
    t.columns = {"r", "q", "dq", "d2q", "phi"};
    double lo = std::log(0.1 / profile.R_tilde()), hi = std::log(10.0 * profile.R_tilde());
    for (int i = 0; i <= 2000; ++i) {
        double r = std::exp(lo + (hi - lo) * i / 2000.0);
        auto j = profile.eval(r);
        t.rows.push_back({r, j.q, j.d1, j.d2, profile.phi(r)});
    }
    write_csv(join(dir, "cutoff.csv"), t);
    json rep = {{"ok", report.ok},         {"samples", report.samples}, {"p3_q1", report.p3_q1},
                {"p3_q2", report.p3_q2},   {"min_q2", report.min_q2},   {"min_phi", report.min_phi},
                {"p5", report.p5},         {"p6", report.p6},           {"fd_deviation", report.fd_deviation},
                {"violations", report.violations}};
    write_manifest(dir, "build-cutoff", hash, {{"profile", profile.to_json()}, {"report", rep}}, {"cutoff.csv"});
    std::printf("cutoff c=%g R=%g R_tilde=%.3e: %s\n", c, R, profile.R_tilde(), report.ok ? "P1-P6 hold" : "violations");
    for (const auto& v : report.violations) std::printf("  %s\n", v.c_str());
    return report.ok ? 0 : 1;
}

json simulate_into(const RunConfig& cfg, const std::string& dir, Trajectory* keep = nullptr) {
    std::string hash = cfg.hash();
    auto traj = evolve(initial_field(cfg), cfg.solver);
    traj.manifest["run_config_hash"] = hash;
    traj.manifest["scenario"] = cfg.scenario;
    save_trajectory(join(dir, "trajectory"), traj);
    write_text(join(dir, "config.txt"), cfg.to_text());

    Table en;
    en.columns = {"t", "discrete_energy", "energy"};
    for (const auto& s : traj.snapshots) en.rows.push_back({s.t, s.discrete_energy, energy(s.state)});
    write_csv(join(dir, "energy.csv"), en);

    // exterior energy E(u; r, inf) at the first, middle and last snapshot
    Table sh;
    std::vector<std::size_t> pick{0, traj.snapshots.size() / 2, traj.snapshots.size() - 1};
    sh.columns = {"r"};
    for (std::size_t p : pick) sh.columns.push_back("E_ext_" + std::to_string(p));
    const auto& r = traj.grid()->r();
    for (std::size_t i = 1; i < r.size(); i += std::max<std::size_t>(1, r.size() / 400)) {
        std::vector<double> row{r[i]};
        for (std::size_t p : pick) row.push_back(energy(traj.snapshots[p].state, r[i], kInf));
        sh.rows.push_back(row);
    }
    write_csv(join(dir, "shells.csv"), sh);
    std::vector<double> pick_t;
    for (std::size_t p : pick) pick_t.push_back(traj.snapshots[p].t);
    write_manifest(dir, "simulate", hash,
                   {{"config", cfg.to_json()},
                    {"snapshots", traj.snapshots.size()},
                    {"dt", traj.dt},
                    {"shell_times", pick_t},
                    {"solver_manifest", traj.manifest}},
                   {"trajectory/trajectory.json", "energy.csv", "shells.csv", "config.txt"});
    if (keep) *keep = std::move(traj);
    return {{"snapshots", pick.size()}};
}

int cmd_simulate(const Globals& g) {
    RunConfig cfg = resolve(g);
    std::string dir = out_dir(g, cfg.out_dir);
    Trajectory traj;
    simulate_into(cfg, dir, &traj);
    std::printf("simulated %s: %zu snapshots, dt = %.3g, energy %.12g -> %.12g\n", cfg.scenario.c_str(),
                traj.snapshots.size(), traj.dt, traj.snapshots.front().discrete_energy,
                traj.snapshots.back().discrete_energy);
    return 0;
}

int cmd_fit(const Globals& g, const std::string& snapshot) {
    RunConfig cfg = resolve(g);
    FieldState field = snapshot.empty() ? initial_field(cfg) : load_snapshot(snapshot);
    auto fit = fit_static(field, cfg.initial);
    auto dist = proximity_d(field, nullptr, cfg.initial.m, cfg.initial.size(), kInf,
                            ProximityOptions{{fit.config.lambda}, 200});
    std::string dir = out_dir(g, cfg.out_dir);
    std::string hash = cfg.hash();
    Table prof;
    prof.columns = {"r", "u", "g", "g_dot"};
    const auto& r = field.grid->r();
    for (std::size_t i = 0; i < r.size(); ++i) prof.rows.push_back({r[i], field.u[i], fit.g[i], fit.g_dot[i]});
    write_csv(join(dir, "fit_profile.csv"), prof);
    write_manifest(dir, "fit", hash,
                   {{"config", bubble_json(fit.config)},
                    {"iterations", fit.iterations},
                    {"ortho_residuals", fit.ortho_residuals},
                    {"ratios", fit.ratios},
                    {"g_energy_sq", fit.g_energy_sq},
                    {"g_h_sq", fit.g_h_sq},
                    {"sandwich", fit.sandwich},
                    {"d", dist.value},
                    {"snapshot", snapshot}},
                   {"fit_profile.csv"});
    std::printf("fit after %d iterations: lambda =", fit.iterations);
    for (double l : fit.config.lambda) std::printf(" %.15g", l);
    std::printf(", ||g||_E^2 = %.3e, d = %.3e\n", fit.g_energy_sq, dist.value);
    return 0;
}

int cmd_track(const Globals& g, const std::string& traj_dir) {
    RunConfig cfg = resolve(g);
    auto traj = trajectory_for(cfg, traj_dir);
    auto series = track(traj, cfg.initial, track_options(cfg));
    std::string dir = out_dir(g, cfg.out_dir);
    std::vector<std::string> files{"series.csv"};
    write_csv(join(dir, "series.csv"), series_table(series));
    json body = {{"terminated", series.terminated},
                 {"termination_reason", series.termination_reason},
                 {"samples", series.size()},
                 {"series_manifest", series.manifest}};
    if (cfg.analysis.virial) {
        double rho = cfg.analysis.virial_rho;
        auto res = virial_identity_residual(traj, [rho](double) { return rho; });
        Table vt;
        vt.columns = {"t", "lhs", "rhs", "kinetic", "residual"};
        for (const auto& v : res) vt.rows.push_back({v.t, v.lhs, v.rhs, v.kinetic, v.residual});
        write_csv(join(dir, "virial.csv"), vt);
        files.push_back("virial.csv");
    }
    write_manifest(dir, "track", cfg.hash(), body, files);
    std::printf("tracked %d samples%s\n", series.size(),
                series.terminated ? (" (terminated: " + series.termination_reason + ")").c_str() : "");
    return 0;
}

OdeSeries run_ode(const RunConfig& cfg) {
    OdeState s0{cfg.initial.lambda, std::vector<double>(cfg.initial.lambda.size(), 0.0)};
    return integrate_ode(s0, cfg.k, cfg.initial.iota, cfg.solver.T, cfg.analysis.ode_dt);
}

int cmd_ode(const Globals& g) {
    RunConfig cfg = resolve(g);
    auto ode = run_ode(cfg);
    std::string dir = out_dir(g, cfg.out_dir);
    write_csv(join(dir, "ode.csv"), ode_table(ode));
    write_manifest(dir, "ode", cfg.hash(), {{"ode", ode_manifest(ode)}}, {"ode.csv"});
    std::printf("ode: %zu steps%s\n", ode.times.size() - 1,
                ode.halted ? (", halted at t = " + std::to_string(ode.halt_time)).c_str() : "");
    return 0;
}

int cmd_compare(const Globals& g, const std::string& traj_dir) {
    RunConfig cfg = resolve(g);
    auto traj = trajectory_for(cfg, traj_dir);
    auto series = track(traj, cfg.initial, track_options(cfg));
    auto ode = run_ode(cfg);
    auto cmp = compare_with_pde(ode, series, cfg.analysis.max_rel);
    std::string dir = out_dir(g, cfg.out_dir);
    Table t;
    t.columns = {"t"};
    int K = cfg.initial.size();
    for (int j = 1; j <= K; ++j) t.columns.push_back("lambda_pde_" + std::to_string(j));
    for (int j = 1; j <= K; ++j) t.columns.push_back("lambda_ode_" + std::to_string(j));
    for (int j = 1; j <= K; ++j) t.columns.push_back("rel_dev_" + std::to_string(j));
    for (std::size_t n = 0; n < cmp.times.size(); ++n) {
        std::vector<double> row{cmp.times[n]};
        for (int j = 0; j < K; ++j) row.push_back(series.fits[n].config.lambda[j]);
        for (int j = 0; j < K; ++j) row.push_back(ode.lambda_at(j, cmp.times[n]));
        row.insert(row.end(), cmp.rel_deviation[n].begin(), cmp.rel_deviation[n].end());
        t.rows.push_back(row);
    }
    write_csv(join(dir, "compare.csv"), t);
    json body = {{"valid_until", cmp.valid_until}, {"max_deviation", cmp.max_deviation},
                 {"left_window", cmp.left_window}, {"max_rel", cfg.analysis.max_rel}};
    if (K >= 2 && cfg.k >= 2 && series.size() >= 3) {
        double pde = early_acceleration(series.times, series.lambda(0), cfg.analysis.accel_window);
        double pred = ode_rhs(ode.states.front(), cfg.k, cfg.initial.iota).beta[0];
        body["lambda1_accel_pde"] = pde;
        body["lambda1_accel_ode"] = pred;
        body["accel_ratio"] = pde / pred;
        std::printf("lambda_1''(0+): tracked %.4g, ODE %.4g, ratio %.3f\n", pde, pred, pde / pred);
    }
    write_manifest(dir, "compare", cfg.hash(), body, {"compare.csv"});
    std::printf("ODE within %.0f%% up to t = %.4g (max deviation %.3g)\n", 100 * cfg.analysis.max_rel,
                cmp.valid_until, cmp.max_deviation);
    return 0;
}

int cmd_plot(const Globals& g, const std::vector<std::string>& inputs) {
    std::string dir = out_dir(g, "plots");
    std::vector<std::string> files;
    std::string hash = config_hash({{"command", "plot"}, {"inputs", inputs}});
    auto emit = [&](const std::string& name, const PlotSpec& spec, const std::vector<PlotSeries>& s) {
        write_text(join(dir, name), tag_svg(svg_plot(spec, s), hash));
        files.push_back(name);
    };
    for (const auto& in : inputs) {
        Table t = read_csv(in);
        std::string stem = fs::path(in).stem().string();
        auto col = [&](const std::string& c) { return t.values(c); };
        if (t.column("lambda_1") >= 0 && t.column("t") >= 0) {
            std::vector<PlotSeries> s;
            for (int j = 1; t.column("lambda_" + std::to_string(j)) >= 0; ++j)
                s.push_back({"lambda_" + std::to_string(j), col("t"), col("lambda_" + std::to_string(j))});
            emit(stem + "_lambda.svg", {"scales", "t", "lambda_j", true}, s);
        }
        for (const char* c : {"d", "mu", "U"})
            if (t.column(c) >= 0) emit(stem + "_" + c + ".svg", {c, "t", c, std::string(c) != "mu"}, {{c, col("t"), col(c)}});
        if (t.column("rel_dev_1") >= 0) {
            std::vector<PlotSeries> s;
            for (int j = 1; t.column("rel_dev_" + std::to_string(j)) >= 0; ++j)
                s.push_back({"bubble " + std::to_string(j), col("t"), col("rel_dev_" + std::to_string(j))});
            emit(stem + "_deviation.svg", {"relative deviation from the ODE", "t", "deviation", true}, s);
        }
        if (t.column("r") >= 0 && t.columns.size() > 1 && t.columns[1].rfind("E_ext_", 0) == 0) {
            std::vector<PlotSeries> s;
            auto r = col("r");
            std::vector<double> logr;
            for (double x : r) logr.push_back(std::log10(x));
            for (std::size_t c = 1; c < t.columns.size(); ++c) s.push_back({t.columns[c], logr, col(t.columns[c])});
            emit(stem + "_shells.svg", {"exterior energy", "log10 r", "E(u; r, inf)", false}, s);
        }
        if (t.column("discrete_energy") >= 0)
            emit(stem + "_energy.svg", {"energy", "t", "E"}, {{"discrete", col("t"), col("discrete_energy")}});
    }
    write_manifest(dir, "plot", hash, {{"inputs", inputs}}, files);
    std::printf("wrote %zu plots to %s\n", files.size(), dir.c_str());
    return files.empty() ? 2 : 0;
}

// Full pipeline for one config in its own directory.
json run_pipeline(RunConfig cfg, const std::string& dir) {
    fs::create_directories(dir);
    cfg.out_dir = dir;
    Trajectory traj;
    simulate_into(cfg, dir, &traj);
    json out = {{"scenario", cfg.scenario}, {"dir", dir}, {"config_hash", cfg.hash()}};
    if (cfg.analysis.track || cfg.analysis.ode_compare) {
        auto series = track(traj, cfg.initial, track_options(cfg));
        write_csv(join(dir, "series.csv"), series_table(series));
        out["terminated"] = series.terminated;
        if (cfg.analysis.ode_compare && cfg.k >= 2) {
            auto ode = run_ode(cfg);
            write_csv(join(dir, "ode.csv"), ode_table(ode));
            auto cmp = compare_with_pde(ode, series, cfg.analysis.max_rel);
            out["valid_until"] = cmp.valid_until;
        }
    }
    return out;
}

int cmd_sweep(const Globals& g, const std::vector<std::string>& configs) {
    std::string dir = out_dir(g, "sweep");
    std::vector<RunConfig> cfgs;
    for (const auto& p : configs) {
        Globals one = g;
        one.config_path = p;
        one.out.clear();
        cfgs.push_back(resolve(one));
    }
    std::vector<std::future<json>> jobs;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        std::string sub = join(dir, std::to_string(i) + "_" + cfgs[i].scenario);
        jobs.push_back(std::async(std::launch::async, run_pipeline, cfgs[i], sub));
    }
    json runs = json::array();
    int failed = 0;
    for (auto& j : jobs) {
        try {
            runs.push_back(j.get());
        } catch (const std::exception& e) {
            runs.push_back({{"error", e.what()}});
            ++failed;
        }
    }
    write_manifest(dir, "sweep", config_hash(runs), {{"runs", runs}}, {});
    std::printf("sweep: %zu runs, %d failed\n", cfgs.size(), failed);
    return failed ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial wave map experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "run configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "output directory");
    app.add_option("--tolerance", g.tolerance, "override verification tolerances")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "seed for perturbation generators")->check(CLI::NonNegativeNumber);

    int code = 0;
    int k_max = 6;
    double cut_c = 0.0, cut_R = 0.0;
    std::string snapshot, traj_dir;
    std::vector<std::string> inputs, configs;

    auto* verify = app.add_subcommand("verify-constants", "check closed-form constants against quadrature");
    verify->add_option("--kmax", k_max, "largest degree")->check(CLI::Range(2, 12));
    verify->callback([&] { code = cmd_verify_constants(g, k_max); });

    auto* cutoff = app.add_subcommand("build-cutoff", "construct and check the virial cutoff");
    cutoff->add_option("--c", cut_c, "cutoff parameter c");
    cutoff->add_option("--R", cut_R, "plateau radius R");
    cutoff->callback([&] { code = cmd_build_cutoff(g, cut_c, cut_R); });

    app.add_subcommand("simulate", "evolve the configured initial data")->callback([&] { code = cmd_simulate(g); });

    auto* fit = app.add_subcommand("fit", "modulation fit of one field");
    fit->add_option("--snapshot", snapshot, "field snapshot (default: configured initial data)")
        ->check(CLI::ExistingFile);
    fit->callback([&] { code = cmd_fit(g, snapshot); });

    auto* trk = app.add_subcommand("track", "fit every snapshot of a trajectory");
    trk->add_option("--trajectory", traj_dir, "directory written by simulate (default: simulate now)");
    trk->callback([&] { code = cmd_track(g, traj_dir); });

    app.add_subcommand("ode", "integrate the reduced scale ODE")->callback([&] { code = cmd_ode(g); });

    auto* cmp = app.add_subcommand("compare", "tracked scales against the reduced ODE");
    cmp->add_option("--trajectory", traj_dir, "directory written by simulate (default: simulate now)");
    cmp->callback([&] { code = cmd_compare(g, traj_dir); });

    auto* plot = app.add_subcommand("plot", "SVG figures from CSV outputs");
    plot->add_option("inputs", inputs, "CSV files")->required()->check(CLI::ExistingFile);
    plot->callback([&] { code = cmd_plot(g, inputs); });

    auto* sweep = app.add_subcommand("sweep", "run several configurations concurrently");
    sweep->add_option("configs", configs, "configuration files")->required()->check(CLI::ExistingFile);
    sweep->callback([&] { code = cmd_sweep(g, configs); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error" << (e.line ? " (line " + std::to_string(e.line) + ")" : "") << ": " << e.what()
                  << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const FitError& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return code;
}
