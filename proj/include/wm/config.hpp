#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wm/fields.hpp"
#include "wm/solver.hpp"

namespace wm {

// Run description read from a nested key-value file:
//
//   wmlab-config 1
//   scenario = two_bubble
//   k = 2
//   grid {
//     kind = sinh
//     rmax = 40
//   }
//
// One statement per line; blocks open with `name {` and close with `}`.
struct GridSpecConfig {
    std::string kind = "sinh";   // sinh | geometric
    double a = 0.05;             // sinh core width, or r_min for geometric
    double rmax = 40.0;
    double ds = 0.01;
};

struct PerturbationConfig {
    double amplitude = 0.0;
    double center = 1.0;
    double width = 1.0;          // in log r
    bool velocity = false;       // perturb u_dot instead of u
    int random_bumps = 0;        // > 0: seeded bumps with random centers and signs
};

struct AnalysisConfig {
    bool track = true;
    bool virial = false;
    bool ode_compare = false;
    double eta0 = 0.3;
    double L = 10.0;
    double cutoff_c = 0.05;
    double cutoff_R = 10.0;
    double ode_dt = 1e-3;
    double max_rel = 0.1;
    double virial_rho = 1.0;
    double accel_window = 0.1;
};

struct RunConfig {
    int version = 1;
    std::string scenario = "run";
    int k = 2;
    GridSpecConfig grid;
    BubbleConfig initial{1, {1}, {1.0}};
    std::string snapshot;        // overrides `initial` when set
    PerturbationConfig perturbation;
    SolverConfig solver;
    AnalysisConfig analysis;
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    nlohmann::json to_json() const;
    std::string hash() const;
    std::string to_text() const;   // canonical form; parses back to an equal config
};

// Throws ConfigError naming the offending key and line.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

GridPtr build_grid(const GridSpecConfig& g);
// Initial field: snapshot, or the multi-bubble plus the perturbation.
FieldState initial_field(const RunConfig& cfg);

}  // namespace wm
