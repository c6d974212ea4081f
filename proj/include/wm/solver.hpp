#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wm/fields.hpp"

namespace wm {

enum class Scheme { leapfrog, rk4 };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct SolverConfig {
    double T = 1.0;
    double cadence = 0.1;      // time between stored snapshots
    double c_cfl = 0.5;
    double dt = 0.0;           // 0: largest admissible step dividing the cadence
    Scheme scheme = Scheme::leapfrog;
    double max_energy_growth = 0.1;

    // c_cfl * min(min spacing, r_min / k).
    double max_dt(const RadialGrid& grid, int k) const;
    nlohmann::json to_json() const;
    static SolverConfig from_json(const nlohmann::json& j);
};

struct Snapshot {
    double t = 0.0;
    FieldState state;
    double discrete_energy = 0.0;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    double dt = 0.0;
    nlohmann::json manifest;

    std::vector<double> times() const;
    const GridPtr& grid() const { return snapshots.front().state.grid; }
};

// Acceleration u_tt = Laplacian u - k^2 sin(2u) / (2 r^2) with the conservative
// second-order Laplacian; boundary nodes (held fixed) get 0.
std::vector<double> rhs_nonlinear(const FieldState& state);
// u_tt = Laplacian v - k^2 v / r^2, same stencil.
std::vector<double> rhs_linear(const FieldState& state);

// Energy conserved by the semi-discrete system (pi * sum over cells and nodes).
double discrete_energy(const FieldState& state, bool linear = false);

Trajectory evolve(const FieldState& state, const SolverConfig& config);
Trajectory evolve_linear(const FieldState& pair, const SolverConfig& config);

struct FiniteSpeedReport {
    double R = 0.0;
    std::vector<double> times;
    std::vector<double> margins;   // E(u(0); 0, R) - E(u(t); 0, R - t)
    double min_margin = 0.0;
    double h = 0.0;                // grid ds
    double measured_c = 0.0;       // max(0, -min_margin) / (h^2 E(0))
};
FiniteSpeedReport check_finite_speed(const Trajectory& traj, double R);

struct ConvergenceReport {
    std::vector<double> dts;
    std::vector<double> errors;    // E-norm distance of u(T) to the finest run
    std::vector<double> ratios;    // errors[i] / errors[i+1]
};
// Runs at dt, dt/2, ..., dt/2^(levels-1) plus a reference at dt/2^(levels+2).
ConvergenceReport temporal_convergence(const FieldState& state, SolverConfig config, int levels = 3,
                                       bool linear = false);

// Directory layout: trajectory.json (manifest, times, energies, dt) plus one
// field snapshot per stored time, snap_NNNNN.json.
void save_trajectory(const std::string& dir, const Trajectory& traj);
Trajectory load_trajectory(const std::string& dir);

// Hex digest of a JSON document, used to tag artifacts.
std::string config_hash(const nlohmann::json& j);

}  // namespace wm
