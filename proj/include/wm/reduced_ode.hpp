#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wm/io.hpp"

namespace wm {

struct TrackedSeries;

struct OdeState {
    std::vector<double> lambda;
    std::vector<double> beta;
};

// Leading-order system lambda_j' = beta_j,
//   beta_j' = -iota_j iota_{j+1} w^2 lambda_j^{k-1} / lambda_{j+1}^k
//             + iota_j iota_{j-1} w^2 lambda_{j-1}^k / lambda_j^{k+1},
// with lambda_0 = 0 and lambda_{K+1} = inf. k = 1 is not modelled.
OdeState ode_rhs(const OdeState& state, int k, const std::vector<int>& iota);

struct OdeSeries {
    int k = 2;
    std::vector<int> iota;
    std::vector<double> times;
    std::vector<OdeState> states;
    bool halted = false;          // scale ordering broke down
    double halt_time = 0.0;

    // Cubic Hermite interpolation of lambda_j (derivative beta_j) at t.
    double lambda_at(int j, double t) const;
};

// Classical RK4 with step dt (the last step is shortened to land on T).
OdeSeries integrate_ode(const OdeState& state0, int k, const std::vector<int>& iota, double T, double dt);

struct OdeComparison {
    std::vector<double> times;
    std::vector<std::vector<double>> rel_deviation;   // per time, per bubble
    double max_deviation = 0.0;                       // over the validity window
    double valid_until = 0.0;                         // last time with all deviations <= max_rel
    bool left_window = false;
};
OdeComparison compare_with_pde(const OdeSeries& ode, const TrackedSeries& tracked, double max_rel = 0.1);

// Second derivative at the first sample from a least-squares quadratic on [t0, t0 + window].
double early_acceleration(const std::vector<double>& times, const std::vector<double>& values, double window);

nlohmann::json ode_manifest(const OdeSeries& s);
// Columns t, lambda_1.., beta_1..
Table ode_table(const OdeSeries& s);

}  // namespace wm
