#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wm/fields.hpp"
#include "wm/io.hpp"
#include "wm/virial.hpp"

namespace wm {

struct Trajectory;

struct FitOptions {
    double tol = 1e-10;          // on max_j |G_j|
    double step_tol = 1e-13;     // polish until the log-scale update is this small
    int max_iter = 50;
};

// Decomposition u = Q(m, iota, lambda) + g with <Z_lambda_j | g> = 0.
struct ModulationFit {
    BubbleConfig config;
    GridPtr grid;
    int k = 1;
    std::vector<double> g, g_dot;
    // G_j = lambda_j^-1 <Z_lambda_j | g>, dimensionless.
    std::vector<double> ortho_residuals;
    std::vector<double> ratios;       // lambda_j / lambda_{j+1}
    double g_energy_sq = 0.0;         // ||g||_E^2
    double g_h_sq = 0.0;              // ||g||_H^2
    double sandwich = 0.0;            // ||g||_E^2 + sum_{j<M} ratio_j^k
    int iterations = 0;
};

// Newton in l_j = log lambda_j from `guess`, which fixes m and the signs.
// Throws DomainError on a sector mismatch and FitError when Newton fails.
ModulationFit fit_static(const FieldState& field, const BubbleConfig& guess, const FitOptions& opts = {});

struct DistanceReport {
    double value = 0.0;
    double value_sq = 0.0;
    BubbleConfig minimizer;
    double ratio_sum = 0.0;           // ratio part of value_sq at the minimizer
    double radius = 0.0;              // localization radius; 0 when the norm is global
    bool certified = true;            // false if no start converged
    int starts = 0;
    int iterations = 0;
};

struct ProximityOptions {
    std::vector<std::vector<double>> seeds;   // extra scale seeds, tried for every sign pattern
    int max_iter = 200;
};

// d^2 = inf ||v - Q(m, iota, lambda)||_E^2 + sum_{j<=N} (lambda_j/lambda_{j+1})^k with
// v = field - radiation and lambda_{N+1} = outer_scale (kInf drops that term).
// Signs range over patterns with m - sum iota equal to the sector at 0.
DistanceReport proximity_d(const FieldState& field, const FieldState* radiation, int m, int N,
                           double outer_scale = kInf, const ProximityOptions& opts = {});
// d_K(rho): norm on (rho, inf), N - K free bubbles, lambda_K = rho; all sign patterns.
DistanceReport proximity_local(const FieldState& field, const FieldState* radiation, double rho, int K, int N,
                               double outer_scale = kInf, const ProximityOptions& opts = {});
// delta_R: norm on (0, R), also minimized over m and M, lambda_{M+1} = R.
DistanceReport delta_r(const FieldState& field, double R, const ProximityOptions& opts = {});

// Radius where the energy in (r, r2) first reaches `level`, scanning inward from r2.
double energy_level_radius(const FieldState& field, double level, double r2 = kInf);
// sup{r : E(u; r, inf) = (N - K + 1/2) E(Q) + E_star}.
double mu_scale(const FieldState& field, int N, int K, double E_star = 0.0);

// j = 1..M-1 entries (0-based vector). k >= 3 returns the scales unchanged.
std::vector<double> xi_refined(const ModulationFit& fit, double L = 10.0);
std::vector<double> xi_refined_k1(const ModulationFit& fit, double L = 10.0);
// j = 1..M for k >= 2, j = 1..M-1 for the k = 1 variant.
std::vector<double> beta(const ModulationFit& fit, const CutoffProfile& cutoff);
std::vector<double> beta_k1(const ModulationFit& fit, const CutoffProfile& cutoff, double L = 10.0);

struct WeightedU {
    double value = 0.0;
    bool infinite = false;
    bool empty_alternating = false;   // A is empty; value 0 by convention
    std::vector<int> alternating;     // A, 1-based
};
// U = max_{i in A} (2^-i xi_i / lambda_{i+1})^k, +inf when d >= eta0.
WeightedU weighted_u(const BubbleConfig& config, const std::vector<double>& xi, int k, double d, double eta0);

struct TrackOptions {
    FitOptions fit;
    double eta0 = 0.3;               // d threshold at the first snapshot
    double max_jump = 1.5;           // largest allowed lambda ratio between snapshots
    double L = 10.0;
    double cutoff_c = 0.05, cutoff_R = 10.0;
    int mu_K = 1;                     // mu tracks the K-th bubble
    double outer_scale = kInf;
    bool with_distance = true;
};

struct TrackedSeries {
    std::vector<double> times;
    std::vector<ModulationFit> fits;
    std::vector<double> d, mu, U;
    std::vector<std::vector<double>> xi, beta;
    bool terminated = false;
    std::string termination_reason;
    nlohmann::json manifest;

    int size() const { return static_cast<int>(times.size()); }
    std::vector<double> lambda(int j) const;   // 0-based bubble index
};

// Columns t, lambda_1..K, xi_1..K-1, beta_1..K, d, mu, U.
Table series_table(const TrackedSeries& s);

TrackedSeries track(const Trajectory& traj, const BubbleConfig& guess, const TrackOptions& opts = {});

struct TimeInterval {
    double a = 0.0, b = 0.0;
    double peak = 0.0;
    double peak_time = 0.0;
};
// Excursions of d above epsilon that reach eta and return; endpoints at d = epsilon
// by linear interpolation. Excursions touching either end of the series are dropped.
std::vector<TimeInterval> detect_collision_intervals(const std::vector<double>& times, const std::vector<double>& d,
                                                     double epsilon, double eta);

// a_{i+1} = a_i + mu(a_i)/4 while b - a_i > 3 mu(a_i)/4, then b.
std::vector<double> partition_lipschitz(const std::function<double(double)>& mu, double a, double b);

struct ModulationResidual {
    double t = 0.0;
    double g_residual = 0.0;         // ||d_t g - g_dot - sum iota lambda' LamQ_lambda_||_H on r < cutoff
    double g_dot_residual = 0.0;     // ||d_t g_dot - (-L g + f_i + f_q)||_{L^2} on r < cutoff
    double g_dot_scale = 0.0;        // ||d_t g_dot||_{L^2} on r < cutoff
    double f_i_norm = 0.0;           // ||f_i||_{L^2} on r < cutoff
    double fq_l1 = 0.0;              // ||f_q||_{L^1}
    double fq_ratio = 0.0;           // fq_l1 / ||g||_H^2
};
std::vector<ModulationResidual> modulation_equation_residual(const Trajectory& traj, const TrackedSeries& series,
                                                             double cutoff_radius);

}  // namespace wm
