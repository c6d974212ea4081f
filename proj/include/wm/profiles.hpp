#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace wm {

// Pure multi-bubble m*pi + sum_j iota_j (Q(r/lambda_j) - pi).
struct BubbleConfig {
    int m = 0;
    std::vector<int> iota;
    std::vector<double> lambda;

    int size() const { return static_cast<int>(lambda.size()); }
    // Throws DomainError unless signs are +-1, scales positive and strictly increasing.
    void validate() const;
};

// Integer l with u(0) = l*pi.
int sector_of_config(const BubbleConfig& cfg);

enum class Measure { r_dr, dr_over_r, dr };

struct QuadratureSpec {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    int max_subdivisions = 4000;
    bool log_substitution = true;
    double panel_width = 0.5;    // in s = log r when log_substitution is set
    double s_min = -60.0;        // truncation of (0, inf) in s
    double s_max = 60.0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of fn(r) against the requested measure on [r1, r2]; r2 may be kInf.
// Throws NumericalError (carrying the partial sum) when the error estimate
// exceeds max(abs_tol, rel_tol * L1).
QuadResult integrate_radial(const std::function<double(double)>& fn, double r1, double r2,
                            Measure measure = Measure::r_dr, const QuadratureSpec& spec = {});

double q_profile(int k, double lambda, double r);
double lam_q(int k, double lambda, double r);
// d/dx of Lambda Q at x (unit scale).
double lam_q_dx(int k, double x);
// lambda^-1 (x d/dx + 1) Lambda Q at x = r/lambda.
double ulam_lam_q(int k, double lambda, double r);

// Cutoff: 1 on [0,1], 0 on [2,inf), degree-9 smoothstep in between.
double chi(double x);
// n-th derivative of chi, n in 0..4.
double chi_d(double x, int n);
// Degree-9 smoothstep S on [0,1] and its derivatives (n in 0..4), clamped outside.
double smoothstep9(double t, int n = 0);

double z_profile(int k, double x);
double z_profile_dx(int k, double x);

double multi_bubble(int k, const BubbleConfig& cfg, double r);
// d/dr of the multi-bubble (finite at r = 0).
double multi_bubble_dr(int k, const BubbleConfig& cfg, double r);

double nonlinearity_f(double u);
double nonlinearity_fprime(double u);
double f_interaction(int k, const BubbleConfig& cfg, double r);

struct PairingResult {
    double quadrature = 0.0;
    double prediction = 0.0;
    double rel_deviation = 0.0;
};
// <Lambda Q_{lambda_j} | f_i> with j 1-based, against the two-neighbour prediction.
PairingResult interaction_pairing(int k, const BubbleConfig& cfg, int j,
                                  const QuadratureSpec& spec = {});

// int_0^inf LamQ^3 * 4 r^{+-k} dr / r; sign = +1 or -1.
double q3_integral(int k, int sign, const QuadratureSpec& spec = {});

double energy_Q(int k, const QuadratureSpec& spec = {});
double exterior_energy_Q(int k, double r);
// Quadrature of the (Q, 0) energy density over [r1, r2].
double energy_Q_quadrature(int k, double r1, double r2, const QuadratureSpec& spec = {});

// k >= 2: full L2 norm squared. k = 1: truncated at R (required).
double norm_lam_q_sq(int k, double R = kInf, const QuadratureSpec& spec = {});
double norm_lam_q_sq_closed(int k, double R = kInf);
double omega_sq(int k);
double omega_sq_quadrature(int k, const QuadratureSpec& spec = {});

double multi_bubble_energy(int k, const BubbleConfig& cfg, const QuadratureSpec& spec = {});
double leading_order_energy(int k, const BubbleConfig& cfg);

}  // namespace wm
