#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wm/fields.hpp"

namespace wm {

// q and its first four derivatives at one radius.
struct CutoffJet {
    double q = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0;
};

// C^4 cutoff: q = r^2/2 on [1/R, R], constant outside [1/R_tilde, R_tilde].
//
// Outside the plateau q = r^2/2 -+ c1 (r^2 log r / 2 + psi~(r)) in the variable
// x = r/R (outer) or x = rR (inner) until phi = q'/x first gets near zero at
// log x = +-1/c1. There phi, as a function of s = log x, is replaced by its
// cubic Taylor polynomial times 1 - S(sigma/W), which reaches 0 after a log
// width W with all derivatives matched.
class CutoffProfile {
public:
    struct Side {
        int sign = 1;                      // +1 outer, -1 inner
        std::array<double, 5> powers{};    // basis exponents; NaN marks log x
        std::array<double, 5> coeffs{};    // psi~ = sum coeffs_i * basis_i
        double matching_residual = 0.0;    // max |row . coeffs - target|
        double s0 = 0.0;                   // start of the taper in log x
        std::array<double, 4> jet{};       // d^n phi / d sigma^n at s0
        double q_s0 = 0.0;                 // q-hat at s0
        double q_end = 0.0;                // q-hat on the constant region
    };

    static CutoffProfile build(double c, double R, double width = 8.0);

    double c() const { return c_; }
    double c1() const { return c1_; }
    double R() const { return R_; }
    double R_tilde() const { return R_tilde_; }
    double width() const { return width_; }
    const Side& outer() const { return outer_; }
    const Side& inner() const { return inner_; }

    // `with_q = false` skips the quadrature for q itself in the taper.
    CutoffJet eval(double r, bool with_q = true) const;
    double q(double r) const { return eval(r).q; }
    // q'(r) / r, finite at r = 0.
    double phi(double r) const;

    nlohmann::json to_json() const;
    static CutoffProfile from_json(const nlohmann::json& j);

private:
    double c_ = 0.0, c1_ = 0.0, R_ = 0.0, R_tilde_ = 0.0, width_ = 0.0;
    Side outer_, inner_;
};

// Smallest c for which R_tilde stays representable, and the largest c the
// construction was verified for.
constexpr double kCutoffMinC = 1.0 / 80.0;
constexpr double kCutoffMaxC = 0.5;

CutoffProfile build_cutoff(double c, double R);

struct CutoffReport {
    bool ok = true;
    int samples = 0;
    double p3_q1 = 0.0;        // max |q'| / r
    double p3_q2 = 0.0;        // max |q''|
    double min_q2 = 0.0;       // min q''
    double min_phi = 0.0;      // min q'/r
    double p5 = 0.0;           // max r^2 |Laplacian^2 q|
    double p6 = 0.0;           // max r |(q'/r)'|
    double fd_deviation = 0.0; // max scaled gap between analytic and finite-difference derivatives
    std::vector<std::string> violations;
};

// Checks P1-P6 on `samples` log-spaced radii covering [R_tilde^-1 / 10, 10 R_tilde]
// plus points of every region.
CutoffReport verify_cutoff(const CutoffProfile& profile, int samples = 10000);

// A(lambda) g = q'(r/lambda) g_r.
std::vector<double> apply_a(const CutoffProfile& profile, double lambda, int k, const RadialGrid& grid,
                            const std::vector<double>& g);
// A_(lambda) g = (q''(r/lambda)/(2 lambda) + q'(r/lambda)/(2r)) g + q'(r/lambda) g_r.
std::vector<double> apply_a_underline(const CutoffProfile& profile, double lambda, int k, const RadialGrid& grid,
                                      const std::vector<double>& g);

// Exact H -> L^2 operator norm of A(lambda): sup |q'|; the A_ value is an upper bound.
double operator_bound_a(const CutoffProfile& profile);
double operator_bound_a_underline(const CutoffProfile& profile, int k);
// max ||A g|| / ||g||_H over oscillating log-bumps placed relative to lambda.
double measure_operator_ratio(const CutoffProfile& profile, double lambda, int k, bool underline, int trials = 40);

// || ULam LamQ_lambda_ - A_(lambda) LamQ_lambda ||_{L^2}.
double l0_a0_defect(const CutoffProfile& profile, int k, double lambda);

struct PohozaevProbe {
    double c0 = 0.0;          // max over trials of (annulus - lambda <A_ g | L0 g>) / ||g||_H^2
    double worst_lhs = 0.0;   // lambda <A_ g | L0 g> / ||g||_H^2 at the worst trial
    int trials = 0;
};
// Random smooth g (sums of log-Gaussians) vanishing near 0 and infinity.
PohozaevProbe pohozaev_probe(const CutoffProfile& profile, int k, double lambda, int trials, unsigned seed);

struct VirialSample {
    FieldState field;
    double rho = 1.0;
    double rho_prime = 0.0;
};

// int u_dot r u_r chi_rho^2 r dr.
double virial_functional(const VirialSample& sample);
// int (u_dot chi_rho)^2 r dr.
double virial_kinetic(const VirialSample& sample);
// Cutoff error: both integrals over rho <= r <= 2 rho.
double virial_error_omega(const VirialSample& sample);

struct VirialResidual {
    double t = 0.0;
    double lhs = 0.0;      // centered difference of the functional
    double rhs = 0.0;      // -kinetic + Omega
    double kinetic = 0.0;
    double residual = 0.0; // lhs - rhs
};

struct Trajectory;
// Residual of the virial identity at interior snapshots. `rho_prime` defaults to
// a centered difference of `rho`.
std::vector<VirialResidual> virial_identity_residual(const Trajectory& traj, const std::function<double(double)>& rho,
                                                     const std::function<double(double)>& rho_prime = {});

}  // namespace wm
