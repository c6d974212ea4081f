#include "wm/virial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "wm/errors.hpp"
#include "wm/solver.hpp"

namespace wm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_log(double p) { return std::isnan(p); }

// j-th derivative at x = 1 of x^p, or of log x when p is NaN.
double basis_derivative_at_1(double p, int j) {
    if (is_log(p)) {
        if (j == 0) return 0.0;
        double f = 1.0;
        for (int i = 1; i < j; ++i) f *= i;
        return (j % 2 == 1 ? 1.0 : -1.0) * f;
    }
    double f = 1.0;
    for (int i = 0; i < j; ++i) f *= (p - i);
    return f;
}

// phi and its first three s-derivatives in the log region, s = log x.
std::array<double, 4> phi_log(const CutoffProfile::Side& side, double c1, double s) {
    // phi = 1 - sign c1 (s + 1/2 + psi~'(x)/x)
    double t0 = s + 0.5, t1 = 1.0, t2 = 0.0, t3 = 0.0;
    for (int i = 0; i < 5; ++i) {
        double p = side.powers[i], a = side.coeffs[i];
        double b, e;  // psi~' / x contribution b e^{e s}
        if (is_log(p)) {
            b = a;
            e = -2.0;
        } else {
            if (p == 0.0) continue;
            b = a * p;
            e = p - 2.0;
        }
        double v = b * std::exp(e * s);
        t0 += v;
        t1 += e * v;
        t2 += e * e * v;
        t3 += e * e * e * v;
    }
    double f = -side.sign * c1;
    return {1.0 + f * t0, f * t1, f * t2, f * t3};
}

double q_log(const CutoffProfile::Side& side, double c1, double x) {
    double psi = 0.5 * x * x * std::log(x);
    for (int i = 0; i < 5; ++i) {
        double p = side.powers[i];
        psi += side.coeffs[i] * (is_log(p) ? std::log(x) : std::pow(x, p));
    }
    return 0.5 * x * x - side.sign * c1 * psi;
}

// Taper in sigma = sign (s - s0) in [0, W]: phi = T(sigma) (1 - S(sigma / W)).
// Returns d^n phi / d sigma^n, n = 0..3.
std::array<double, 4> phi_taper(const CutoffProfile::Side& side, double W, double sigma) {
    const auto& j = side.jet;
    double T[4] = {j[0] + j[1] * sigma + j[2] * sigma * sigma / 2 + j[3] * sigma * sigma * sigma / 6,
                   j[1] + j[2] * sigma + j[3] * sigma * sigma / 2, j[2] + j[3] * sigma, j[3]};
    double t = sigma / W;
    double G[4];  // derivatives of 1 - S(sigma / W)
    G[0] = 1.0 - smoothstep9(t, 0);
    for (int n = 1; n < 4; ++n) G[n] = -smoothstep9(t, n) / std::pow(W, n);
    static const int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    std::array<double, 4> out{};
    for (int n = 0; n < 4; ++n)
        for (int i = 0; i <= n; ++i) out[n] += binom[n][i] * T[i] * G[n - i];
    return out;
}

// phi jet in s on one side, for log x = s on that side of the plateau.
std::array<double, 4> phi_side(const CutoffProfile::Side& side, double c1, double W, double s) {
    double sigma = side.sign * (s - side.s0);
    if (sigma <= 0.0) return phi_log(side, c1, s);
    if (sigma >= W) return {0.0, 0.0, 0.0, 0.0};
    auto d = phi_taper(side, W, sigma);
    if (side.sign < 0) d[1] = -d[1], d[3] = -d[3];
    return d;
}

// sign * int_{s0}^{s} e^{2s'} phi(s') ds' for s = s0 + sign * sigma.
double taper_integral(const CutoffProfile::Side& side, double W, double sigma) {
    using GL = boost::math::quadrature::gauss<double, 30>;
    int panels = std::max(1, static_cast<int>(std::ceil(sigma / 2.0)));
    double h = sigma / panels, acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        acc += GL::integrate(
            [&](double sg) { return std::exp(2.0 * (side.s0 + side.sign * sg)) * phi_taper(side, W, sg)[0]; },
            p * h, (p + 1) * h);
    }
    return acc;
}

double q_side(const CutoffProfile::Side& side, double c1, double W, double s) {
    double sigma = side.sign * (s - side.s0);
    if (sigma <= 0.0) return q_log(side, c1, std::exp(s));
    if (sigma >= W) return side.q_end;
    return side.q_s0 + side.sign * taper_integral(side, W, sigma);
}

CutoffProfile::Side make_side(int sign, const std::array<double, 5>& powers, double c1, double W) {
    CutoffProfile::Side side;
    side.sign = sign;
    side.powers = powers;
    const double target[5] = {0.0, -0.5, -1.5, -1.0, 1.0};
    Eigen::Matrix<double, 5, 5> A;
    Eigen::Matrix<double, 5, 1> b;
    for (int j = 0; j < 5; ++j) {
        b(j) = target[j];
        for (int i = 0; i < 5; ++i) A(j, i) = basis_derivative_at_1(powers[i], j);
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(A);
    if (!lu.isInvertible()) throw NumericalError("cutoff matching system is singular", 0.0, 0.0);
    Eigen::Matrix<double, 5, 1> a = lu.solve(b);
    for (int i = 0; i < 5; ++i) side.coeffs[i] = a(i);
    side.matching_residual = (A * a - b).cwiseAbs().maxCoeff();
    side.s0 = sign / c1;
    auto d = phi_log(side, c1, side.s0);
    for (int n = 0; n < 4; ++n) side.jet[n] = (n % 2 == 1 ? sign : 1) * d[n];
    side.q_s0 = q_log(side, c1, std::exp(side.s0));
    side.q_end = side.q_s0 + sign * taper_integral(side, W, W);
    return side;
}

}  // namespace

CutoffProfile CutoffProfile::build(double c, double R, double width) {
    if (!(c >= kCutoffMinC) || !(c <= kCutoffMaxC)) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "cutoff parameter c must lie in [%.4g, %.4g]", kCutoffMinC, kCutoffMaxC);
        throw DomainError(buf);
    }
    if (!(R > 1.0)) throw DomainError("cutoff plateau radius R must exceed 1");
    if (!(width > 0.0)) throw DomainError("taper width must be positive");
    CutoffProfile p;
    p.c_ = c;
    p.c1_ = c / 4.0;
    p.R_ = R;
    p.width_ = width;
    p.R_tilde_ = R * std::exp(1.0 / p.c1_ + width);
    if (!std::isfinite(p.R_tilde_) || !std::isfinite(p.R_tilde_ * p.R_tilde_))
        throw DomainError("cutoff constancy radius overflows; increase c or decrease R");
    p.outer_ = make_side(+1, {0.0, kNaN, 2.0, -1.0, -2.0}, p.c1_, width);
    p.inner_ = make_side(-1, {2.0, 3.0, 4.0, 5.0, 6.0}, p.c1_, width);
    return p;
}

CutoffJet CutoffProfile::eval(double r, bool with_q) const {
    if (!(r >= 0.0)) throw DomainError("cutoff evaluated at negative radius");
    if (r >= 1.0 / R_ && r <= R_) return {0.5 * r * r, r, 1.0, 0.0, 0.0};
    const Side& side = r > R_ ? outer_ : inner_;
    if (r == 0.0) return {inner_.q_end / (R_ * R_), 0.0, 0.0, 0.0, 0.0};
    double x = r > R_ ? r / R_ : r * R_;
    double s = std::log(x);
    auto d = phi_side(side, c1_, width_, s);
    double qh = with_q ? q_side(side, c1_, width_, s) : 0.0;
    double h1 = x * d[0], h2 = d[0] + d[1], h3 = (d[1] + d[2]) / x, h4 = (d[3] - d[1]) / (x * x);
    // q(r) = R^2 q-hat(r/R) outside, R^-2 q-hat(rR) inside.
    double f = r > R_ ? R_ : 1.0 / R_;
    return {f * f * qh, f * h1, h2, h3 / f, h4 / (f * f)};
}

double CutoffProfile::phi(double r) const {
    if (r >= 1.0 / R_ && r <= R_) return 1.0;
    if (r == 0.0) return 0.0;
    const Side& side = r > R_ ? outer_ : inner_;
    double x = r > R_ ? r / R_ : r * R_;
    return phi_side(side, c1_, width_, std::log(x))[0];
}

nlohmann::json CutoffProfile::to_json() const {
    auto side_json = [](const Side& s) {
        nlohmann::json pw = nlohmann::json::array();
        for (double p : s.powers) pw.push_back(is_log(p) ? nlohmann::json("log") : nlohmann::json(p));
        return nlohmann::json{{"sign", s.sign},         {"basis", pw},       {"coeffs", s.coeffs},
                              {"matching_residual", s.matching_residual}, {"s0", s.s0}, {"jet", s.jet},
                              {"q_s0", s.q_s0},         {"q_end", s.q_end}};
    };
    return {{"format", "wm-cutoff"}, {"version", 1}, {"c", c_},           {"c1", c1_},
            {"R", R_},               {"R_tilde", R_tilde_}, {"width", width_}, {"outer", side_json(outer_)},
            {"inner", side_json(inner_)}};
}

CutoffProfile CutoffProfile::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "wm-cutoff" || j.value("version", 0) != 1)
        throw DomainError("not a version 1 cutoff document");
    CutoffProfile p = build(j.at("c"), j.at("R"), j.at("width"));
    auto same = [](const Side& s, const nlohmann::json& js) {
        for (int i = 0; i < 5; ++i)
            if (std::abs(s.coeffs[i] - js.at("coeffs")[i].get<double>()) > 1e-12 * (1 + std::abs(s.coeffs[i])))
                return false;
        return true;
    };
    if (!same(p.outer_, j.at("outer")) || !same(p.inner_, j.at("inner")))
        throw DomainError("stored cutoff coefficients do not match the construction");
    return p;
}

CutoffProfile build_cutoff(double c, double R) { return CutoffProfile::build(c, R); }

CutoffReport verify_cutoff(const CutoffProfile& profile, int samples) {
    CutoffReport rep;
    double c = profile.c(), R = profile.R(), Rt = profile.R_tilde();
    std::vector<double> rs;
    double lo = std::log(0.1 / Rt), hi = std::log(10.0 * Rt);
    for (int i = 0; i < samples; ++i) rs.push_back(std::exp(lo + (hi - lo) * i / (samples - 1)));
    // a few points inside each region and at the joins
    for (double r : {1.0, 1.0 / R, R, 0.5 * (1.0 / R + R), Rt, 1.0 / Rt, 2 * Rt, 0.5 / Rt}) rs.push_back(r);
    rep.samples = static_cast<int>(rs.size());
    auto fail = [&](const char* what, double r, double v) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s at r = %.6e (value %.6e)", what, r, v);
        rep.violations.push_back(buf);
        rep.ok = false;
    };
    rep.min_q2 = kInf;
    rep.min_phi = kInf;
    for (double r : rs) {
        CutoffJet j = profile.eval(r);
        if (r >= 1.0 / R && r <= R) {
            if (j.q != 0.5 * r * r || j.d1 != r || j.d2 != 1.0) fail("P1 plateau mismatch", r, j.q);
        }
        if (r >= Rt * (1 + 1e-12) || r <= (1 - 1e-12) / Rt) {
            if (j.d1 != 0.0 || j.d2 != 0.0 || j.d3 != 0.0 || j.d4 != 0.0) fail("P2 q not constant", r, j.d1);
        }
        double phi = j.d1 / r;
        rep.p3_q1 = std::max(rep.p3_q1, std::abs(phi));
        rep.p3_q2 = std::max(rep.p3_q2, std::abs(j.d2));
        rep.min_q2 = std::min(rep.min_q2, j.d2);
        rep.min_phi = std::min(rep.min_phi, phi);
        if (j.d2 < -c) fail("P4 q'' < -c", r, j.d2);
        if (phi < -c) fail("P4 q'/r < -c", r, phi);
        double p5 = std::abs(r * r * j.d4 + 2 * r * j.d3 - j.d2 + phi);
        rep.p5 = std::max(rep.p5, p5);
        if (p5 > c) fail("P5 r^2 |bilaplacian q| > c", r, p5);
        double p6 = std::abs(j.d2 - phi);
        rep.p6 = std::max(rep.p6, p6);
        if (p6 > c) fail("P6 r |(q'/r)'| > c", r, p6);

        // Central differences of each derivative, scaled by r^(n-2).
        double h = 1e-5 * r;
        CutoffJet a = profile.eval(r - h), b = profile.eval(r + h);
        double fd[4] = {(b.q - a.q) / (2 * h), (b.d1 - a.d1) / (2 * h), (b.d2 - a.d2) / (2 * h),
                        (b.d3 - a.d3) / (2 * h)};
        double an[4] = {j.d1, j.d2, j.d3, j.d4};
        for (int n = 0; n < 4; ++n) {
            double dev = std::abs(fd[n] - an[n]) * std::pow(r, n - 1);
            rep.fd_deviation = std::max(rep.fd_deviation, dev);
        }
    }
    if (rep.fd_deviation > 1e-4) fail("analytic derivatives disagree with finite differences", 0.0, rep.fd_deviation);
    return rep;
}

namespace {

void check_samples(const RadialGrid& grid, const std::vector<double>& g) {
    if (static_cast<int>(g.size()) != grid.size()) throw DomainError("samples do not match grid");
}

int parity_of(int k) { return k % 2 == 0 ? 1 : -1; }

}  // namespace

std::vector<double> apply_a(const CutoffProfile& profile, double lambda, int k, const RadialGrid& grid,
                            const std::vector<double>& g) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    check_samples(grid, g);
    std::vector<double> gr = grid.d_dr(g, parity_of(k), 0.0);
    const auto& r = grid.r();
    for (std::size_t i = 0; i < gr.size(); ++i) gr[i] *= profile.eval(r[i] / lambda, false).d1;
    return gr;
}

std::vector<double> apply_a_underline(const CutoffProfile& profile, double lambda, int k, const RadialGrid& grid,
                                      const std::vector<double>& g) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    check_samples(grid, g);
    std::vector<double> gr = grid.d_dr(g, parity_of(k), 0.0);
    const auto& r = grid.r();
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double x = r[i] / lambda;
        CutoffJet j = profile.eval(x, false);
        // q'(x) / (2r) = phi(x) / (2 lambda)
        out[i] = (j.d2 + profile.phi(x)) / (2 * lambda) * g[i] + j.d1 * gr[i];
    }
    return out;
}

double operator_bound_a(const CutoffProfile& profile) {
    // |q'| peaks in the outer taper; scan it in log x.
    double best = 0.0;
    double lo = std::log(profile.R()), hi = std::log(profile.R_tilde());
    for (int i = 0; i <= 20000; ++i) {
        double r = std::exp(lo + (hi - lo) * i / 20000.0);
        best = std::max(best, std::abs(profile.eval(r, false).d1));
    }
    return best;
}

double operator_bound_a_underline(const CutoffProfile& profile, int k) {
    // |a g| <= sup |r a| |g| / r and ||g / r||_{L^2} <= ||g||_H / k.
    double best = 0.0;
    double lo = -std::log(profile.R_tilde()), hi = std::log(profile.R_tilde());
    for (int i = 0; i <= 40000; ++i) {
        double x = std::exp(lo + (hi - lo) * i / 40000.0);
        CutoffJet j = profile.eval(x, false);
        best = std::max(best, std::abs(x * (j.d2 + profile.phi(x)) / 2));
    }
    return operator_bound_a(profile) + best / k;
}

double measure_operator_ratio(const CutoffProfile& profile, double lambda, int k, bool underline, int trials) {
    // Log-bumps centred at lambda * x_c for x_c across [R^-1, R_tilde]; the grid scales with lambda.
    double span = std::log(profile.R_tilde()) + 6.0;
    RadialGrid grid = RadialGrid::geometric(lambda * std::exp(-span), lambda * std::exp(span), 0.01);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        double sc = std::log(profile.R()) + (std::log(profile.R_tilde()) - std::log(profile.R())) * (t + 0.5) / trials;
        double freq = 40.0;
        auto g = grid.sample([&](double r) {
            double s = std::log(r / lambda) - sc;
            return std::exp(-s * s / 0.02) * std::sin(freq * s);
        });
        auto out = underline ? apply_a_underline(profile, lambda, k, grid, g) : apply_a(profile, lambda, k, grid, g);
        double num = pairing(grid, out, out);
        double den = norm_h_sq(k, grid, g);
        if (den > 0.0) best = std::max(best, std::sqrt(num / den));
    }
    return best;
}

double l0_a0_defect(const CutoffProfile& profile, int k, double lambda) {
    double span = std::log(profile.R_tilde()) + 10.0;
    RadialGrid grid = RadialGrid::geometric(lambda * std::exp(-span), lambda * std::exp(span), 0.01);
    auto lq = grid.sample([&](double r) { return lam_q(k, lambda, r); });
    auto a = apply_a_underline(profile, lambda, k, grid, lq);
    for (int i = 0; i < grid.size(); ++i) a[i] -= ulam_lam_q(k, lambda, grid.r()[i]);
    // Drop the one-sided stencil strips at the ends where the profile is constant anyway.
    double acc = 0.0;
    for (int i = 5; i < grid.size() - 5; ++i) acc += grid.weights()[i] * a[i] * a[i];
    return std::sqrt(acc);
}

PohozaevProbe pohozaev_probe(const CutoffProfile& profile, int k, double lambda, int trials, unsigned seed) {
    double span = std::log(profile.R_tilde()) + 6.0;
    RadialGrid grid = RadialGrid::geometric(lambda * std::exp(-span), lambda * std::exp(span), 0.01);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(-std::log(profile.R_tilde()) - 2.0, std::log(profile.R_tilde()) + 2.0);
    std::uniform_real_distribution<double> width(0.3, 3.0);
    std::normal_distribution<double> amp;
    PohozaevProbe out;
    out.trials = trials;
    out.c0 = -kInf;
    int p = parity_of(k);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> g(grid.size(), 0.0);
        for (int b = 0; b < 4; ++b) {
            double sc = centre(rng), w = width(rng), a = amp(rng);
            for (int i = 0; i < grid.size(); ++i) {
                double s = std::log(grid.r()[i] / lambda) - sc;
                g[i] += a * std::exp(-s * s / (2 * w * w));
            }
        }
        // taper so g vanishes well inside both ends of the grid
        for (int i = 0; i < grid.size(); ++i) {
            double s = std::log(grid.r()[i] / lambda);
            g[i] *= 1.0 - smoothstep9((std::abs(s) - (span - 4.0)) / 2.0);
        }
        auto lap = grid.laplacian(g, p, 0.0);
        std::vector<double> l0(grid.size());
        for (int i = 0; i < grid.size(); ++i) l0[i] = -lap[i] + double(k) * k * g[i] / (grid.r()[i] * grid.r()[i]);
        auto ag = apply_a_underline(profile, lambda, k, grid, g);
        double lhs = pairing(grid, ag, l0) * lambda;
        double h = norm_h_sq(k, grid, g);
        double ann = norm_e_sq(k, grid, g, {}, lambda / profile.R(), lambda * profile.R());
        double c0 = (ann - lhs) / h;
        if (c0 > out.c0) {
            out.c0 = c0;
            out.worst_lhs = lhs / h;
        }
    }
    return out;
}

namespace {

double chi_rho(double r, double rho) { return chi(r / rho); }

// chi_rho * (r d/dr chi_rho)
double chi_lam_chi(double r, double rho) {
    double x = r / rho;
    return chi(x) * x * chi_d(x, 1);
}

}  // namespace

double virial_functional(const VirialSample& s) {
    if (!(s.rho > 0.0)) throw DomainError("rho must be positive");
    const FieldState& f = s.field;
    auto ur = f.u_r();
    const auto& r = f.grid->r();
    std::vector<double> d(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        double c = chi_rho(r[i], s.rho);
        d[i] = f.u_dot[i] * r[i] * ur[i] * c * c;
    }
    return f.grid->integrate(d);
}

double virial_kinetic(const VirialSample& s) {
    if (!(s.rho > 0.0)) throw DomainError("rho must be positive");
    const FieldState& f = s.field;
    const auto& r = f.grid->r();
    std::vector<double> d(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        double v = f.u_dot[i] * chi_rho(r[i], s.rho);
        d[i] = v * v;
    }
    return f.grid->integrate(d);
}

double virial_error_omega(const VirialSample& s) {
    if (!(s.rho > 0.0)) throw DomainError("rho must be positive");
    const FieldState& f = s.field;
    auto ur = f.u_r();
    const auto& r = f.grid->r();
    double k2 = double(f.k) * f.k;
    std::vector<double> d(r.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] <= s.rho || r[i] >= 2 * s.rho) continue;
        double w = chi_lam_chi(r[i], s.rho);
        double sn = std::sin(f.u[i]);
        double lag = f.u_dot[i] * f.u_dot[i] + ur[i] * ur[i] - k2 * sn * sn / (r[i] * r[i]);
        d[i] = -2.0 * s.rho_prime / s.rho * f.u_dot[i] * r[i] * ur[i] * w - lag * w;
    }
    double v = f.grid->integrate(d);
    // Static background beyond the grid contributes only the Lagrangian term.
    if (f.background && 2 * s.rho > f.grid->r_last()) {
        const BubbleConfig& bg = *f.background;
        int k = f.k;
        v += integrate_radial(
                 [&](double rr) {
                     double q = multi_bubble(k, bg, rr), qr = multi_bubble_dr(k, bg, rr), sn = std::sin(q);
                     return -(qr * qr - k2 * sn * sn / (rr * rr)) * chi_lam_chi(rr, s.rho);
                 },
                 std::max(s.rho, f.grid->r_last()), 2 * s.rho)
                 .value;
    }
    return v;
}

std::vector<VirialResidual> virial_identity_residual(const Trajectory& traj, const std::function<double(double)>& rho,
                                                     const std::function<double(double)>& rho_prime) {
    const auto& sn = traj.snapshots;
    if (sn.size() < 3) throw DomainError("virial residual needs at least three snapshots");
    double dt = sn[1].t - sn[0].t;
    double rho_min = kInf;
    for (std::size_t i = 0; i < sn.size(); ++i) {
        if (i > 0 && std::abs((sn[i].t - sn[i - 1].t) - dt) > 1e-9 * dt)
            throw DomainError("virial residual needs uniform snapshot cadence");
        rho_min = std::min(rho_min, rho(sn[i].t));
    }
    if (dt > 0.5 * rho_min) throw DomainError("snapshot cadence too coarse for the cutoff radius");
    auto drho = [&](double t) {
        if (rho_prime) return rho_prime(t);
        double h = 1e-4 * dt;
        return (rho(t + h) - rho(t - h)) / (2 * h);
    };
    std::vector<double> v(sn.size());
    for (std::size_t i = 0; i < sn.size(); ++i) v[i] = virial_functional({sn[i].state, rho(sn[i].t), 0.0});
    std::vector<VirialResidual> out;
    for (std::size_t i = 1; i + 1 < sn.size(); ++i) {
        VirialResidual res;
        res.t = sn[i].t;
        res.lhs = (v[i + 1] - v[i - 1]) / (sn[i + 1].t - sn[i - 1].t);
        VirialSample s{sn[i].state, rho(res.t), drho(res.t)};
        res.kinetic = virial_kinetic(s);
        res.rhs = -res.kinetic + virial_error_omega(s);
        res.residual = res.lhs - res.rhs;
        out.push_back(res);
    }
    return out;
}

}  // namespace wm
