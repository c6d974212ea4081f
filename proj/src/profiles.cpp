#include "wm/profiles.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "wm/errors.hpp"

namespace wm {

namespace {

constexpr double kPi = std::numbers::pi;

void require_scale(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("scale must be positive");
}

void require_degree(int k) {
    if (k < 1) throw DomainError("equivariance degree must be >= 1");
}

// x^k / (1 + x^{2k}) without overflow for large x.
double bump_ratio(int k, double x) {
    if (x <= 1.0) {
        double xk = std::pow(x, k);
        return xk / (1.0 + xk * xk);
    }
    double yk = std::pow(1.0 / x, k);
    return yk / (1.0 + yk * yk);
}

}  // namespace

void BubbleConfig::validate() const {
    if (iota.size() != lambda.size()) throw DomainError("iota and lambda lengths differ");
    for (int s : iota)
        if (s != 1 && s != -1) throw DomainError("signs must be +1 or -1");
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (!(lambda[j] > 0.0) || !std::isfinite(lambda[j]))
            throw DomainError("scales must be positive and finite");
        if (j > 0 && !(lambda[j] > lambda[j - 1]))
            throw DomainError("scales must be strictly increasing");
    }
}

int sector_of_config(const BubbleConfig& cfg) {
    int s = 0;
    for (int i : cfg.iota) s += i;
    return cfg.m - s;
}

QuadResult integrate_radial(const std::function<double(double)>& fn, double r1, double r2,
                            Measure measure, const QuadratureSpec& spec) {
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0))
        throw DomainError("quadrature tolerances must be positive");
    if (!(r1 >= 0.0) || !(r2 > r1)) throw DomainError("integration range must satisfy 0 <= r1 < r2");

    double a, b, width;
    if (spec.log_substitution) {
        a = std::max(r1 > 0.0 ? std::log(r1) : spec.s_min, spec.s_min);
        b = std::min(std::isfinite(r2) ? std::log(r2) : spec.s_max, spec.s_max);
        width = spec.panel_width;
    } else {
        if (!std::isfinite(r2)) throw DomainError("infinite range requires log substitution");
        a = r1;
        b = r2;
        width = std::max(spec.panel_width, (r2 - r1) / 64.0);
    }
    QuadResult out;
    if (!(b > a)) return out;

    struct Ctx {
        const std::function<double(double)>* fn;
        Measure measure;
        bool log_sub;
    } ctx{&fn, measure, spec.log_substitution};
    auto eval = [](double x, void* p) -> double {
        auto* c = static_cast<Ctx*>(p);
        double r = c->log_sub ? std::exp(x) : x;
        double v = (*c->fn)(r);
        double jac = c->log_sub ? r : 1.0;
        switch (c->measure) {
            case Measure::r_dr: return v * r * jac;
            case Measure::dr_over_r: return v / r * jac;
            case Measure::dr: return v * jac;
        }
        return v;
    };
    gsl_function F{eval, &ctx};

    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    std::vector<double> pts(panels + 1);
    for (int p = 0; p <= panels; ++p) pts[p] = a + (b - a) * p / panels;
    pts.back() = b;
    std::size_t limit = static_cast<std::size_t>(std::max(spec.max_subdivisions, panels + 1));

    static thread_local bool handler_off = (gsl_set_error_handler_off(), true);
    (void)handler_off;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(limit);
    double value = 0.0, err = 0.0;
    int status = gsl_integration_qagp(&F, pts.data(), pts.size(), spec.abs_tol, spec.rel_tol, limit, ws, &value,
                                      &err);
    out.panels = static_cast<int>(ws->size);
    gsl_integration_workspace_free(ws);
    out.value = value;
    out.error = err;
    double allowed = std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
    // Roundoff-limited results are accepted when the estimate still meets a 100x looser bound.
    bool ok = status == GSL_SUCCESS || (status == GSL_EROUND && err <= 100.0 * allowed);
    if (!std::isfinite(value) || !ok) {
        std::ostringstream msg;
        msg << "integrate_radial: " << gsl_strerror(status) << "; error estimate " << err << " vs " << allowed
            << " after " << out.panels << " subintervals";
        throw NumericalError(msg.str(), value, err);
    }
    return out;
}

double q_profile(int k, double lambda, double r) {
    require_degree(k);
    require_scale(lambda);
    if (r < 0.0) throw DomainError("radius must be nonnegative");
    return 2.0 * std::atan(std::pow(r / lambda, k));
}

double lam_q(int k, double lambda, double r) {
    require_degree(k);
    require_scale(lambda);
    if (r < 0.0) throw DomainError("radius must be nonnegative");
    return 2.0 * k * bump_ratio(k, r / lambda);
}

double lam_q_dx(int k, double x) {
    // 2k^2 x^{k-1} (1 - x^{2k}) / (1 + x^{2k})^2
    if (x <= 1.0) {
        double x2k = std::pow(x, 2 * k);
        return 2.0 * k * k * std::pow(x, k - 1) * (1.0 - x2k) / ((1.0 + x2k) * (1.0 + x2k));
    }
    double y = 1.0 / x;
    double y2k = std::pow(y, 2 * k);
    return 2.0 * k * k * std::pow(y, k + 1) * (y2k - 1.0) / ((1.0 + y2k) * (1.0 + y2k));
}

double ulam_lam_q(int k, double lambda, double r) {
    require_degree(k);
    require_scale(lambda);
    double x = r / lambda;
    return (x * lam_q_dx(k, x) + 2.0 * k * bump_ratio(k, x)) / lambda;
}

double smoothstep9(double t, int n) {
    static const double c[10] = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return n == 0 ? 1.0 : 0.0;
    double acc = 0.0;
    for (int p = 9; p >= n; --p) {
        double coef = c[p];
        for (int q = 0; q < n; ++q) coef *= (p - q);
        acc = acc * t + coef;
    }
    return acc;
}

double chi(double x) { return 1.0 - smoothstep9(x - 1.0, 0); }

double chi_d(double x, int n) {
    if (n == 0) return chi(x);
    return -smoothstep9(x - 1.0, n);
}

double z_profile(int k, double x) {
    require_degree(k);
    double lq = 2.0 * k * bump_ratio(k, x);
    return k <= 2 ? chi(x) * lq : lq;
}

double z_profile_dx(int k, double x) {
    require_degree(k);
    if (k >= 3) return lam_q_dx(k, x);
    return chi_d(x, 1) * 2.0 * k * bump_ratio(k, x) + chi(x) * lam_q_dx(k, x);
}

double multi_bubble(int k, const BubbleConfig& cfg, double r) {
    double u = cfg.m * kPi;
    for (int j = 0; j < cfg.size(); ++j)
        u += cfg.iota[j] * (q_profile(k, cfg.lambda[j], r) - kPi);
    return u;
}

double multi_bubble_dr(int k, const BubbleConfig& cfg, double r) {
    double du = 0.0;
    for (int j = 0; j < cfg.size(); ++j) {
        double lam = cfg.lambda[j];
        double x = r / lam;
        // Lambda Q(x) / x = 2k x^{k-1} / (1 + x^{2k})
        double v;
        if (x <= 1.0) {
            double x2k = std::pow(x, 2 * k);
            v = 2.0 * k * std::pow(x, k - 1) / (1.0 + x2k);
        } else {
            double y = 1.0 / x;
            double y2k = std::pow(y, 2 * k);
            v = 2.0 * k * std::pow(y, k + 1) / (1.0 + y2k);
        }
        du += cfg.iota[j] * v / lam;
    }
    return du;
}

double nonlinearity_f(double u) { return 0.5 * std::sin(2.0 * u); }
double nonlinearity_fprime(double u) { return std::cos(2.0 * u); }

double f_interaction(int k, const BubbleConfig& cfg, double r) {
    if (!(r > 0.0)) throw DomainError("f_interaction requires r > 0");
    double sum = 0.0;
    for (int j = 0; j < cfg.size(); ++j)
        sum += cfg.iota[j] * nonlinearity_f(q_profile(k, cfg.lambda[j], r));
    return -(double(k) * k / (r * r)) * (nonlinearity_f(multi_bubble(k, cfg, r)) - sum);
}

PairingResult interaction_pairing(int k, const BubbleConfig& cfg, int j, const QuadratureSpec& spec) {
    require_degree(k);
    cfg.validate();
    int M = cfg.size();
    if (j < 1 || j > M) throw DomainError("bubble index out of range");
    double lam = cfg.lambda[j - 1];
    auto integrand = [&](double r) { return lam_q(k, lam, r) * f_interaction(k, cfg, r); };
    PairingResult out;
    out.quadrature = integrate_radial(integrand, 0.0, kInf, Measure::r_dr, spec).value;
    double c = 8.0 * k * k;
    if (j > 1) out.prediction -= cfg.iota[j - 2] * c * std::pow(cfg.lambda[j - 2] / lam, k);
    if (j < M) out.prediction += cfg.iota[j] * c * std::pow(lam / cfg.lambda[j], k);
    double diff = std::abs(out.quadrature - out.prediction);
    out.rel_deviation = out.prediction != 0.0 ? diff / std::abs(out.prediction) : diff;
    return out;
}

double q3_integral(int k, int sign, const QuadratureSpec& spec) {
    require_degree(k);
    if (sign != 1 && sign != -1) throw DomainError("weight sign must be +-1");
    // (Lambda Q)^3 * 4 r^{+-k} in log form to avoid underflow times overflow in the tails.
    auto integrand = [&](double r) {
        double b = bump_ratio(k, r);
        if (b == 0.0) return 0.0;
        return 32.0 * k * k * k * std::exp(3.0 * std::log(b) + sign * k * std::log(r));
    };
    return integrate_radial(integrand, 0.0, kInf, Measure::dr_over_r, spec).value;
}

double energy_Q_quadrature(int k, double r1, double r2, const QuadratureSpec& spec) {
    require_degree(k);
    auto density = [&](double r) {
        double qr = lam_q(k, 1.0, r) / r;
        double s = std::sin(q_profile(k, 1.0, r));
        return kPi * (qr * qr + double(k) * k * s * s / (r * r));
    };
    return integrate_radial(density, r1, r2, Measure::r_dr, spec).value;
}

double energy_Q(int k, const QuadratureSpec& spec) { return energy_Q_quadrature(k, 0.0, kInf, spec); }

double exterior_energy_Q(int k, double r) {
    require_degree(k);
    if (r < 0.0) throw DomainError("radius must be nonnegative");
    if (!std::isfinite(r)) return 0.0;
    if (r <= 1.0) return 4.0 * kPi * k / (1.0 + std::pow(r, 2 * k));
    double y2k = std::pow(1.0 / r, 2 * k);
    return 4.0 * kPi * k * y2k / (1.0 + y2k);
}

double norm_lam_q_sq(int k, double R, const QuadratureSpec& spec) {
    require_degree(k);
    if (k == 1 && !std::isfinite(R)) throw DomainError("k = 1: Lambda Q is not square integrable; give R");
    auto integrand = [&](double r) {
        double l = lam_q(k, 1.0, r);
        return l * l;
    };
    return integrate_radial(integrand, 0.0, R, Measure::r_dr, spec).value;
}

double norm_lam_q_sq_closed(int k, double R) {
    require_degree(k);
    if (k == 1) {
        if (!std::isfinite(R)) throw DomainError("k = 1: Lambda Q is not square integrable; give R");
        return -2.0 * R * R / (1.0 + R * R) + 2.0 * std::log1p(R * R);
    }
    if (std::isfinite(R)) throw DomainError("truncated closed form only available for k = 1");
    return 2.0 * kPi / std::sin(kPi / k);
}

double omega_sq(int k) {
    require_degree(k);
    if (k == 1) throw DomainError("omega^2 undefined for k = 1");
    return 4.0 * k * k * std::sin(kPi / k) / kPi;
}

double omega_sq_quadrature(int k, const QuadratureSpec& spec) {
    require_degree(k);
    if (k == 1) throw DomainError("omega^2 undefined for k = 1");
    return 8.0 * k * k / norm_lam_q_sq(k, kInf, spec);
}

double multi_bubble_energy(int k, const BubbleConfig& cfg, const QuadratureSpec& spec) {
    require_degree(k);
    cfg.validate();
    if (cfg.size() == 0) return 0.0;
    auto density = [&](double r) {
        double ur = multi_bubble_dr(k, cfg, r);
        double s = std::sin(multi_bubble(k, cfg, r));
        return kPi * (ur * ur + double(k) * k * s * s / (r * r));
    };
    return integrate_radial(density, 0.0, kInf, Measure::r_dr, spec).value;
}

double leading_order_energy(int k, const BubbleConfig& cfg) {
    require_degree(k);
    cfg.validate();
    int M = cfg.size();
    double e = M * 4.0 * kPi * k;
    for (int j = 0; j + 1 < M; ++j)
        e += 16.0 * k * kPi * cfg.iota[j] * cfg.iota[j + 1] * std::pow(cfg.lambda[j] / cfg.lambda[j + 1], k);
    return e;
}

}  // namespace wm
