#include "wm/grid.hpp"

#include <algorithm>
#include <cmath>

#include "wm/errors.hpp"

namespace wm {

namespace {

constexpr int kHalf = 4;  // 9-point stencils, eighth order
const double kCentral[kHalf + 1] = {0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};

}  // namespace

std::vector<double> fornberg_weights(double x0, const std::vector<double>& x, int m) {
    int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int kk = mn; kk >= 1; --kk)
                    c[i][kk] = c1 * (kk * c[i - 1][kk - 1] - c5 * c[i - 1][kk]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int kk = mn; kk >= 1; --kk) c[j][kk] = (c4 * c[j][kk] - kk * c[j][kk - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

RadialGrid::RadialGrid(const GridSpec& spec) : spec_(spec) {
    if (!(spec.scale > 0.0) || !(spec.ds > 0.0)) throw DomainError("grid scale and ds must be positive");
    if (spec.n < 2 * kHalf + 2) throw DomainError("grid needs at least 10 nodes");
    int n = spec.n;
    r_.resize(n);
    drds_.resize(n);
    w_.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = i * spec.ds;
        r_[i] = r_of_s(s);
        drds_[i] = spec.kind == GridKind::geometric ? r_[i] : spec.scale * std::cosh(s);
        w_[i] = r_[i] * drds_[i] * spec.ds;
    }
    if (spec.kind == GridKind::sinh) r_[0] = 0.0;
    w_[0] *= 0.5;
    w_[n - 1] *= 0.5;
    for (int i = 1; i < n; ++i)
        if (!(r_[i] > r_[i - 1])) throw DomainError("grid nodes not strictly increasing");

    rh_.resize(n - 1);
    hh_.resize(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        rh_[i] = r_of_s((i + 0.5) * spec.ds);
        hh_[i] = r_[i + 1] - r_[i];
    }
    mass_.assign(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) mass_[i] = r_[i] * 0.5 * (hh_[i - 1] + hh_[i]);

    std::vector<double> nodes(2 * kHalf + 1);
    for (int p = 0; p < kHalf; ++p) {
        for (int q = 0; q <= 2 * kHalf; ++q) nodes[q] = q;
        left_.push_back(fornberg_weights(p, nodes, 1));
        right_.push_back(fornberg_weights(2 * kHalf - p, nodes, 1));
    }
}

RadialGrid RadialGrid::geometric(double r_min, double r_max, double ds) {
    if (!(r_min > 0.0) || !(r_max > r_min)) throw DomainError("geometric grid needs 0 < r_min < r_max");
    double span = std::log(r_max / r_min);
    int n = static_cast<int>(std::ceil(span / ds)) + 1;
    return RadialGrid(GridSpec{GridKind::geometric, r_min, span / (n - 1), n});
}

RadialGrid RadialGrid::sinh(double a, double r_max, double ds) {
    if (!(a > 0.0) || !(r_max > 0.0)) throw DomainError("sinh grid needs a > 0 and r_max > 0");
    double span = std::asinh(r_max / a);
    int n = static_cast<int>(std::ceil(span / ds)) + 1;
    return RadialGrid(GridSpec{GridKind::sinh, a, span / (n - 1), n});
}

double RadialGrid::r_of_s(double s) const {
    return spec_.kind == GridKind::geometric ? spec_.scale * std::exp(s) : spec_.scale * std::sinh(s);
}

double RadialGrid::s_of_r(double r) const {
    return spec_.kind == GridKind::geometric ? std::log(r / spec_.scale) : std::asinh(r / spec_.scale);
}

RadialGrid RadialGrid::scaled(double lambda) const {
    if (!(lambda > 0.0)) throw DomainError("scale factor must be positive");
    GridSpec s = spec_;
    s.scale *= lambda;
    return RadialGrid(s);
}

std::vector<double> RadialGrid::sample(const std::function<double(double)>& fn) const {
    std::vector<double> out(r_.size());
    for (std::size_t i = 0; i < r_.size(); ++i) out[i] = fn(r_[i]);
    return out;
}

double RadialGrid::integrate(const std::vector<double>& f) const {
    if (f.size() != r_.size()) throw DomainError("sample count does not match grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += w_[i] * f[i];
    return acc;
}

double RadialGrid::integrate_range(const std::vector<double>& f, double r1, double r2) const {
    if (f.size() != r_.size()) throw DomainError("sample count does not match grid");
    if (!(r2 > r1)) throw DomainError("integration range must satisfy r1 < r2");
    int n = size();
    double h = spec_.ds;
    double s1 = r1 <= r_.front() ? 0.0 : s_of_r(r1);
    double s2 = r2 >= r_.back() ? (n - 1) * h : s_of_r(r2);
    if (s2 <= s1) return 0.0;
    auto dens = [&](int i) { return f[i] * r_[i] * drds_[i]; };
    // Segment [i, i+1] contributes the integral of the linear interpolant over its overlap.
    int i0 = std::clamp(static_cast<int>(std::floor(s1 / h)), 0, n - 2);
    int i1 = std::clamp(static_cast<int>(std::floor(s2 / h)), 0, n - 2);
    double acc = 0.0;
    for (int i = i0; i <= i1; ++i) {
        double a = std::max(s1, i * h), b = std::min(s2, (i + 1) * h);
        if (b <= a) continue;
        double da = dens(i), db = dens(i + 1);
        double ta = (a - i * h) / h, tb = (b - i * h) / h;
        double va = da + (db - da) * ta, vb = da + (db - da) * tb;
        acc += 0.5 * (va + vb) * (b - a);
    }
    return acc;
}

std::vector<double> RadialGrid::d_ds(const std::vector<double>& f, int parity, double offset) const {
    int n = size();
    if (static_cast<int>(f.size()) != n) throw DomainError("sample count does not match grid");
    std::vector<double> out(n, 0.0);
    double inv = 1.0 / spec_.ds;
    auto value = [&](int i) {
        if (i >= 0) return f[i];
        return offset + parity * (f[-i] - offset);
    };
    for (int i = 0; i < n; ++i) {
        bool near_left = i < kHalf && !origin_closed();
        bool near_right = i >= n - kHalf;
        if (near_left) {
            const auto& w = left_[i];
            double acc = 0.0;
            for (int q = 0; q <= 2 * kHalf; ++q) acc += w[q] * f[q];
            out[i] = acc * inv;
        } else if (near_right) {
            const auto& w = right_[n - 1 - i];
            double acc = 0.0;
            int base = n - 1 - 2 * kHalf;
            for (int q = 0; q <= 2 * kHalf; ++q) acc += w[q] * f[base + q];
            out[i] = acc * inv;
        } else {
            double acc = 0.0;
            for (int q = 1; q <= kHalf; ++q) acc += kCentral[q] * (value(i + q) - value(i - q));
            out[i] = acc * inv;
        }
    }
    return out;
}

std::vector<double> RadialGrid::d_dr(const std::vector<double>& f, int parity, double offset) const {
    std::vector<double> out = d_ds(f, parity, offset);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= drds_[i];
    return out;
}

std::vector<double> RadialGrid::laplacian(const std::vector<double>& f, int parity, double offset) const {
    std::vector<double> fr = d_dr(f, parity, offset);
    std::vector<double> flux(fr.size());
    for (std::size_t i = 0; i < fr.size(); ++i) flux[i] = r_[i] * fr[i];
    // r f_r has the same parity as f about the origin, with zero offset.
    std::vector<double> out = d_dr(flux, parity, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = r_[i] > 0.0 ? out[i] / r_[i] : 0.0;
    return out;
}

std::vector<double> RadialGrid::laplacian2(const std::vector<double>& f) const {
    int n = size();
    if (static_cast<int>(f.size()) != n) throw DomainError("sample count does not match grid");
    std::vector<double> out(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) {
        double fp = rh_[i] * (f[i + 1] - f[i]) / hh_[i];
        double fm = rh_[i - 1] * (f[i] - f[i - 1]) / hh_[i - 1];
        out[i] = (fp - fm) / mass_[i];
    }
    return out;
}

double RadialGrid::interpolate(const std::vector<double>& f, double r, int parity, double offset) const {
    int n = size();
    if (static_cast<int>(f.size()) != n) throw DomainError("sample count does not match grid");
    if (r <= r_.front()) return f.front();
    if (r >= r_.back()) return f.back();
    double s = s_of_r(r) / spec_.ds;
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
    int lo = std::clamp(i - 1, origin_closed() ? -1 : 0, n - 4);
    auto value = [&](int j) { return j >= 0 ? f[j] : offset + parity * (f[-j] - offset); };
    double acc = 0.0;
    for (int a = lo; a < lo + 4; ++a) {
        double l = 1.0;
        for (int b = lo; b < lo + 4; ++b)
            if (b != a) l *= (s - b) / double(a - b);
        acc += l * value(a);
    }
    return acc;
}

double RadialGrid::min_spacing() const { return *std::min_element(hh_.begin(), hh_.end()); }

double RadialGrid::min_positive_radius() const { return r_[0] > 0.0 ? r_[0] : r_[1]; }

}  // namespace wm
