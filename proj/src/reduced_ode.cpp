#include "wm/reduced_ode.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "wm/errors.hpp"
#include "wm/modulation.hpp"
#include "wm/profiles.hpp"

namespace wm {

namespace {

void check_state(const OdeState& s, const std::vector<int>& iota) {
    if (s.lambda.size() != s.beta.size() || s.lambda.size() != iota.size() || s.lambda.empty())
        throw DomainError("state and signs must have the same positive length");
    for (int i : iota)
        if (i != 1 && i != -1) throw DomainError("signs must be +-1");
}

bool ordered(const OdeState& s) {
    for (std::size_t j = 0; j < s.lambda.size(); ++j) {
        if (!(s.lambda[j] > 0.0) || !std::isfinite(s.lambda[j])) return false;
        if (j + 1 < s.lambda.size() && !(s.lambda[j] < s.lambda[j + 1])) return false;
    }
    return true;
}

OdeState axpy(const OdeState& a, double h, const OdeState& d) {
    OdeState o = a;
    for (std::size_t j = 0; j < a.lambda.size(); ++j) {
        o.lambda[j] += h * d.lambda[j];
        o.beta[j] += h * d.beta[j];
    }
    return o;
}

}  // namespace

OdeState ode_rhs(const OdeState& s, int k, const std::vector<int>& iota) {
    if (k == 1) throw DomainError("the reduced ODE is not modelled for k = 1");
    check_state(s, iota);
    double w2 = omega_sq(k);
    std::size_t K = s.lambda.size();
    OdeState d;
    d.lambda = s.beta;
    d.beta.assign(K, 0.0);
    for (std::size_t j = 0; j < K; ++j) {
        double l = s.lambda[j];
        if (j + 1 < K) d.beta[j] -= iota[j] * iota[j + 1] * w2 * std::pow(l, k - 1) / std::pow(s.lambda[j + 1], k);
        if (j > 0) d.beta[j] += iota[j] * iota[j - 1] * w2 * std::pow(s.lambda[j - 1], k) / std::pow(l, k + 1);
    }
    return d;
}

OdeSeries integrate_ode(const OdeState& state0, int k, const std::vector<int>& iota, double T, double dt) {
    check_state(state0, iota);
    if (!(dt > 0.0) || !(T >= 0.0)) throw DomainError("need dt > 0 and T >= 0");
    if (!ordered(state0)) throw DomainError("initial scales must be positive and increasing");
    OdeSeries out;
    out.k = k;
    out.iota = iota;
    out.times.push_back(0.0);
    out.states.push_back(state0);
    long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    OdeState y = state0;
    double t = 0.0;
    for (long n = 0; n < steps; ++n) {
        double h = std::min(dt, T - t);
        if (n == steps - 1) h = T - t;
        auto k1 = ode_rhs(y, k, iota);
        auto k2 = ode_rhs(axpy(y, h / 2, k1), k, iota);
        auto k3 = ode_rhs(axpy(y, h / 2, k2), k, iota);
        auto k4 = ode_rhs(axpy(y, h, k3), k, iota);
        OdeState next = y;
        for (std::size_t j = 0; j < y.lambda.size(); ++j) {
            next.lambda[j] += h / 6 * (k1.lambda[j] + 2 * k2.lambda[j] + 2 * k3.lambda[j] + k4.lambda[j]);
            next.beta[j] += h / 6 * (k1.beta[j] + 2 * k2.beta[j] + 2 * k3.beta[j] + k4.beta[j]);
        }
        if (!ordered(next)) {
            out.halted = true;
            out.halt_time = t;
            break;
        }
        y = next;
        t = n == steps - 1 ? T : t + h;
        out.times.push_back(t);
        out.states.push_back(y);
    }
    return out;
}

double OdeSeries::lambda_at(int j, double t) const {
    if (times.empty()) throw DomainError("empty series");
    if (t < times.front() || t > times.back() * (1 + 1e-12) + 1e-15) throw DomainError("time outside the series");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    if (i + 1 >= times.size()) return states.back().lambda.at(j);
    double h = times[i + 1] - times[i], s = (t - times[i]) / h;
    double p0 = states[i].lambda.at(j), p1 = states[i + 1].lambda.at(j);
    double m0 = states[i].beta.at(j) * h, m1 = states[i + 1].beta.at(j) * h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
}

OdeComparison compare_with_pde(const OdeSeries& ode, const TrackedSeries& tracked, double max_rel) {
    OdeComparison c;
    bool inside = true;
    for (int n = 0; n < tracked.size(); ++n) {
        double t = tracked.times[n];
        if (t > ode.times.back() * (1 + 1e-12)) break;
        const auto& lam = tracked.fits[n].config.lambda;
        if (lam.size() != ode.states.front().lambda.size()) throw DomainError("bubble counts differ");
        std::vector<double> dev;
        double worst = 0.0;
        for (std::size_t j = 0; j < lam.size(); ++j) {
            double v = std::abs(lam[j] / ode.lambda_at(static_cast<int>(j), t) - 1.0);
            dev.push_back(v);
            worst = std::max(worst, v);
        }
        c.times.push_back(t);
        c.rel_deviation.push_back(dev);
        if (inside && worst <= max_rel) {
            c.valid_until = t;
            c.max_deviation = std::max(c.max_deviation, worst);
        } else {
            inside = false;
            c.left_window = true;
        }
    }
    return c;
}

double early_acceleration(const std::vector<double>& times, const std::vector<double>& values, double window) {
    if (times.size() != values.size() || times.empty()) throw DomainError("need matching, nonempty samples");
    double t0 = times.front();
    std::vector<int> idx;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] - t0 <= window * (1 + 1e-12)) idx.push_back(static_cast<int>(i));
    if (idx.size() < 3) throw DomainError("need at least three samples in the window");
    Eigen::MatrixXd A(idx.size(), 3);
    Eigen::VectorXd b(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        double t = times[idx[r]] - t0;
        A(r, 0) = 1.0;
        A(r, 1) = t;
        A(r, 2) = t * t;
        b[r] = values[idx[r]];
    }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
    return 2.0 * c[2];
}

nlohmann::json ode_manifest(const OdeSeries& s) {
    return {{"format", "wm-ode-series"}, {"version", 1},         {"k", s.k},
            {"iota", s.iota},            {"halted", s.halted},   {"halt_time", s.halt_time},
            {"steps", s.times.empty() ? 0 : s.times.size() - 1}};
}

Table ode_table(const OdeSeries& s) {
    Table t;
    std::size_t K = s.states.empty() ? 0 : s.states.front().lambda.size();
    t.columns.push_back("t");
    for (std::size_t j = 1; j <= K; ++j) t.columns.push_back("lambda_" + std::to_string(j));
    for (std::size_t j = 1; j <= K; ++j) t.columns.push_back("beta_" + std::to_string(j));
    for (std::size_t n = 0; n < s.times.size(); ++n) {
        std::vector<double> row{s.times[n]};
        row.insert(row.end(), s.states[n].lambda.begin(), s.states[n].lambda.end());
        row.insert(row.end(), s.states[n].beta.begin(), s.states[n].beta.end());
        t.rows.push_back(row);
    }
    return t;
}

}  // namespace wm
