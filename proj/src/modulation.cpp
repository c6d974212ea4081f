#include "wm/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/NonLinearOptimization>

#include "wm/errors.hpp"
#include "wm/solver.hpp"

namespace wm {

namespace {

constexpr double kPi = std::numbers::pi;

int parity_of(int k) { return k % 2 == 0 ? 1 : -1; }

double energy_of_q(int k) { return 4.0 * kPi * k; }

std::vector<double> sample_config(int k, const BubbleConfig& cfg, const RadialGrid& grid) {
    return grid.sample([&](double r) { return multi_bubble(k, cfg, r); });
}

// Coefficients c_i with sum c_i f_i = grid.integrate_range(f, r1, r2).
std::vector<double> range_weights(const RadialGrid& grid, double r1, double r2) {
    int n = grid.size();
    if (r1 <= grid.r_first() && r2 >= grid.r_last()) return grid.weights();
    std::vector<double> c(n, 0.0);
    if (r1 >= grid.r_last() || r2 <= grid.r_first()) return c;
    double h = grid.ds();
    double s1 = r1 <= grid.r_first() ? 0.0 : grid.s_of_r(r1);
    double s2 = r2 >= grid.r_last() ? (n - 1) * h : grid.s_of_r(r2);
    const auto& r = grid.r();
    const auto& drds = grid.drds();
    int i0 = std::clamp(static_cast<int>(std::floor(s1 / h)), 0, n - 2);
    int i1 = std::clamp(static_cast<int>(std::floor(s2 / h)), 0, n - 2);
    for (int i = i0; i <= i1; ++i) {
        double a = std::max(s1, i * h), b = std::min(s2, (i + 1) * h);
        if (b <= a) continue;
        double ta = (a - i * h) / h, tb = (b - i * h) / h;
        c[i] += 0.5 * (b - a) * ((1 - ta) + (1 - tb)) * r[i] * drds[i];
        c[i + 1] += 0.5 * (b - a) * (ta + tb) * r[i + 1] * drds[i + 1];
    }
    return c;
}

void check_sector(const FieldState& field, const BubbleConfig& cfg) {
    if (cfg.m != field.sector.m || sector_of_config(cfg) != field.sector.ell) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "sign pattern gives sector (%d, %d) but the field is in (%d, %d)",
                      sector_of_config(cfg), cfg.m, field.sector.ell, field.sector.m);
        throw DomainError(buf);
    }
}

// Orthogonality map G_j = lambda_j^-2 int Z(r/lambda_j) g r dr and its Jacobian in log-scales.
struct OrthoSystem {
    const FieldState& field;
    BubbleConfig cfg;

    std::vector<double> g;
    Eigen::VectorXd G;
    Eigen::MatrixXd J;

    void evaluate(const Eigen::VectorXd& l, bool jacobian) {
        const RadialGrid& grid = *field.grid;
        int M = cfg.size();
        int k = field.k;
        for (int j = 0; j < M; ++j) cfg.lambda[j] = std::exp(l[j]);
        auto mb = sample_config(k, cfg, grid);
        g.resize(mb.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = field.u[i] - mb[i];
        const auto& w = grid.weights();
        const auto& r = grid.r();
        G.resize(M);
        J.resize(M, M);
        std::vector<std::vector<double>> lq;
        if (jacobian)
            for (int i = 0; i < M; ++i)
                lq.push_back(grid.sample([&](double rr) { return cfg.iota[i] * lam_q(k, cfg.lambda[i], rr); }));
        for (int j = 0; j < M; ++j) {
            double lam = cfg.lambda[j], inv2 = 1.0 / (lam * lam);
            double acc = 0.0, dacc = 0.0;
            std::vector<double> z(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                double x = r[i] / lam;
                z[i] = z_profile(k, x);
                acc += w[i] * z[i] * g[i];
                if (jacobian) dacc += w[i] * (x * z_profile_dx(k, x) + 2.0 * z[i]) * g[i];
            }
            G[j] = acc * inv2;
            if (!jacobian) continue;
            for (int i = 0; i < M; ++i) {
                double p = 0.0;
                for (std::size_t q = 0; q < g.size(); ++q) p += w[q] * z[q] * lq[i][q];
                J(j, i) = p * inv2;
            }
            J(j, j) -= dacc * inv2;
        }
    }
};

void finish_fit(const FieldState& field, ModulationFit& fit) {
    fit.grid = field.grid;
    fit.k = field.k;
    fit.g_dot = field.u_dot;
    fit.g_energy_sq = norm_e_sq(field.k, *field.grid, fit.g, fit.g_dot);
    fit.g_h_sq = norm_h_sq(field.k, *field.grid, fit.g);
    fit.ratios.clear();
    fit.sandwich = fit.g_energy_sq;
    for (int j = 0; j + 1 < fit.config.size(); ++j) {
        double q = fit.config.lambda[j] / fit.config.lambda[j + 1];
        fit.ratios.push_back(q);
        fit.sandwich += std::pow(q, field.k);
    }
}

// ---- proximity ----------------------------------------------------------

// Least-squares form of the distance functional in log-scales. The chain of
// scales is [lower] lambda_1..lambda_N [upper]; consecutive ratios are penalized.
struct DistanceProblem {
    const RadialGrid* grid = nullptr;
    int k = 1;
    int m = 0;
    std::vector<int> iota;
    std::vector<double> v;
    std::vector<double> sqrt_w;
    std::vector<int> active;       // nodes with nonzero weight
    double lower = 0.0;            // 0: no lower scale
    double upper = kInf;           // kInf: no upper scale
    double const_part = 0.0;       // ||v_dot||^2 on the range

    int n_free() const { return static_cast<int>(iota.size()); }
    int n_ratio() const {
        int c = n_free() + (lower > 0.0 ? 1 : 0) + (std::isfinite(upper) ? 1 : 0);
        return std::max(0, c - 1);
    }
    int rows() const { return 2 * static_cast<int>(active.size()) + n_ratio(); }

    BubbleConfig config(const Eigen::VectorXd& l) const {
        BubbleConfig c{m, iota, {}};
        for (int j = 0; j < n_free(); ++j) c.lambda.push_back(std::exp(l[j]));
        return c;
    }

    // log of the chain entries and the index of each in l (-1 for fixed ends)
    void chain(const Eigen::VectorXd& l, std::vector<double>& logs, std::vector<int>& idx) const {
        logs.clear();
        idx.clear();
        if (lower > 0.0) logs.push_back(std::log(lower)), idx.push_back(-1);
        for (int j = 0; j < n_free(); ++j) logs.push_back(l[j]), idx.push_back(j);
        if (std::isfinite(upper)) logs.push_back(std::log(upper)), idx.push_back(-1);
    }

    std::vector<double> residual_field(const Eigen::VectorXd& l) const {
        auto mb = sample_config(k, config(l), *grid);
        std::vector<double> g(v.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = v[i] - mb[i];
        return g;
    }

    void residuals(const Eigen::VectorXd& l, Eigen::VectorXd& f) const {
        auto g = residual_field(l);
        auto gr = grid->d_dr(g, parity_of(k), 0.0);
        const auto& r = grid->r();
        int na = static_cast<int>(active.size());
        f.resize(rows());
        for (int a = 0; a < na; ++a) {
            int i = active[a];
            f[a] = sqrt_w[i] * gr[i];
            f[na + a] = r[i] > 0.0 ? sqrt_w[i] * k * g[i] / r[i] : 0.0;
        }
        std::vector<double> logs;
        std::vector<int> idx;
        chain(l, logs, idx);
        for (int j = 0; j + 1 < static_cast<int>(logs.size()); ++j)
            f[2 * na + j] = std::exp(0.5 * k * (logs[j] - logs[j + 1]));
    }

    void jacobian(const Eigen::VectorXd& l, Eigen::MatrixXd& J) const {
        int na = static_cast<int>(active.size());
        J.setZero(rows(), n_free());
        const auto& r = grid->r();
        BubbleConfig c = config(l);
        for (int j = 0; j < n_free(); ++j) {
            // d g / d l_j = iota_j LamQ(r / lambda_j)
            auto dg = grid->sample([&](double rr) { return c.iota[j] * lam_q(k, c.lambda[j], rr); });
            auto dgr = grid->d_dr(dg, parity_of(k), 0.0);
            for (int a = 0; a < na; ++a) {
                int i = active[a];
                J(a, j) = sqrt_w[i] * dgr[i];
                J(na + a, j) = r[i] > 0.0 ? sqrt_w[i] * k * dg[i] / r[i] : 0.0;
            }
        }
        std::vector<double> logs;
        std::vector<int> idx;
        chain(l, logs, idx);
        for (int j = 0; j + 1 < static_cast<int>(logs.size()); ++j) {
            double q = std::exp(0.5 * k * (logs[j] - logs[j + 1]));
            if (idx[j] >= 0) J(2 * na + j, idx[j]) += 0.5 * k * q;
            if (idx[j + 1] >= 0) J(2 * na + j, idx[j + 1]) -= 0.5 * k * q;
        }
    }

    double ratio_sum(const Eigen::VectorXd& l) const {
        std::vector<double> logs;
        std::vector<int> idx;
        chain(l, logs, idx);
        double s = 0.0;
        for (int j = 0; j + 1 < static_cast<int>(logs.size()); ++j) s += std::exp(k * (logs[j] - logs[j + 1]));
        return s;
    }
};

struct LmFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const DistanceProblem& p;
    int inputs() const { return p.n_free(); }
    int values() const { return p.rows(); }
    int operator()(const Eigen::VectorXd& l, Eigen::VectorXd& f) const {
        p.residuals(l, f);
        return 0;
    }
    int df(const Eigen::VectorXd& l, Eigen::MatrixXd& J) const {
        p.jacobian(l, J);
        return 0;
    }
};

FieldState subtract_radiation(const FieldState& field, const FieldState* radiation) {
    field.validate();
    if (!radiation) return field;
    radiation->validate();
    if (!radiation->grid->compatible(*field.grid) || radiation->k != field.k)
        throw DomainError("radiation must live on the field's grid with the same k");
    if (!(radiation->sector == Sector{0, 0})) throw DomainError("radiation must be in the vacuum sector");
    FieldState v = field;
    for (int i = 0; i < v.size(); ++i) v.u[i] -= radiation->u[i], v.u_dot[i] -= radiation->u_dot[i];
    v.background.reset();
    return v;
}

std::vector<std::vector<int>> sign_patterns(int n, std::optional<int> sum) {
    std::vector<std::vector<int>> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> p(n);
        int s = 0;
        for (int j = 0; j < n; ++j) s += p[j] = (mask >> j) & 1 ? -1 : 1;
        if (!sum || s == *sum) out.push_back(p);
    }
    return out;
}

// Scale seeds from the energy shells of v in (r1, r2): the j-th bubble from
// inside sits where the energy outside it is (n - j + 1/2) E(Q).
std::vector<double> shell_seeds(const FieldState& v, int n, double r1, double r2) {
    std::vector<double> seeds;
    double eq = energy_of_q(v.k);
    double lo = std::max(r1, v.grid->r_first() > 0 ? v.grid->r_first() : v.grid->r()[1]);
    double hi = std::isfinite(r2) ? r2 : v.grid->r_last();
    double prev = lo;
    for (int j = 1; j <= n; ++j) {
        double s;
        try {
            s = energy_level_radius(v, (n - j + 0.5) * eq, r2);
        } catch (const DomainError&) {
            s = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * j / (n + 1.0));
        }
        s = std::max(s, prev * 1.01);
        s = std::max(s, r1 * 1.01);
        seeds.push_back(s);
        prev = s;
    }
    return seeds;
}

DistanceReport minimize_distance(const FieldState& v, int m, int n_free, const std::vector<std::vector<int>>& patterns,
                                 double r1, double r2, double lower, double upper, const ProximityOptions& opts) {
    const RadialGrid& grid = *v.grid;
    DistanceProblem base;
    base.grid = &grid;
    base.k = v.k;
    base.m = m;
    base.v = v.u;
    auto w = range_weights(grid, r1, r2);
    base.sqrt_w.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        base.sqrt_w[i] = std::sqrt(w[i]);
        if (w[i] > 0.0) base.active.push_back(static_cast<int>(i));
    }
    base.lower = lower;
    base.upper = upper;
    for (std::size_t i = 0; i < w.size(); ++i) base.const_part += w[i] * v.u_dot[i] * v.u_dot[i];

    std::vector<std::vector<double>> seeds;
    if (n_free > 0) {
        seeds.push_back(shell_seeds(v, n_free, r1, r2));
        for (const auto& s : opts.seeds)
            if (static_cast<int>(s.size()) == n_free) seeds.push_back(s);
    } else {
        seeds.push_back({});
    }

    DistanceReport best;
    best.value_sq = kInf;
    best.certified = false;
    best.radius = lower > 0.0 ? lower : (std::isfinite(r2) ? r2 : 0.0);
    for (const auto& pat : patterns) {
        DistanceProblem p = base;
        p.iota = pat;
        for (const auto& seed : seeds) {
            Eigen::VectorXd l(n_free);
            for (int j = 0; j < n_free; ++j) l[j] = std::log(seed[j]);
            bool converged = true;
            int iters = 0;
            if (n_free > 0) {
                LmFunctor fn{p};
                Eigen::LevenbergMarquardt<LmFunctor> lm(fn);
                lm.parameters.maxfev = opts.max_iter;
                lm.parameters.xtol = 1e-12;
                lm.parameters.ftol = 1e-14;
                auto status = lm.minimize(l);
                iters = static_cast<int>(lm.nfev);
                converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                            status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                            status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                            status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                            status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                            status == Eigen::LevenbergMarquardtSpace::FtolTooSmall;
            }
            ++best.starts;
            best.iterations += iters;
            bool ordered = true;
            for (int j = 0; j + 1 < n_free; ++j) ordered = ordered && l[j] < l[j + 1];
            if (!ordered || !l.allFinite()) continue;
            Eigen::VectorXd f;
            p.residuals(l, f);
            double val = f.squaredNorm() + p.const_part;
            if (val < best.value_sq) {
                best.value_sq = val;
                best.minimizer = p.config(l);
                best.ratio_sum = p.ratio_sum(l);
                best.certified = converged;
            }
        }
    }
    if (!std::isfinite(best.value_sq)) {
        best.certified = false;
        return best;
    }
    best.value = std::sqrt(best.value_sq);
    return best;
}

// ---- exterior energy -------------------------------------------------------

// Cumulative E(r, inf) on and around the grid, fourth order in the grid spacing.
struct EnergyCurve {
    const FieldState& f;
    std::vector<double> F;     // energy density * r * dr/ds at the nodes
    std::vector<double> C;     // E(r_i, inf)

    explicit EnergyCurve(const FieldState& field) : f(field) {
        const RadialGrid& g = *f.grid;
        int n = g.size();
        if (n < 4) throw DomainError("grid too small");
        auto dens = energy_density(f);
        F.resize(n);
        for (int i = 0; i < n; ++i) F[i] = dens[i] * g.r()[i] * g.drds()[i];
        C.assign(n, 0.0);
        C[n - 1] = f.background ? energy(f, g.r_last(), kInf) : 0.0;
        for (int i = n - 2; i >= 0; --i) C[i] = C[i + 1] + segment(i, i * g.ds());
    }

    // Cubic through the four nodes around segment i, evaluated at s.
    double cubic(int i, double s) const {
        int n = static_cast<int>(F.size());
        int p = std::clamp(i - 1, 0, n - 4);
        double h = f.grid->ds();
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
            double l = 1.0;
            for (int b = 0; b < 4; ++b)
                if (b != a) l *= (s - (p + b) * h) / ((a - b) * h);
            acc += l * F[p + a];
        }
        return acc;
    }

    // Integral over [s, s_{i+1}] of the cubic; three-point Gauss is exact.
    double segment(int i, double s) const {
        double b = (i + 1) * f.grid->ds();
        double mid = 0.5 * (s + b), half = 0.5 * (b - s);
        double x = std::sqrt(0.6);
        return half * (5.0 / 9.0 * cubic(i, mid - half * x) + 8.0 / 9.0 * cubic(i, mid) + 5.0 / 9.0 * cubic(i, mid + half * x));
    }

    double at(double r) const {
        const RadialGrid& g = *f.grid;
        if (r >= g.r_last()) return f.background ? energy(f, r, kInf) : 0.0;
        if (r <= g.r_first()) {
            double inner = (f.background && r < g.r_first()) ? energy(f, r, g.r_first()) : 0.0;
            return C[0] + inner;
        }
        double s = g.s_of_r(r);
        int i = std::clamp(static_cast<int>(std::floor(s / g.ds())), 0, g.size() - 2);
        return C[i + 1] + segment(i, s);
    }
};

}  // namespace

// ---- static fit ----------------------------------------------------------------

ModulationFit fit_static(const FieldState& field, const BubbleConfig& guess, const FitOptions& opts) {
    field.validate();
    guess.validate();
    check_sector(field, guess);
    int M = guess.size();
    ModulationFit fit;
    fit.config = guess;
    if (M == 0) {
        auto mb = sample_config(field.k, guess, *field.grid);
        fit.g.resize(mb.size());
        for (std::size_t i = 0; i < mb.size(); ++i) fit.g[i] = field.u[i] - mb[i];
        finish_fit(field, fit);
        return fit;
    }
    OrthoSystem sys{field, guess, {}, {}, {}};
    Eigen::VectorXd l(M);
    for (int j = 0; j < M; ++j) l[j] = std::log(guess.lambda[j]);
    // scales must stay where the grid resolves them
    const RadialGrid& grid = *field.grid;
    double l_min = std::log(grid.r_first() > 0.0 ? grid.r_first() : grid.r()[1]);
    double l_max = std::log(grid.r_last());
    if (l.minCoeff() < l_min || l.maxCoeff() > l_max) throw DomainError("guess scales lie outside the grid");
    double last_step = kInf;
    bool done = false;
    int it = 0;
    for (; it <= opts.max_iter; ++it) {
        sys.evaluate(l, true);
        double gmax = sys.G.cwiseAbs().maxCoeff();
        if (gmax == 0.0 || (gmax <= opts.tol && last_step <= opts.step_tol)) {
            done = true;
            break;
        }
        if (it == opts.max_iter) break;
        Eigen::VectorXd step = sys.J.fullPivLu().solve(-sys.G);
        if (!step.allFinite()) break;
        // at most a factor e per scale and iteration
        double big = step.cwiseAbs().maxCoeff();
        if (big > 1.0) step /= big;
        // halve on residual increase
        double alpha = 1.0;
        OrthoSystem trial = sys;
        bool improved = false;
        for (int h = 0; h < 12; ++h, alpha *= 0.5) {
            Eigen::VectorXd lt = l + alpha * step;
            if (lt.minCoeff() < l_min || lt.maxCoeff() > l_max) continue;
            trial.evaluate(lt, false);
            if (trial.G.allFinite() && trial.G.cwiseAbs().maxCoeff() <= gmax) {
                improved = true;
                break;
            }
        }
        if (!improved) {
            // residual at its floor
            if (gmax <= opts.tol) done = true;
            break;
        }
        l += alpha * step;
        last_step = (alpha * step).cwiseAbs().maxCoeff();
    }
    sys.evaluate(l, false);
    fit.config = sys.cfg;
    fit.g = sys.g;
    fit.iterations = it;
    fit.ortho_residuals.assign(sys.G.data(), sys.G.data() + M);
    if (!done) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "modulation Newton did not converge after %d iterations (max |G| = %.3g)", it,
                      sys.G.cwiseAbs().maxCoeff());
        throw FitError(buf);
    }
    for (int j = 0; j + 1 < M; ++j)
        if (!(fit.config.lambda[j] < fit.config.lambda[j + 1])) throw FitError("fitted scales lost their ordering");
    finish_fit(field, fit);
    return fit;
}

// ---- proximity ------------------------------------------------------------------

DistanceReport proximity_d(const FieldState& field, const FieldState* radiation, int m, int N, double outer_scale,
                           const ProximityOptions& opts) {
    if (N < 0) throw DomainError("N must be nonnegative");
    if (!(outer_scale > 0.0)) throw DomainError("outer scale must be positive");
    FieldState v = subtract_radiation(field, radiation);
    int ell = v.sector.ell;
    if (v.sector.m != m) throw DomainError("m does not match the field's sector at infinity");
    auto patterns = sign_patterns(N, m - ell);
    if (patterns.empty()) throw DomainError("no sign pattern with N bubbles connects the sector");
    return minimize_distance(v, m, N, patterns, 0.0, kInf, 0.0, outer_scale, opts);
}

DistanceReport proximity_local(const FieldState& field, const FieldState* radiation, double rho, int K, int N,
                               double outer_scale, const ProximityOptions& opts) {
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    if (K < 0 || K > N) throw DomainError("need 0 <= K <= N");
    if (!(outer_scale > 0.0)) throw DomainError("outer scale must be positive");
    FieldState v = subtract_radiation(field, radiation);
    auto patterns = sign_patterns(N - K, std::nullopt);
    return minimize_distance(v, v.sector.m, N - K, patterns, rho, kInf, rho, outer_scale, opts);
}

DistanceReport delta_r(const FieldState& field, double R, const ProximityOptions& opts) {
    if (!(R > 0.0)) throw DomainError("R must be positive");
    field.validate();
    int ell = field.sector.ell;
    double eq = energy_of_q(field.k);
    int max_m = static_cast<int>(std::floor(energy(field, 0.0, R) / eq)) + 1;
    max_m = std::min(max_m, 5);
    DistanceReport best;
    best.value_sq = kInf;
    for (int M = 0; M <= max_m; ++M)
        for (const auto& pat : sign_patterns(M, std::nullopt)) {
            int m = ell;
            for (int s : pat) m += s;
            auto rep = minimize_distance(field, m, M, {pat}, 0.0, R, 0.0, R, opts);
            best.starts += rep.starts;
            best.iterations += rep.iterations;
            if (rep.value_sq < best.value_sq) {
                int starts = best.starts, iters = best.iterations;
                best = rep;
                best.starts = starts;
                best.iterations = iters;
            }
        }
    best.radius = R;
    return best;
}

// ---- energy scales --------------------------------------------------------------

double energy_level_radius(const FieldState& field, double level, double r2) {
    field.validate();
    EnergyCurve curve(field);
    const RadialGrid& g = *field.grid;
    double c2 = std::isfinite(r2) ? curve.at(r2) : 0.0;
    double target = level + c2;
    double r_lo = g.r_first();
    double total = field.background && !g.origin_closed() ? curve.at(0.0) : curve.C[0];
    if (!(level > 0.0) || !(target < total)) throw DomainError("energy level outside the attainable range");
    auto fn = [&](double s) { return curve.at(std::exp(s)) - target; };
    double a, b;
    // bracket: largest node below r2 with C >= target
    int n = g.size();
    int top = n - 1;
    if (std::isfinite(r2)) while (top > 0 && g.r()[top] >= r2) --top;
    int i = top;
    while (i >= 0 && curve.C[i] < target) --i;
    if (i < 0 || g.r()[i] <= 0.0) {
        // below the first positive node
        if (g.origin_closed()) {
            a = std::log(g.r()[1] * 1e-12);
            b = std::log(g.r()[1]);
        } else {
            b = std::log(r_lo);
            a = b - 1.0;
            while (fn(a) < 0.0 && a > b - 700.0) a -= 1.0;
        }
    } else if (i == top) {
        a = std::log(g.r()[i]);
        b = std::isfinite(r2) ? std::log(r2) : a + 1.0;
        if (!std::isfinite(r2))
            while (fn(b) > 0.0 && b < a + 700.0) b += 1.0;
    } else {
        a = std::log(g.r()[i]);
        b = std::log(g.r()[i + 1]);
    }
    if (fn(a) < 0.0 || fn(b) > 0.0) throw NumericalError("energy level bracket failed");
    if (fn(b) == 0.0) return std::exp(b);
    boost::uintmax_t iters = 200;
    auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-15 * (1.0 + std::abs(x)); };
    auto root = boost::math::tools::toms748_solve(fn, a, b, tol, iters);
    return std::exp(0.5 * (root.first + root.second));
}

double mu_scale(const FieldState& field, int N, int K, double E_star) {
    if (K < 0 || K > N) throw DomainError("need 0 <= K <= N");
    double level = (N - K + 0.5) * energy_of_q(field.k) + E_star;
    double total = energy(field);
    if (!(level > 0.0) || !(level < total)) throw DomainError("mu level must lie strictly between 0 and E(u)");
    return energy_level_radius(field, level);
}

// ---- refined parameters -----------------------------------------------------------

std::vector<double> xi_refined(const ModulationFit& fit, double L) {
    if (!(L > 0.0)) throw DomainError("L must be positive");
    int M = fit.config.size();
    std::vector<double> xi;
    if (fit.k == 1) return xi_refined_k1(fit, L);
    for (int j = 0; j + 1 < M; ++j) xi.push_back(fit.config.lambda[j]);
    if (fit.k >= 3) return xi;
    double nrm = norm_lam_q_sq(fit.k);
    for (int j = 0; j + 1 < M; ++j) {
        double lam = fit.config.lambda[j];
        auto w = fit.grid->sample([&](double r) { return chi(r / (L * lam)) * lam_q(fit.k, lam, r) / lam; });
        xi[j] -= fit.config.iota[j] / nrm * pairing(*fit.grid, w, fit.g);
    }
    return xi;
}

std::vector<double> xi_refined_k1(const ModulationFit& fit, double L) {
    if (fit.k != 1) throw DomainError("k = 1 variant");
    if (!(L > 0.0)) throw DomainError("L must be positive");
    const auto& c = fit.config;
    int M = c.size();
    std::vector<double> xi;
    for (int j = 0; j + 1 < M; ++j) {
        double lam = c.lambda[j], next = c.lambda[j + 1];
        double cut = L * std::sqrt(lam * next);
        auto w = fit.grid->sample([&](double r) { return chi(r / cut) * lam_q(1, lam, r) / lam; });
        auto h = fit.g;
        for (int i = 0; i < j; ++i) {
            auto q = fit.grid->sample([&](double r) { return c.iota[i] * (q_profile(1, c.lambda[i], r) - kPi); });
            for (std::size_t p = 0; p < h.size(); ++p) h[p] += q[p];
        }
        xi.push_back(lam - c.iota[j] / (2.0 * std::log(next / lam)) * pairing(*fit.grid, w, h));
    }
    return xi;
}

std::vector<double> beta(const ModulationFit& fit, const CutoffProfile& cutoff) {
    if (fit.k == 1) throw DomainError("use beta_k1 for k = 1");
    double nrm = norm_lam_q_sq(fit.k);
    std::vector<double> out;
    for (int j = 0; j < fit.config.size(); ++j) {
        double lam = fit.config.lambda[j];
        auto w = fit.grid->sample([&](double r) { return lam_q(fit.k, lam, r) / lam; });
        auto a = apply_a_underline(cutoff, lam, fit.k, *fit.grid, fit.g);
        out.push_back(-fit.config.iota[j] / nrm * pairing(*fit.grid, w, fit.g_dot) -
                      pairing(*fit.grid, a, fit.g_dot) / nrm);
    }
    return out;
}

std::vector<double> beta_k1(const ModulationFit& fit, const CutoffProfile& cutoff, double L) {
    auto xi = xi_refined_k1(fit, L);
    std::vector<double> out;
    for (int j = 0; j + 1 < fit.config.size(); ++j) {
        double lam = fit.config.lambda[j];
        double cut = L * std::sqrt(xi[j] * fit.config.lambda[j + 1]);
        if (!(cut > 0.0)) throw DomainError("refined scale is not positive");
        auto w = fit.grid->sample([&](double r) { return chi(r / cut) * lam_q(1, lam, r) / lam; });
        auto a = apply_a_underline(cutoff, lam, 1, *fit.grid, fit.g);
        out.push_back(-fit.config.iota[j] * pairing(*fit.grid, w, fit.g_dot) - pairing(*fit.grid, a, fit.g_dot));
    }
    return out;
}

WeightedU weighted_u(const BubbleConfig& config, const std::vector<double>& xi, int k, double d, double eta0) {
    WeightedU u;
    int M = config.size();
    for (int i = 0; i + 1 < M; ++i)
        if (config.iota[i] != config.iota[i + 1]) u.alternating.push_back(i + 1);
    if (d >= eta0) {
        u.infinite = true;
        u.value = kInf;
        return u;
    }
    if (static_cast<int>(xi.size()) < M - 1) throw DomainError("need xi_1..xi_{M-1}");
    u.empty_alternating = u.alternating.empty();
    for (int i : u.alternating)
        u.value = std::max(u.value, std::pow(std::ldexp(xi[i - 1], -i) / config.lambda[i], k));
    return u;
}

// ---- tracking --------------------------------------------------------------------

std::vector<double> TrackedSeries::lambda(int j) const {
    std::vector<double> out;
    for (const auto& f : fits) out.push_back(f.config.lambda.at(j));
    return out;
}

TrackedSeries track(const Trajectory& traj, const BubbleConfig& guess, const TrackOptions& opts) {
    if (traj.snapshots.empty()) throw DomainError("empty trajectory");
    TrackedSeries series;
    CutoffProfile cutoff = build_cutoff(opts.cutoff_c, opts.cutoff_R);
    int M = guess.size();
    BubbleConfig warm = guess;
    ProximityOptions popt;
    for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
        const auto& snap = traj.snapshots[n];
        ModulationFit fit;
        try {
            fit = fit_static(snap.state, warm, opts.fit);
        } catch (const FitError& e) {
            if (n == 0) throw DomainError(std::string("initial fit failed: ") + e.what());
            series.terminated = true;
            series.termination_reason = e.what();
            break;
        }
        if (n > 0) {
            double jump = 1.0;
            for (int j = 0; j < M; ++j) {
                double q = fit.config.lambda[j] / warm.lambda[j];
                jump = std::max(jump, std::max(q, 1.0 / q));
            }
            if (jump > opts.max_jump) {
                series.terminated = true;
                series.termination_reason = "scale jump above the allowed factor";
                break;
            }
        }
        double d = std::sqrt(fit.sandwich);
        if (opts.with_distance) {
            popt.seeds = {fit.config.lambda};
            auto rep = proximity_d(snap.state, nullptr, guess.m, M, opts.outer_scale, popt);
            d = std::min(rep.value, d);
        }
        if (n == 0 && d >= opts.eta0) throw DomainError("initial snapshot is not close to a multi-bubble");
        auto xi = xi_refined(fit, opts.L);
        std::vector<double> b;
        if (fit.k == 1)
            b = beta_k1(fit, cutoff, opts.L);
        else
            b = beta(fit, cutoff);
        double mu = std::nan("");
        if (opts.mu_K >= 1 && opts.mu_K <= M) {
            try {
                mu = mu_scale(snap.state, M, opts.mu_K);
            } catch (const DomainError&) {
            }
        }
        auto U = weighted_u(fit.config, xi, fit.k, d, opts.eta0);
        series.times.push_back(snap.t);
        series.d.push_back(d);
        series.mu.push_back(mu);
        series.U.push_back(U.value);
        series.xi.push_back(xi);
        series.beta.push_back(b);
        warm = fit.config;
        series.fits.push_back(std::move(fit));
    }
    series.manifest = {{"format", "wm-tracked-series"},
                       {"version", 1},
                       {"fit_tol", opts.fit.tol},
                       {"fit_step_tol", opts.fit.step_tol},
                       {"fit_max_iter", opts.fit.max_iter},
                       {"eta0", opts.eta0},
                       {"max_jump", opts.max_jump},
                       {"L", opts.L},
                       {"cutoff", {{"c", opts.cutoff_c}, {"R", opts.cutoff_R}}},
                       {"trajectory_hash", traj.manifest.value("config_hash", "")},
                       {"terminated", series.terminated},
                       {"termination_reason", series.termination_reason}};
    return series;
}

Table series_table(const TrackedSeries& s) {
    Table t;
    int K = s.fits.empty() ? 0 : s.fits.front().config.size();
    t.columns.push_back("t");
    for (int j = 1; j <= K; ++j) t.columns.push_back("lambda_" + std::to_string(j));
    for (int j = 1; j < K; ++j) t.columns.push_back("xi_" + std::to_string(j));
    int nb = s.beta.empty() ? 0 : static_cast<int>(s.beta.front().size());
    for (int j = 1; j <= nb; ++j) t.columns.push_back("beta_" + std::to_string(j));
    for (const char* c : {"d", "mu", "U"}) t.columns.push_back(c);
    for (int n = 0; n < s.size(); ++n) {
        std::vector<double> row{s.times[n]};
        const auto& l = s.fits[n].config.lambda;
        row.insert(row.end(), l.begin(), l.end());
        for (int j = 0; j + 1 < K; ++j) row.push_back(j < static_cast<int>(s.xi[n].size()) ? s.xi[n][j] : std::nan(""));
        row.insert(row.end(), s.beta[n].begin(), s.beta[n].end());
        row.push_back(s.d[n]);
        row.push_back(s.mu[n]);
        row.push_back(s.U[n]);
        t.rows.push_back(row);
    }
    return t;
}

// ---- time-series utilities ------------------------------------------------------------

std::vector<TimeInterval> detect_collision_intervals(const std::vector<double>& times, const std::vector<double>& d,
                                                     double epsilon, double eta) {
    if (times.size() != d.size()) throw DomainError("times and d differ in length");
    if (!(0.0 < epsilon && epsilon < eta)) throw DomainError("need 0 < epsilon < eta");
    std::vector<TimeInterval> out;
    std::size_t n = d.size();
    auto cross = [&](std::size_t i) {  // d crosses epsilon between samples i and i+1
        return times[i] + (epsilon - d[i]) / (d[i + 1] - d[i]) * (times[i + 1] - times[i]);
    };
    std::size_t i = 0;
    while (i < n) {
        if (d[i] <= epsilon) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < n && d[i] > epsilon) ++i;
        if (start == 0 || i == n) continue;  // open excursion
        std::size_t end = i - 1;
        TimeInterval iv;
        for (std::size_t p = start; p <= end; ++p)
            if (d[p] > iv.peak) iv.peak = d[p], iv.peak_time = times[p];
        if (iv.peak < eta) continue;
        iv.a = cross(start - 1);
        iv.b = cross(end);
        out.push_back(iv);
    }
    return out;
}

std::vector<double> partition_lipschitz(const std::function<double(double)>& mu, double a, double b) {
    double m0 = mu(a);
    if (!(m0 > 0.0)) throw DomainError("mu must be positive");
    if (!(b - a >= m0 / 4.0 * (1 - 1e-12))) throw DomainError("need b - a >= mu(a)/4");
    std::vector<double> nodes{a};
    double x = a, mx = m0;
    while (b - x > 0.75 * mx) {
        double next = x + mx / 4.0;
        double mn = mu(next);
        if (!(mn > 0.0)) throw DomainError("mu must be positive");
        if (std::abs(mn - mx) > (next - x) * (1 + 1e-12)) throw DomainError("mu is not 1-Lipschitz on the samples");
        nodes.push_back(next);
        x = next;
        mx = mn;
    }
    nodes.push_back(b);
    return nodes;
}

std::vector<ModulationResidual> modulation_equation_residual(const Trajectory& traj, const TrackedSeries& series,
                                                             double cutoff_radius) {
    int n = series.size();
    if (n < 3) throw DomainError("need at least three tracked snapshots");
    if (static_cast<int>(traj.snapshots.size()) < n) throw DomainError("series is longer than the trajectory");
    for (int p = 0; p < n; ++p)
        if (traj.snapshots[p].t != series.times[p]) throw DomainError("series was not tracked on this trajectory");
    for (const auto& f : series.fits)
        for (double l : f.config.lambda)
            if (!(cutoff_radius > l)) throw DomainError("cutoff radius must exceed all fitted scales");
    const RadialGrid& grid = *series.fits.front().grid;
    int k = series.fits.front().k;
    auto w = range_weights(grid, 0.0, cutoff_radius);
    const auto& r = grid.r();
    std::vector<ModulationResidual> out;
    for (int p = 1; p + 1 < n; ++p) {
        double dt = series.times[p + 1] - series.times[p - 1];
        if (std::abs(series.times[p + 1] - series.times[p] - (series.times[p] - series.times[p - 1])) > 1e-9 * dt)
            throw DomainError("tracked times must be uniform");
        const auto& fm = series.fits[p - 1];
        const auto& f0 = series.fits[p];
        const auto& fp = series.fits[p + 1];
        const auto& cfg = f0.config;
        int M = cfg.size();
        std::vector<double> res(grid.size()), resd(grid.size()), gtt(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            res[i] = (fp.g[i] - fm.g[i]) / dt - f0.g_dot[i];
            gtt[i] = (fp.g_dot[i] - fm.g_dot[i]) / dt;
        }
        for (int j = 0; j < M; ++j) {
            double lp = (fp.config.lambda[j] - fm.config.lambda[j]) / dt;
            double lam = cfg.lambda[j];
            for (int i = 0; i < grid.size(); ++i) res[i] -= cfg.iota[j] * lp * lam_q(k, lam, r[i]) / lam;
        }
        // -L_Q g + f_i + f_q = Laplacian g - k^2/r^2 (f(Q + g) - sum iota_j f(Q_j))
        auto lap = grid.laplacian(f0.g, parity_of(k), 0.0);
        double k2 = double(k) * k;
        ModulationResidual mr;
        mr.t = series.times[p];
        double fq = 0.0, fi = 0.0, rd = 0.0, sc = 0.0;
        for (int i = 0; i < grid.size(); ++i) {
            if (r[i] == 0.0 || w[i] == 0.0) continue;
            double qv = multi_bubble(k, cfg, r[i]);
            double single = 0.0;
            for (int j = 0; j < M; ++j) single += cfg.iota[j] * nonlinearity_f(q_profile(k, cfg.lambda[j], r[i]));
            double inv = k2 / (r[i] * r[i]);
            double g = f0.g[i];
            double f_i = -inv * (nonlinearity_f(qv) - single);
            double f_q = -inv * (nonlinearity_f(qv + g) - nonlinearity_f(qv) - nonlinearity_fprime(qv) * g);
            double rhs = lap[i] - inv * (nonlinearity_f(qv + g) - single);
            resd[i] = gtt[i] - rhs;
            fi += w[i] * f_i * f_i;
            fq += w[i] * std::abs(f_q);
            rd += w[i] * resd[i] * resd[i];
            sc += w[i] * gtt[i] * gtt[i];
        }
        mr.g_residual = std::sqrt(norm_e_sq(k, grid, res, {}, 0.0, cutoff_radius));
        mr.g_dot_residual = std::sqrt(rd);
        mr.g_dot_scale = std::sqrt(sc);
        mr.f_i_norm = std::sqrt(fi);
        mr.fq_l1 = fq;
        mr.fq_ratio = f0.g_h_sq > 0.0 ? fq / f0.g_h_sq : 0.0;
        out.push_back(mr);
    }
    return out;
}

}  // namespace wm
