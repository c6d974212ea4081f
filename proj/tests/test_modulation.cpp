#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "wm/errors.hpp"
#include "wm/modulation.hpp"
#include "wm/solver.hpp"

using namespace wm;
using std::numbers::pi;

namespace {

GridPtr wide_grid() { return make_grid(RadialGrid::geometric(1e-4, 1e4, 0.02)); }

// Smooth bump with the Z-components removed in the grid pairing.
std::vector<double> orthogonal_bump(int k, const BubbleConfig& cfg, const RadialGrid& grid, double center) {
    auto b = grid.sample([&](double r) {
        double s = std::log(r / center);
        return std::exp(-s * s);
    });
    int M = cfg.size();
    std::vector<std::vector<double>> z;
    for (int j = 0; j < M; ++j)
        z.push_back(grid.sample([&](double r) { return z_profile(k, r / cfg.lambda[j]); }));
    Eigen::MatrixXd gram(M, M);
    Eigen::VectorXd rhs(M);
    for (int i = 0; i < M; ++i) {
        rhs[i] = pairing(grid, z[i], b);
        for (int j = 0; j < M; ++j) gram(i, j) = pairing(grid, z[i], z[j]);
    }
    Eigen::VectorXd c = gram.fullPivLu().solve(rhs);
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < grid.size(); ++i) b[i] -= c[j] * z[j][i];
    return b;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] / b[i] - 1));
    return m;
}

}  // namespace

TEST_CASE("static fit") {
    auto grid = wide_grid();
    for (int k : {1, 2, 3}) {
        BubbleConfig cfg{0, {1, -1}, {0.01, 1.0}};
        auto f = field_from_config(k, cfg, grid);
        // exact data is a fixed point
        auto fit = fit_static(f, cfg);
        CHECK(max_rel(fit.config.lambda, cfg.lambda) < 1e-12);
        for (double v : fit.g) CHECK(std::abs(v) < 1e-13);
        CHECK(fit.sandwich == doctest::Approx(std::pow(0.01, k)).epsilon(1e-12));
        // 10% off per scale
        BubbleConfig guess = cfg;
        guess.lambda = {0.011, 0.9};
        auto back = fit_static(f, guess);
        CHECK(max_rel(back.config.lambda, cfg.lambda) < 1e-8);
        // refitting reproduces the fit
        auto again = fit_static(f, back.config);
        CHECK(max_rel(again.config.lambda, back.config.lambda) < 1e-12);
        // orthogonal perturbation
        auto b = orthogonal_bump(k, cfg, *grid, 0.1);
        FieldState p = f;
        p.background.reset();
        for (int i = 0; i < p.size(); ++i) p.u[i] += 1e-3 * b[i];
        auto pf = fit_static(p, guess);
        CHECK(max_rel(pf.config.lambda, cfg.lambda) < 1e-6);
        double bn = std::sqrt(norm_e_sq(k, *grid, b));
        CHECK(std::sqrt(pf.g_energy_sq) == doctest::Approx(1e-3 * bn).epsilon(1e-4));
        for (double G : pf.ortho_residuals) CHECK(std::abs(G) <= 1e-8 * (1 + std::sqrt(pf.g_h_sq)));
    }
    auto f = field_from_config(2, {1, {1}, {1.0}}, grid);
    CHECK_THROWS_AS(fit_static(f, {1, {-1}, {1.0}}), DomainError);
    CHECK_THROWS_AS(fit_static(f, {0, {1}, {1.0}}), DomainError);
    // far from any bubble of that scale: Newton cannot settle
    FitOptions strict;
    strict.max_iter = 2;
    CHECK_THROWS_AS(fit_static(f, {1, {1}, {1e-3}}, strict), FitError);
    CHECK(sector_of_config({0, {1}, {1.0}}) == -1);
    CHECK(sector_of_config({1, {1}, {1.0}}) == 0);
    CHECK(sector_of_config({0, {1, -1}, {1.0, 2.0}}) == 0);
}

TEST_CASE("proximity functions") {
    auto grid = wide_grid();
    for (int k : {2, 3}) {
        BubbleConfig cfg{0, {1, -1}, {0.01, 1.0}};
        auto f = field_from_config(k, cfg, grid);
        // at the true parameters the value is the ratio sum, outer term included
        double outer = 100.0;
        double expect = std::pow(0.01, k) + std::pow(1.0 / outer, k);
        auto d = proximity_d(f, nullptr, 0, 2, outer);
        CHECK(d.certified);
        CHECK(d.value_sq <= expect * (1 + 1e-9));
        CHECK(d.value_sq >= 0.99 * expect);
        CHECK(d.value_sq >= d.ratio_sum);
        // restricted to (rho, inf) with rho below all scales: same minimizer
        auto loc = proximity_local(f, nullptr, 1e-6, 0, 2, outer);
        CHECK(loc.value_sq == doctest::Approx(d.value_sq).epsilon(1e-3));
        CHECK(loc.minimizer.iota == d.minimizer.iota);
    }
    auto vac = field_from_config(2, {1, {}, {}}, grid);
    CHECK(proximity_d(vac, nullptr, 1, 0).value == 0.0);
    auto dr = delta_r(vac, 10.0);
    CHECK(dr.value == 0.0);
    CHECK(dr.minimizer.size() == 0);

    // delta_R of Q_1 with R = 100
    auto q = field_from_config(2, {1, {1}, {1.0}}, grid);
    auto dq = delta_r(q, 100.0);
    CHECK(dq.minimizer.size() == 1);
    CHECK(dq.value_sq <= 1e-4 * (1 + 1e-9));
    CHECK(dq.value_sq >= 0.99e-4);

    // perturbed bubble
    FieldState p = q;
    p.background.reset();
    auto b = grid->sample([](double r) { return r * r * std::exp(-r); });
    double bn = std::sqrt(norm_e_sq(2, *grid, b));
    for (int i = 0; i < p.size(); ++i) p.u[i] += 1e-2 / bn * b[i];
    auto dp = proximity_d(p, nullptr, 1, 1);
    CHECK(dp.value >= 1e-3);
    CHECK(dp.value <= 1e-1);
    // radiation equal to the perturbation is removed exactly
    auto rad = make_pair_state(2, grid, [&] {
        std::vector<double> v(b);
        for (double& x : v) x *= 1e-2 / bn;
        return v;
    }());
    CHECK(proximity_d(p, &rad, 1, 1).value < 1e-10);
    CHECK_THROWS_AS(proximity_d(q, nullptr, 1, 2), DomainError);
}

TEST_CASE("mu scale") {
    auto grid = wide_grid();
    for (int k : {1, 2, 3})
        for (double lam : {0.1, 1.0, 10.0}) {
            auto f = field_from_config(k, {1, {1}, {lam}}, grid);
            CHECK(mu_scale(f, 1, 1) == doctest::Approx(lam).epsilon(1e-6));
        }
    auto f = field_from_config(2, {1, {1}, {1.0}}, grid);
    double r = energy_level_radius(f, 8 * pi * (1 - 1e-9));
    CHECK(r < 1e-2);
    auto two = field_from_config(2, {0, {1, -1}, {0.01, 1.0}}, grid);
    CHECK(mu_scale(two, 2, 1) == doctest::Approx(0.01).epsilon(0.1));
    CHECK_THROWS_AS(mu_scale(f, 2, 0), DomainError);
}

TEST_CASE("refined parameters") {
    auto grid = wide_grid();
    auto cutoff = build_cutoff(0.05, 10.0);
    for (int k : {1, 2, 3}) {
        BubbleConfig cfg{0, {1, -1}, {0.01, 1.0}};
        auto fit = fit_static(field_from_config(k, cfg, grid), cfg);
        auto xi = xi_refined(fit);
        REQUIRE(xi.size() == 1);
        CHECK(xi[0] == doctest::Approx(cfg.lambda[0]).epsilon(1e-12));
        if (k >= 2)
            for (double b : beta(fit, cutoff)) CHECK(b == 0.0);
        else
            for (double b : beta_k1(fit, cutoff)) CHECK(b == 0.0);
        CHECK_THROWS_AS(fit_static(field_from_config(k, cfg, grid), {0, {1, -1}, {1e-6, 1.0}}), DomainError);
    }
    // k = 3: identity whatever g is
    BubbleConfig one{1, {1}, {1.0}};
    BubbleConfig two{0, {1, -1}, {0.01, 1.0}};
    {
        auto f = field_from_config(3, two, grid, false);
        for (int i = 0; i < f.size(); ++i) f.u[i] += 1e-3 * std::exp(-std::pow(std::log(grid->r()[i] / 0.1), 2));
        auto fit = fit_static(f, two);
        CHECK(xi_refined(fit)[0] == fit.config.lambda[0]);
    }
    // k = 2 against a direct pairing
    {
        auto f = field_from_config(2, two, grid, false);
        auto bump = grid->sample([](double r) { return 1e-3 * std::exp(-std::pow(std::log(r / 0.05), 2)); });
        for (int i = 0; i < f.size(); ++i) f.u[i] += bump[i];
        auto fit = fit_static(f, two);
        double lam = fit.config.lambda[0], L = 10.0;
        auto w = grid->sample([&](double r) { return chi(r / (L * lam)) * lam_q(2, lam, r) / lam; });
        double expect = lam - pairing(*grid, w, fit.g) / (2 * pi);
        CHECK(xi_refined(fit, L)[0] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(xi_refined(fit, L)[0] != lam);
    }
    // beta: g = 0, g_dot = LamQ_lambda_j gives -iota_j up to cross pairings
    for (int k : {2, 3}) {
        auto f = field_from_config(k, two, grid);
        auto fit = fit_static(f, two);
        for (int j = 0; j < 2; ++j) {
            ModulationFit v = fit;
            double lam = v.config.lambda[j];
            v.g_dot = grid->sample([&](double r) { return lam_q(k, lam, r) / lam; });
            auto b = beta(v, cutoff);
            CHECK(b[j] == doctest::Approx(-v.config.iota[j]).epsilon(1e-3));
        }
        // linear in g_dot with g fixed
        ModulationFit v = fit;
        v.g = grid->sample([](double r) { return 1e-2 * r * r * std::exp(-r); });
        v.g_dot = grid->sample([](double r) { return std::sin(r) * std::exp(-r); });
        auto b1 = beta(v, cutoff);
        for (double& x : v.g_dot) x *= 2;
        auto b2 = beta(v, cutoff);
        for (int j = 0; j < 2; ++j) CHECK(b2[j] == doctest::Approx(2 * b1[j]).epsilon(1e-12));
    }
    (void)one;
}

TEST_CASE("weighted interaction energy") {
    BubbleConfig cfg{0, {1, -1}, {0.1, 1.0}};
    auto u = weighted_u(cfg, {0.1}, 2, 0.01, 0.3);
    CHECK(u.value == doctest::Approx(0.0025).epsilon(1e-14));
    CHECK(u.alternating == std::vector<int>{1});
    CHECK_FALSE(u.empty_alternating);
    auto same = weighted_u({0, {1, 1}, {0.1, 1.0}}, {0.1}, 2, 0.01, 0.3);
    CHECK(same.value == 0.0);
    CHECK(same.empty_alternating);
    auto far = weighted_u(cfg, {0.1}, 2, 0.3, 0.3);
    CHECK(far.infinite);
    CHECK(std::isinf(far.value));
}

TEST_CASE("collision intervals") {
    double eps = 0.01, eta = 0.1;
    std::vector<double> t, flat, pulse, twin;
    // piecewise linear with kinks on sample points
    auto tri = [&](double s, double c) { return eps / 2 + (2 * eta - eps / 2) * std::max(0.0, 1 - std::abs(s - c)); };
    for (int i = 0; i <= 100; ++i) {
        double s = i * 0.1;
        t.push_back(s);
        flat.push_back(eps / 2);
        pulse.push_back(tri(s, 5.0));
        twin.push_back(std::max(tri(s, 3.0), tri(s, 7.0)));
    }
    CHECK(detect_collision_intervals(t, flat, eps, eta).empty());
    auto one = detect_collision_intervals(t, pulse, eps, eta);
    REQUIRE(one.size() == 1);
    double half = 1 - (eps / 2) / (2 * eta - eps / 2);
    CHECK(one[0].a == doctest::Approx(5.0 - half));
    CHECK(one[0].b == doctest::Approx(5.0 + half));
    CHECK(one[0].peak == doctest::Approx(2 * eta));
    auto two = detect_collision_intervals(t, twin, eps, eta);
    REQUIRE(two.size() == 2);
    CHECK(two[0].b < two[1].a);
    // refinement and reapplication leave the endpoints alone
    std::vector<double> tf, pf;
    for (int i = 0; i <= 1000; ++i) {
        tf.push_back(i * 0.01);
        pf.push_back(tri(i * 0.01, 5.0));
    }
    auto fine = detect_collision_intervals(tf, pf, eps, eta);
    REQUIRE(fine.size() == 1);
    CHECK(fine[0].a == doctest::Approx(one[0].a).epsilon(1e-12));
    CHECK(fine[0].b == doctest::Approx(one[0].b).epsilon(1e-12));
    // pulse too low
    for (double& v : pulse) v = std::min(v, 0.05);
    CHECK(detect_collision_intervals(t, pulse, eps, eta).empty());
    CHECK_THROWS_AS(detect_collision_intervals(t, flat, eta, eps), DomainError);
}

TEST_CASE("Lipschitz partition") {
    auto nodes = partition_lipschitz([](double) { return 4.0; }, 0.0, 10.0);
    CHECK(nodes == std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 10});
    CHECK(partition_lipschitz([](double) { return 4.0; }, 0.0, 1.0) == std::vector<double>{0, 1});
    auto mu = [](double t) { return 1 + t / 2; };
    auto p = partition_lipschitz(mu, 0.0, 4.0);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double gap = p[i + 1] - p[i];
        CHECK(gap >= mu(p[i]) / 4 - 1e-12);
        CHECK(gap <= 0.75 * mu(p[i]) + 1e-12);
    }
    CHECK_THROWS_AS(partition_lipschitz([](double) { return 4.0; }, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(partition_lipschitz([](double t) { return 1 + 5 * t; }, 0.0, 10.0), DomainError);
}

TEST_CASE("tracking and modulation equations") {
    // the continuum bubble is static only up to the O(h^2) stencil error
    auto grid = make_grid(RadialGrid::sinh(0.05, 20.0, 0.005));
    BubbleConfig q{1, {1}, {1.0}};
    SolverConfig cfg;
    cfg.T = 0.5;
    cfg.cadence = 0.05;
    auto tr = evolve(field_from_config(2, q, grid), cfg);
    auto s = track(tr, q);
    CHECK_FALSE(s.terminated);
    REQUIRE(s.size() == 11);
    for (double l : s.lambda(0)) CHECK(std::abs(l - 1.0) < 1e-6);
    for (double m : s.mu) CHECK(m == doctest::Approx(1.0).epsilon(1e-3));
    auto res = modulation_equation_residual(tr, s, 10.0);
    for (const auto& r : res) {
        CHECK(r.g_residual < 1e-5);
        CHECK(r.g_dot_residual < 1e-3);
    }
    CHECK_THROWS_AS(modulation_equation_residual(tr, s, 0.5), DomainError);
    CHECK_THROWS_AS(track(tr, {1, {-1}, {1.0}}), DomainError);
    TrackOptions tight;
    tight.fit.max_iter = 1;
    CHECK_THROWS_AS(track(tr, {1, {1}, {0.3}}, tight), DomainError);
}
