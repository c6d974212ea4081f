#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wm/errors.hpp"
#include "wm/solver.hpp"

using namespace wm;
using std::numbers::pi;

namespace {

GridPtr ref_grid() { return make_grid(RadialGrid::sinh(0.05, 20.0, 0.02)); }

FieldState bumped_q(GridPtr grid, double amp) {
    auto f = field_from_config(2, {1, {1}, {1.0}}, grid, false);
    for (int i = 0; i < f.size(); ++i) {
        double r = grid->r()[i];
        f.u[i] += amp * r * r * std::exp(-2.0 * (r - 2.0) * (r - 2.0));
    }
    return f;
}

FieldState linear_bump(GridPtr grid, double amp) {
    std::vector<double> g = grid->sample([&](double r) { return amp * r * r * std::exp(-4.0 * (r - 3.0) * (r - 3.0)); });
    return make_pair_state(2, grid, g);
}

}  // namespace

TEST_CASE("right-hand side") {
    auto grid = ref_grid();
    for (int m : {0, 1, -2}) {
        auto vac = field_from_config(2, {m, {}, {}}, grid);
        for (double a : rhs_nonlinear(vac)) CHECK(a == 0.0);
    }
    // Q is static up to the O(h^2) stencil residual.
    double prev = 0.0;
    for (double ds : {0.04, 0.02}) {
        auto g = make_grid(RadialGrid::sinh(0.05, 20.0, ds));
        auto q = field_from_config(2, {1, {1}, {1.0}}, g);
        auto a = rhs_nonlinear(q);
        double worst = 0.0;
        for (double v : a) worst = std::max(worst, std::abs(v));
        if (prev > 0.0) CHECK(prev / worst > 3.0);
        prev = worst;
    }
    // Two bubbles of opposite sign pull on each other: near lambda_1 the
    // acceleration is the interaction term f_i.
    BubbleConfig two{0, {1, -1}, {0.1, 1.0}};
    auto g = make_grid(RadialGrid::sinh(0.005, 20.0, 0.01));
    auto st = field_from_config(2, two, g);
    auto a = rhs_nonlinear(st);
    int agree = 0, total = 0;
    for (int i = 0; i < g->size(); ++i) {
        double r = g->r()[i];
        if (r < 0.05 || r > 0.2) continue;
        double expect = f_interaction(2, two, r);
        ++total;
        if (std::signbit(a[i]) == std::signbit(expect)) ++agree;
        CHECK(a[i] == doctest::Approx(expect).epsilon(0.05));
    }
    CHECK(agree == total);
}

TEST_CASE("static bubble on the reference grid") {
    auto grid = ref_grid();
    auto q = field_from_config(2, {1, {1}, {1.0}}, grid);
    SolverConfig cfg;
    cfg.T = 1.0;
    cfg.cadence = 0.05;
    auto tr = evolve(q, cfg);
    CHECK(tr.snapshots.size() == 21);
    double e0 = energy(tr.snapshots.front().state);
    CHECK(e0 == doctest::Approx(8 * pi).epsilon(1e-8));
    for (const auto& s : tr.snapshots) {
        CHECK(std::abs(energy(s.state) - e0) / e0 < 1e-6);
        std::vector<double> g(q.u.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = s.state.u[i] - q.u[i];
        CHECK(std::sqrt(norm_e_sq(2, *grid, g, s.state.u_dot)) < 1e-3);
        CHECK(s.state.sector == q.sector);
    }
    auto fs = check_finite_speed(tr, 10.0);
    CHECK(fs.min_margin > -1e-6);
}

TEST_CASE("vacuum and determinism") {
    auto grid = ref_grid();
    auto vac = field_from_config(2, {1, {}, {}}, grid);
    SolverConfig cfg;
    cfg.T = 0.5;
    auto tr = evolve(vac, cfg);
    for (const auto& s : tr.snapshots) CHECK(s.state.u == vac.u);
    auto f = bumped_q(grid, 0.2);
    auto a = evolve(f, cfg), b = evolve(f, cfg);
    CHECK(a.snapshots.back().state.u == b.snapshots.back().state.u);
    CHECK(a.manifest["config_hash"] == b.manifest["config_hash"]);
    cfg.c_cfl = 0.25;
    CHECK(evolve(f, cfg).manifest["config_hash"] != a.manifest["config_hash"]);
}

TEST_CASE("energy conservation and finite speed") {
    auto grid = ref_grid();
    auto f = bumped_q(grid, 0.2);
    SolverConfig cfg;
    cfg.T = 1.0;
    auto tr = evolve(f, cfg);
    double e0 = tr.snapshots.front().discrete_energy;
    for (const auto& s : tr.snapshots) CHECK(std::abs(s.discrete_energy - e0) / e0 < 1e-6);
    auto fs = check_finite_speed(tr, 8.0);
    // Energy can only leak out of the shrinking ball, up to discretization.
    CHECK(fs.measured_c < 10.0);
    CHECK_THROWS_AS(check_finite_speed(tr, 0.5), DomainError);
}

TEST_CASE("linear flow") {
    auto grid = ref_grid();
    auto zero = make_pair_state(2, grid, std::vector<double>(grid->size(), 0.0));
    SolverConfig cfg;
    cfg.T = 1.0;
    for (const auto& s : evolve_linear(zero, cfg).snapshots)
        for (double v : s.state.u) CHECK(v == 0.0);
    auto bump = linear_bump(grid, 1.0);
    auto tr = evolve_linear(bump, cfg);
    // The scheme conserves its own discrete norm; the high-order norm moves at O(h^2).
    double d0 = discrete_energy(bump, true), n0 = norm_e_sq(bump);
    for (const auto& s : tr.snapshots) {
        CHECK(std::abs(discrete_energy(s.state, true) - d0) / d0 < 1e-6);
        CHECK(std::abs(norm_e_sq(s.state) - n0) / n0 < 1e-2);
    }
    // outgoing energy on [0, R - t] does not increase
    auto fs = check_finite_speed(tr, 6.0);
    CHECK(fs.min_margin > -1e-6 * n0);

    // small amplitude: nonlinear flow agrees with the linear one to O(amp^2)
    double prev = 0.0;
    for (double amp : {1e-2, 5e-3}) {
        auto p = linear_bump(grid, amp);
        auto lin = evolve_linear(p, cfg).snapshots.back().state;
        auto non = evolve(p, cfg).snapshots.back().state;
        double diff = 0.0;
        for (int i = 0; i < grid->size(); ++i) diff = std::max(diff, std::abs(lin.u[i] - non.u[i]));
        if (prev > 0.0) CHECK(prev / diff == doctest::Approx(8.0).epsilon(0.1));  // cubic term
        prev = diff;
    }
    CHECK_THROWS_AS(evolve_linear(field_from_config(2, {1, {1}, {1.0}}, grid), cfg), DomainError);
}

TEST_CASE("temporal convergence") {
    auto grid = make_grid(RadialGrid::sinh(0.2, 20.0, 0.05));
    auto f = bumped_q(grid, 0.3);
    SolverConfig cfg;
    cfg.T = 0.5;
    cfg.c_cfl = 0.5;
    auto lf = temporal_convergence(f, cfg, 3);
    for (double r : lf.ratios) {
        CHECK(r > 3.5);
        CHECK(r < 4.5);
    }
    cfg.scheme = Scheme::rk4;
    auto rk = temporal_convergence(f, cfg, 3);
    for (double r : rk.ratios) CHECK(r > 12.0);
}

TEST_CASE("config validation and instability") {
    auto grid = ref_grid();
    auto f = bumped_q(grid, 0.2);
    SolverConfig cfg;
    cfg.dt = 1.0;
    CHECK_THROWS_AS(evolve(f, cfg), DomainError);
    cfg.dt = 0.0;
    cfg.T = 0.33;
    CHECK_THROWS_AS(evolve(f, cfg), DomainError);
    cfg.T = 1.0;
    cfg.c_cfl = 1.5;
    CHECK_THROWS_AS(evolve(f, cfg), DomainError);
    CHECK(scheme_from_name("rk4") == Scheme::rk4);
    CHECK_THROWS_AS(scheme_from_name("euler"), DomainError);
    SolverConfig back = SolverConfig::from_json(SolverConfig{}.to_json());
    CHECK(back.to_json() == SolverConfig{}.to_json());
    // k = 1 at c_cfl = 1 exceeds the leapfrog limit near the origin; the detector aborts.
    auto g = make_grid(RadialGrid::sinh(0.2, 20.0, 0.05));
    auto h = field_from_config(1, {1, {1}, {1.0}}, g, false);
    for (int i = 0; i < h.size(); ++i) h.u[i] += 0.1 * g->r()[i] * std::exp(-g->r()[i] * g->r()[i]);
    SolverConfig bad;
    bad.T = 5.0;
    bad.c_cfl = 1.0;
    CHECK_THROWS_AS(evolve(h, bad), NumericalError);
    bad.c_cfl = 0.5;
    CHECK_NOTHROW(evolve(h, bad));
}
