#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "wm/errors.hpp"
#include "wm/fields.hpp"

using namespace wm;
using std::numbers::pi;

namespace {

GridPtr geo(double lo = 1e-6, double hi = 1e6, double ds = 0.02) { return make_grid(RadialGrid::geometric(lo, hi, ds)); }

}  // namespace

TEST_CASE("grid construction and quadrature") {
    RadialGrid g = RadialGrid::geometric(1e-3, 1e3, 0.05);
    CHECK(g.r_first() == doctest::Approx(1e-3));
    CHECK(g.r_last() == doctest::Approx(1e3));
    for (int i = 1; i < g.size(); ++i) CHECK(g.r()[i] > g.r()[i - 1]);
    for (double w : g.weights()) CHECK(w > 0.0);
    // Trapezoid in s reproduces int r dr for the constant 1 to O(ds^2).
    std::vector<double> one(g.size(), 1.0);
    CHECK(g.integrate(one) == doctest::Approx(0.5 * (1e6 - 1e-6)).epsilon(1e-3));
    RadialGrid s = RadialGrid::sinh(0.1, 100.0, 0.02);
    CHECK(s.r()[0] == 0.0);
    CHECK(s.origin_closed());
    CHECK(s.r_last() == doctest::Approx(100.0));
    CHECK_THROWS_AS(RadialGrid::geometric(0.0, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(RadialGrid::geometric(1.0, 1.1, 0.5), DomainError);
}

TEST_CASE("high-order derivative, Laplacian and interpolation") {
    for (auto grid : {RadialGrid::geometric(1e-4, 1e4, 0.02), RadialGrid::sinh(0.05, 1e3, 0.01)}) {
        for (int k : {1, 2, 3}) {
            auto q = grid.sample([&](double r) { return q_profile(k, 1.0, r); });
            int parity = k % 2 == 0 ? 1 : -1;
            auto qr = grid.d_dr(q, parity, 0.0);
            double worst = 0.0;
            for (int i = 0; i < grid.size(); ++i) {
                double r = grid.r()[i];
                double exact = multi_bubble_dr(k, {1, {1}, {1.0}}, r);
                worst = std::max(worst, std::abs(qr[i] - exact));
            }
            CHECK(worst < 1e-6);
            auto lap = grid.laplacian(q, parity, 0.0);
            // Q solves Laplacian Q = k^2 sin(2Q) / (2 r^2).
            double worst_lap = 0.0;
            for (int i = 5; i < grid.size() - 5; ++i) {
                double r = grid.r()[i];
                if (r < 1e-2 || r > 1e2) continue;
                worst_lap = std::max(worst_lap, std::abs(lap[i] - k * k * std::sin(2 * q[i]) / (2 * r * r)));
            }
            CHECK(worst_lap < 1e-5);
            for (double r : {0.013, 0.5, 1.0, 2.7, 40.0})
                CHECK(grid.interpolate(q, r, parity, 0.0) == doctest::Approx(q_profile(k, 1.0, r)).epsilon(1e-5));
        }
    }
}

TEST_CASE("energy functional") {
    for (int k = 1; k <= 3; ++k)
        for (double lam : {0.1, 1.0, 10.0}) {
            auto f = field_from_config(k, {1, {1}, {lam}}, geo(1e-4 * lam, 1e4 * lam));
            CHECK(energy(f) == doctest::Approx(4 * pi * k).epsilon(1e-9));
            f.background.reset();
            CHECK(energy(f) == doctest::Approx(4 * pi * k).epsilon(1e-3));
        }
    auto vac = field_from_config(2, {1, {}, {}}, geo());
    CHECK(energy(vac) < 1e-20);
    auto q2 = field_from_config(2, {1, {1}, {1.0}}, geo());
    CHECK(energy(q2, 1.0, kInf) == doctest::Approx(4 * pi).epsilon(1e-9));
    CHECK(energy(q2, 0.37, 2.0) + energy(q2, 2.0, 9.1) == doctest::Approx(energy(q2, 0.37, 9.1)).epsilon(1e-12));
    CHECK_THROWS_AS(energy(q2, 2.0, 1.0), DomainError);
    // energy is continuous and monotone in the inner radius
    double prev = energy(q2, 0.1, kInf);
    for (double r = 0.1; r < 10.0; r *= 1.013) {
        double e = energy(q2, r, kInf);
        CHECK(e <= prev + 1e-14);
        prev = e;
    }
}

TEST_CASE("norm, pairing and rescaling") {
    auto grid = geo();
    int k = 2;
    // Q - pi has infinite norm at the origin; the difference of two bubbles is finite.
    BubbleConfig diff{0, {1, -1}, {1.0, 2.0}};
    auto qm = field_from_config(k, diff, grid);
    double oracle = integrate_radial(
                        [&](double r) {
                            double gr = multi_bubble_dr(k, diff, r);
                            double g = multi_bubble(k, diff, r);
                            return gr * gr + k * k * g * g / (r * r);
                        },
                        0.0, kInf)
                        .value;
    CHECK(norm_e_sq(qm) == doctest::Approx(oracle).epsilon(1e-9));
    qm.background.reset();
    CHECK(norm_e_sq(qm) == doctest::Approx(oracle).epsilon(1e-9));
    std::vector<double> zero(grid->size(), 0.0);
    CHECK(norm_e_sq(make_pair_state(k, grid, zero)) == 0.0);

    auto lq = grid->sample([&](double r) { return lam_q(k, 1.0, r); });
    CHECK(pairing(*grid, lq, lq) == doctest::Approx(2 * pi).epsilon(1e-8));
    CHECK(pairing(*grid, lq, zero) == 0.0);
    auto z1 = grid->sample([&](double r) { return z_profile(1, r); });
    auto lq1 = grid->sample([&](double r) { return lam_q(1, 1.0, r); });
    CHECK(pairing(*grid, z1, lq1) > 0.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> a(grid->size()), b(grid->size()), c(grid->size());
    for (int i = 0; i < grid->size(); ++i) {
        double r = grid->r()[i];
        double env = std::exp(-std::pow(std::log(r), 2));
        a[i] = nd(rng) * env;
        b[i] = nd(rng) * env;
        c[i] = nd(rng) * env;
    }
    CHECK(pairing(*grid, a, b) == pairing(*grid, b, a));
    std::vector<double> bc(grid->size());
    for (int i = 0; i < grid->size(); ++i) bc[i] = 2.0 * b[i] + 3.0 * c[i];
    CHECK(pairing(*grid, a, bc) == doctest::Approx(2 * pairing(*grid, a, b) + 3 * pairing(*grid, a, c)).epsilon(1e-13));
    auto other = geo(1e-5, 1e6, 0.02);
    CHECK_THROWS_AS(pairing(*grid, a, *other, other->sample([](double) { return 0.0; })), DomainError);

    auto f = field_from_config(k, {1, {1}, {1.0}}, grid);
    f.u_dot = grid->sample([&](double r) { return 0.1 * lam_q(k, 1.0, r) / (1 + r); });
    f.background.reset();
    auto pair = make_pair_state(k, grid, qm.u, f.u_dot);
    for (double lam : {1.0, 0.3, 17.0}) {
        auto scaled = rescale_h(pair, lam);
        CHECK(norm_e_sq(scaled) == doctest::Approx(norm_e_sq(pair)).epsilon(1e-13));
        auto fs = rescale_h(f, lam);
        CHECK(energy(fs) == doctest::Approx(energy(f)).epsilon(1e-12));
        auto [g2, v2] = rescale_l2(*grid, a, lam);
        CHECK(pairing(g2, v2, v2) == doctest::Approx(pairing(*grid, a, a)).epsilon(1e-13));
    }
    auto same = rescale_h(f, 1.0);
    CHECK(same.u == f.u);
    CHECK(same.u_dot == f.u_dot);
    CHECK_THROWS_AS(rescale_h(f, 0.0), DomainError);
    CHECK(energy(rescale_h(field_from_config(k, {1, {1}, {1.0}}, grid), 5.0)) == doctest::Approx(8 * pi).epsilon(1e-10));
}

TEST_CASE("linearized operator") {
    int k = 2;
    std::vector<double> res;
    for (double ds : {0.04, 0.02, 0.01}) {
        RadialGrid g = RadialGrid::geometric(1e-3, 1e3, ds);
        auto lq = g.sample([&](double r) { return lam_q(k, 1.0, r); });
        auto out = apply_linearized(LinearizedOperator::single(1.0), k, g, lq);
        double acc = 0.0;
        for (int i = 0; i < g.size(); ++i) acc += g.weights()[i] * std::pow(g.r()[i] * out[i], 2);
        res.push_back(std::sqrt(acc));
    }
    CHECK(res[0] / res[1] > 3.5);
    CHECK(res[0] / res[1] < 4.5);
    CHECK(res[1] / res[2] > 3.5);
    CHECK(res[1] / res[2] < 4.5);

    RadialGrid g = RadialGrid::geometric(1e-3, 1e3, 0.02);
    std::vector<double> zero(g.size(), 0.0);
    for (double v : apply_linearized(LinearizedOperator::vacuum(), k, g, zero)) CHECK(v == 0.0);
    auto lq = g.sample([&](double r) { return lam_q(k, 1.0, r); });
    auto hi = apply_linearized(LinearizedOperator::single(1.0), k, g, lq, Stencil::high_order);
    for (int i = 10; i < g.size() - 10; ++i) CHECK(std::abs(hi[i]) < 1e-6 * (1 + 1 / std::pow(g.r()[i], 2)));
    CHECK(std::abs(quadratic_form(LinearizedOperator::single(1.0), k, g, lq)) < 1e-8);

    // Coercivity probe about a same-sign two-bubble, orthogonal to Z at both scales.
    RadialGrid gc = RadialGrid::geometric(1e-4, 1e6, 0.02);
    BubbleConfig bg{2, {1, 1}, {1.0, 100.0}};
    auto op = LinearizedOperator::multi(bg);
    std::vector<std::vector<double>> zs, ls;
    for (double lam : bg.lambda) {
        zs.push_back(gc.sample([&](double r) { return z_profile(k, r / lam) / lam; }));
        ls.push_back(gc.sample([&](double r) { return lam_q(k, lam, r); }));
    }
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ud(-1.0, 1.0), cd(std::log(1e-2), std::log(1e2));
    int positive = 0;
    for (int trial = 0; trial < 100; ++trial) {
        double c1 = cd(rng), c2 = cd(rng), a1 = ud(rng), a2 = ud(rng);
        auto gfun = gc.sample([&](double r) {
            double s = std::log(r);
            double env = (s > std::log(1e-2) && s < std::log(1e2)) ? std::pow(std::sin(pi * (s - std::log(1e-2)) / std::log(1e4)), 6) : 0.0;
            return env * (a1 * std::exp(-std::pow(s - c1, 2)) + a2 * std::exp(-std::pow(s - c2, 2) / 4));
        });
        // Remove the components along LamQ at each scale so <Z_j | g> = 0.
        double m11 = pairing(gc, zs[0], ls[0]), m12 = pairing(gc, zs[0], ls[1]);
        double m21 = pairing(gc, zs[1], ls[0]), m22 = pairing(gc, zs[1], ls[1]);
        double b1 = pairing(gc, zs[0], gfun), b2 = pairing(gc, zs[1], gfun);
        double det = m11 * m22 - m12 * m21;
        double x1 = (b1 * m22 - m12 * b2) / det, x2 = (m11 * b2 - m21 * b1) / det;
        for (int i = 0; i < gc.size(); ++i) gfun[i] -= x1 * ls[0][i] + x2 * ls[1][i];
        CHECK(std::abs(pairing(gc, zs[0], gfun)) < 1e-10);
        if (quadratic_form(op, k, gc, gfun) > 0.0) ++positive;
    }
    CHECK(positive == 100);
}

TEST_CASE("plateau detection") {
    auto grid = geo(1e-5, 1e5, 0.02);
    auto f = field_from_config(2, {1, {1}, {1.0}}, grid);
    auto hi = plateau_detect(f, 100.0, 1000.0);
    CHECK(hi.ell0 == 1);
    CHECK(hi.deviation == doctest::Approx(pi - q_profile(2, 1.0, 100.0)).epsilon(1e-4));
    auto lo = plateau_detect(f, 1e-3, 1e-2);
    CHECK(lo.ell0 == 0);
    CHECK(lo.deviation == doctest::Approx(q_profile(2, 1.0, 1e-2)).epsilon(1e-4));
    auto two = field_from_config(2, {2, {}, {}}, grid);
    auto p = plateau_detect(two, 1.0, 10.0);
    CHECK(p.ell0 == 2);
    CHECK(p.deviation < 1e-14);
    CHECK_THROWS_AS(plateau_detect(f, 1.0, 1.5), DomainError);
    CHECK_THROWS_AS(plateau_detect(f, 2.0, 1.0), DomainError);
}

TEST_CASE("Jia-Kenig functional") {
    for (int k = 1; k <= 3; ++k)
        for (double lam : {0.1, 1.0, 10.0}) {
            auto f = field_from_config(k, {1, {1}, {lam}}, geo(1e-4 * lam, 1e4 * lam, 0.02));
            CHECK(std::abs(jia_kenig_functional(f)) < 1e-8);
        }
    CHECK(std::abs(jia_kenig_functional(field_from_config(2, {3, {}, {}}, geo()))) < 1e-20);
    BubbleConfig two{0, {1, -1}, {0.1, 1.0}};
    auto f = field_from_config(2, two, geo());
    double oracle = integrate_radial(
                        [&](double r) {
                            double u = multi_bubble(2, two, r), ur = multi_bubble_dr(2, two, r);
                            return 4 * std::pow(std::sin(2 * u), 2) / (2 * r * r) + 2 * ur * ur * std::cos(2 * u);
                        },
                        0.0, kInf)
                        .value;
    CHECK(jia_kenig_functional(f) == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(std::isfinite(jia_kenig_functional(f, 0.5)));
}

TEST_CASE("snapshot round trip is bit exact") {
    auto grid = make_grid(RadialGrid::sinh(0.1, 50.0, 0.03));
    auto f = field_from_config(2, {0, {1, -1}, {0.1, 1.0}}, grid);
    for (int i = 0; i < f.size(); ++i) f.u_dot[i] = std::sin(0.1 * i) / 3.0;
    std::string path = "snapshot_roundtrip_test.json";
    save_snapshot(path, f, 0.125);
    double t = 0.0;
    auto g = load_snapshot(path, &t);
    std::remove(path.c_str());
    CHECK(t == 0.125);
    CHECK(g.u == f.u);
    CHECK(g.u_dot == f.u_dot);
    CHECK(g.grid->r() == f.grid->r());
    CHECK(g.sector == f.sector);
    CHECK(g.background->lambda == f.background->lambda);
    CHECK_THROWS_AS(snapshot_from_string("{\"format\":\"other\"}"), ConfigError);
}
