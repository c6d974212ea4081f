#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "wm/config.hpp"
#include "wm/errors.hpp"
#include "wm/modulation.hpp"

using namespace wm;

namespace {

const char* kTwoBubble = R"(# two bubbles at rest
wmlab-config 1
scenario = two_bubble
k = 2
grid {
  kind = sinh
  a = 0.02
  rmax = 30
  ds = 0.01
}
initial {
  m = 0
  iota = 1 -1
  lambda = 0.1 1
  perturbation {
    amplitude = 0.001   # small
    center = 3
  }
}
solver {
  T = 0.5
  scheme = rk4
}
analysis {
  ode_compare = true
}
)";

int error_line(const std::string& text) {
    try {
        parse_run_config(text);
    } catch (const ConfigError& e) {
        return e.line;
    }
    return -1;
}

}  // namespace

TEST_CASE("parse and round trip") {
    auto c = parse_run_config(kTwoBubble);
    CHECK(c.scenario == "two_bubble");
    CHECK(c.k == 2);
    CHECK(c.grid.a == 0.02);
    CHECK(c.initial.iota == std::vector<int>{1, -1});
    CHECK(c.initial.lambda == std::vector<double>{0.1, 1.0});
    CHECK(c.perturbation.amplitude == 0.001);
    CHECK(c.perturbation.width == 1.0);
    CHECK(c.solver.T == 0.5);
    CHECK(c.solver.scheme == Scheme::rk4);
    CHECK(c.analysis.ode_compare);
    CHECK(c.analysis.track);

    auto again = parse_run_config(c.to_text());
    CHECK(again.to_json() == c.to_json());
    CHECK(again.hash() == c.hash());
    c.seed = 7;
    CHECK(c.hash() != again.hash());
}

TEST_CASE("errors name the key and line") {
    std::string bad = kTwoBubble;
    bad.replace(bad.find("ds = 0.01"), 9, "dz = 0.01");
    CHECK(error_line(bad) == 9);
    try {
        parse_run_config(bad);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("grid.dz") != std::string::npos);
    }
    CHECK(error_line("wmlab-config 1\nk = two\n") == 2);
    CHECK(error_line("wmlab-config 1\nk = 2\nk = 3\n") == 3);
    CHECK(error_line("wmlab-config 2\n") == 1);
    CHECK(error_line("k = 2\n") == 1);
    CHECK(error_line("wmlab-config 1\ngrid {\n  ds = 0.1\n") == 3);
    CHECK(error_line("wmlab-config 1\n}\n") == 2);
    CHECK(error_line("wmlab-config 1\nsolver {\n  scheme = euler\n}\n") == 3);
    CHECK(error_line("wmlab-config 1\ninitial {\n  iota = 1 1\n  lambda = 1 0.5\n}\n") == 4);
    CHECK(error_line("wmlab-config 1\ngrid {\n  ds = -1\n}\n") == 3);
    CHECK(error_line("wmlab-config 1\nnot a statement\n") == 2);
}

TEST_CASE("initial field") {
    auto c = parse_run_config(kTwoBubble);
    auto f = initial_field(c);
    CHECK(f.k == 2);
    CHECK(f.sector == Sector{0, 0});
    const auto& r = f.grid->r();
    CHECK(f.u.front() == 0.0);
    int i = static_cast<int>(std::lower_bound(r.begin(), r.end(), 3.0) - r.begin());
    double bare = multi_bubble(2, c.initial, r[i]);
    CHECK(f.u[i] - bare == doctest::Approx(0.001 * std::exp(-std::pow(std::log(r[i] / 3.0), 2))));

    c.perturbation.random_bumps = 3;
    auto a = initial_field(c), b = initial_field(c);
    CHECK(a.u == b.u);
    c.seed = 2;
    CHECK(initial_field(c).u != a.u);
}

TEST_CASE("files reproduce in-memory fits bit for bit") {
    auto c = parse_run_config(kTwoBubble);
    c.perturbation.amplitude = 0.0;
    c.grid.rmax = 10.0;
    c.solver.T = 0.1;
    c.solver.cadence = 0.05;
    auto traj = evolve(initial_field(c), c.solver);
    auto dir = (std::filesystem::temp_directory_path() / "wm_roundtrip_traj").string();
    save_trajectory(dir, traj);
    auto back = load_trajectory(dir);
    REQUIRE(back.snapshots.size() == traj.snapshots.size());
    CHECK(back.manifest == traj.manifest);
    for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
        const auto& a = traj.snapshots[n];
        const auto& b = back.snapshots[n];
        CHECK(a.t == b.t);
        CHECK(a.state.u == b.state.u);
        CHECK(a.state.u_dot == b.state.u_dot);
        auto fa = fit_static(a.state, c.initial);
        auto fb = fit_static(b.state, c.initial);
        CHECK(fa.config.lambda == fb.config.lambda);
        CHECK(fa.g == fb.g);
    }
    std::filesystem::remove_all(dir);
}
