#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "wm/errors.hpp"
#include "wm/io.hpp"

using namespace wm;

TEST_CASE("csv round trip") {
    Table t;
    t.columns = {"t", "lambda, inner", "say \"hi\""};
    t.rows = {{0.0, 0.1, 1.0 / 3.0}, {1e-300, std::nan(""), INFINITY}, {-2.5, 6.02e23, -INFINITY}};
    auto text = to_csv(t);
    CHECK(text.find("\"lambda, inner\"") != std::string::npos);
    CHECK(text.find("\"say \"\"hi\"\"\"") != std::string::npos);
    CHECK(text.find("\r\n") != std::string::npos);
    auto back = from_csv(text);
    CHECK(back.columns == t.columns);
    REQUIRE(back.rows.size() == 3);
    CHECK(back.rows[0][2] == 1.0 / 3.0);
    CHECK(back.rows[1][0] == 1e-300);
    CHECK(std::isnan(back.rows[1][1]));
    CHECK(back.rows[1][2] == INFINITY);
    CHECK(back.rows[2][2] == -INFINITY);
    CHECK(back.values("t") == std::vector<double>{0.0, 1e-300, -2.5});
    CHECK(back.column("nope") == -1);
    CHECK_THROWS_AS(back.values("nope"), DomainError);

    auto path = (std::filesystem::temp_directory_path() / "wm_io_test.csv").string();
    write_csv(path, t);
    CHECK(to_csv(read_csv(path)) == text);
    std::filesystem::remove(path);
}

TEST_CASE("csv errors") {
    CHECK_THROWS_AS(from_csv(""), ConfigError);
    CHECK_THROWS_AS(from_csv("a,b\n1\n"), ConfigError);
    CHECK_THROWS_AS(from_csv("a\nx1\n"), ConfigError);
    CHECK_THROWS_AS(from_csv("\"a\n"), ConfigError);
    try {
        from_csv("a,b\n1,2\n3,oops\n");
        FAIL("no throw");
    } catch (const ConfigError& e) {
        CHECK(e.line == 3);
    }
    auto ok = from_csv("a,b\n1,2");
    CHECK(ok.rows.size() == 1);
}

TEST_CASE("svg plot") {
    PlotSpec spec{"scales", "t", "lambda", true};
    auto svg = svg_plot(spec, {{"l1", {0, 1, 2}, {0.1, 0.2, 0.0}}, {"l2", {0, 1, 2}, {1, 1, 1}}});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("l2") != std::string::npos);
    CHECK(svg_plot({}, {}).find("<path") == std::string::npos);
}
