#include "wm/verify.hpp"

#include <cmath>
#include <numbers>

#include "wm/fields.hpp"
#include "wm/profiles.hpp"

namespace wm {

namespace {

constexpr double kDefaultTol = 1e-8;

void add(std::vector<CheckRow>& rows, const VerifyOptions& o, std::string name, int k, double param, double value,
         double reference) {
    CheckRow c;
    c.check = std::move(name);
    c.k = k;
    c.param = param;
    c.value = value;
    c.reference = reference;
    c.error = reference == 0.0 ? std::abs(value) : std::abs(value / reference - 1.0);
    c.tolerance = o.tolerance > 0.0 ? o.tolerance : kDefaultTol;
    c.pass = c.error <= c.tolerance;
    if (!c.pass) c.failure = c.error <= kDefaultTol ? "tolerance" : "value";
    rows.push_back(std::move(c));
}

}  // namespace

std::vector<CheckRow> verify_constants(const VerifyOptions& o) {
    using std::numbers::pi;
    std::vector<CheckRow> rows;
    for (int k = 1; k <= o.k_max; ++k) {
        add(rows, o, "energy_Q", k, 0.0, energy_Q(k), 4 * pi * k);
        if (k <= 5) {
            add(rows, o, "cubic_plus", k, 0.0, q3_integral(k, +1), 8.0 * k * k);
            add(rows, o, "cubic_minus", k, 0.0, q3_integral(k, -1), 8.0 * k * k);
        }
        if (k >= 2) add(rows, o, "omega_sq", k, 0.0, omega_sq_quadrature(k), 4.0 * k * k * std::sin(pi / k) / pi);
        if (k == 1)
            for (double R : {10.0, 1e3})
                add(rows, o, "norm_lam_q_truncated", 1, R, norm_lam_q_sq(1, R),
                    -2 * R * R / (1 + R * R) + 2 * std::log(1 + R * R));
        if (k <= 3) {
            for (int i = 0; i < 20; ++i) {
                double r = std::pow(10.0, -2.0 + 4.0 * i / 19.0);
                add(rows, o, "exterior_energy", k, r, energy_Q_quadrature(k, r, kInf),
                    4 * pi * k / (1 + std::pow(r, 2 * k)));
            }
            for (double lam : {0.1, 1.0, 10.0}) {
                auto grid = make_grid(RadialGrid::geometric(1e-4 * lam, 1e4 * lam, 0.02));
                add(rows, o, "virial_functional_static", k, lam,
                    jia_kenig_functional(field_from_config(k, {1, {1}, {lam}}, grid)), 0.0);
            }
        }
    }
    return rows;
}

std::string check_csv(const std::vector<CheckRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.check, std::to_string(r.k), format_number(r.param), format_number(r.value),
                       format_number(r.reference), format_number(r.error), format_number(r.tolerance),
                       r.pass ? "pass" : "fail", r.failure});
    return to_csv({"check", "k", "param", "value", "reference", "error", "tolerance", "status", "failure"}, out);
}

nlohmann::json check_json(const std::vector<CheckRow>& rows) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rows)
        a.push_back({{"check", r.check},       {"k", r.k},         {"param", r.param},
                     {"value", r.value},       {"reference", r.reference}, {"error", r.error},
                     {"tolerance", r.tolerance}, {"pass", r.pass},  {"failure", r.failure}});
    return a;
}

}  // namespace wm
