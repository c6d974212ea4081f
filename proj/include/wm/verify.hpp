#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wm/io.hpp"

namespace wm {

// One row of the constants table. For a zero reference the error is absolute.
struct CheckRow {
    std::string check;
    int k = 0;
    double param = 0.0;          // radius, scale or cutoff (0 if none)
    double value = 0.0;
    double reference = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    // "" on pass; "tolerance" when the value meets the default tolerance but not
    // the requested one, "value" otherwise.
    std::string failure;
};

struct VerifyOptions {
    double tolerance = 0.0;      // > 0 overrides every default tolerance
    int k_max = 6;
};

// E(Q), the two cubic LamQ integrals, omega^2, the truncated k = 1 norm, the
// exterior energy and the virial functional at rescaled bubbles.
std::vector<CheckRow> verify_constants(const VerifyOptions& opts = {});

std::string check_csv(const std::vector<CheckRow>& rows);
nlohmann::json check_json(const std::vector<CheckRow>& rows);

}  // namespace wm
