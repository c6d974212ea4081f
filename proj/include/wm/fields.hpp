#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wm/grid.hpp"
#include "wm/profiles.hpp"

namespace wm {

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(RadialGrid g) { return std::make_shared<const RadialGrid>(std::move(g)); }

// Boundary limits u -> ell*pi at 0 and u -> m*pi at infinity.
struct Sector {
    int ell = 0;
    int m = 0;
    bool operator==(const Sector&) const = default;
};

// Sampled pair (u, u_dot). When `background` is set the field is taken to
// coincide with that static multi-bubble outside the grid (used for tails).
struct FieldState {
    GridPtr grid;
    int k = 1;
    std::vector<double> u;
    std::vector<double> u_dot;
    Sector sector;
    std::optional<BubbleConfig> background;

    int size() const { return static_cast<int>(u.size()); }
    // Parity of u - ell*pi under s -> -s on origin-closed grids.
    int parity() const { return k % 2 == 0 ? 1 : -1; }
    double origin_value() const;
    std::vector<double> u_r() const;
    void validate() const;
};

FieldState field_from_config(int k, const BubbleConfig& cfg, GridPtr grid, bool attach_background = true);
// Pair (g, g_dot) in the vacuum sector.
FieldState make_pair_state(int k, GridPtr grid, std::vector<double> g, std::vector<double> g_dot = {});

// 2*pi * int_{r1}^{r2} (u_dot^2 + u_r^2 + k^2 sin^2 u / r^2) r dr / 2.
double energy(const FieldState& field, double r1 = 0.0, double r2 = kInf);
// Pointwise energy density against r dr (origin entry 0).
std::vector<double> energy_density(const FieldState& field);
// int (g_dot^2 + g_r^2 + k^2 g^2 / r^2) r dr.
double norm_e_sq(const FieldState& pair, double r1 = 0.0, double r2 = kInf);
// Same norm for g sampled on a grid, g_dot optional.
double norm_e_sq(int k, const RadialGrid& grid, const std::vector<double>& g,
                 const std::vector<double>& g_dot = {}, double r1 = 0.0, double r2 = kInf);
// int g_r^2 + k^2 g^2 / r^2 (the H part of the norm).
double norm_h_sq(int k, const RadialGrid& grid, const std::vector<double>& g);

double pairing(const RadialGrid& grid, const std::vector<double>& f, const std::vector<double>& g);
double pairing(const RadialGrid& grid, const std::vector<double>& f, const std::vector<double>& g,
               double r1, double r2);
double pairing(const RadialGrid& gf, const std::vector<double>& f, const RadialGrid& gg,
               const std::vector<double>& g);

// (u(r/lambda), u_dot(r/lambda)/lambda) on the grid scaled by lambda.
FieldState rescale_h(const FieldState& field, double lambda);
// lambda^-1 f(r/lambda) on the scaled grid.
std::pair<RadialGrid, std::vector<double>> rescale_l2(const RadialGrid& grid, const std::vector<double>& f,
                                                       double lambda);

struct LinearizedOperator {
    enum class Kind { vacuum, single, multi };
    Kind kind = Kind::vacuum;
    BubbleConfig background;

    static LinearizedOperator vacuum() { return {}; }
    static LinearizedOperator single(double lambda) { return {Kind::single, BubbleConfig{1, {1}, {lambda}}}; }
    static LinearizedOperator multi(BubbleConfig cfg) { return {Kind::multi, std::move(cfg)}; }

    // Coefficient V(r) in L g = -Laplacian g + V g / r^2.
    double potential(int k, double r) const;
};

enum class Stencil { second_order, high_order };

// L g = -Laplacian g + (k^2 / r^2) f'(background) g; entries at boundary nodes are 0.
std::vector<double> apply_linearized(const LinearizedOperator& op, int k, const RadialGrid& grid,
                                     const std::vector<double>& g, Stencil stencil = Stencil::second_order);
// <L g | g> in weak form: int g_r^2 + k^2 f'(background) g^2 / r^2.
double quadratic_form(const LinearizedOperator& op, int k, const RadialGrid& grid, const std::vector<double>& g);

struct PlateauResult {
    int ell0 = 0;
    double deviation = 0.0;
};
PlateauResult plateau_detect(const FieldState& field, double r1, double r2, double min_ratio = 2.0);

// int (k^2 sin^2(2u) / (2 r^2) + 2 u_r^2 cos 2u) chi(r / R) r dr.
double jia_kenig_functional(const FieldState& field, std::optional<double> cutoff_radius = std::nullopt);

// Versioned JSON snapshot; doubles round-trip exactly.
void save_snapshot(const std::string& path, const FieldState& field, double t = 0.0);
FieldState load_snapshot(const std::string& path, double* t = nullptr);
std::string snapshot_to_string(const FieldState& field, double t = 0.0);
FieldState snapshot_from_string(const std::string& text, double* t = nullptr);

}  // namespace wm
