#pragma once

#include <functional>
#include <vector>

namespace wm {

enum class GridKind { geometric, sinh };

// Grid parameters; nodes are r(s_i) with s_i = i*ds, i = 0..n-1.
//   geometric: r = scale * exp(s)        (no origin node)
//   sinh:      r = scale * sinh(s)       (node 0 is the origin)
struct GridSpec {
    GridKind kind = GridKind::geometric;
    double scale = 1.0;
    double ds = 0.02;
    int n = 0;

    bool operator==(const GridSpec&) const = default;
};

class RadialGrid {
public:
    explicit RadialGrid(const GridSpec& spec);

    // Geometric nodes covering [r_min, r_max] with spacing close to ds in log r.
    static RadialGrid geometric(double r_min, double r_max, double ds);
    // sinh-mapped nodes on [0, r_max]; uniform (~a*ds) near the origin.
    static RadialGrid sinh(double a, double r_max, double ds);

    const GridSpec& spec() const { return spec_; }
    int size() const { return spec_.n; }
    bool origin_closed() const { return spec_.kind == GridKind::sinh; }
    double ds() const { return spec_.ds; }
    double r_first() const { return r_.front(); }
    double r_last() const { return r_.back(); }

    const std::vector<double>& r() const { return r_; }
    const std::vector<double>& drds() const { return drds_; }
    // Trapezoid-in-s weights for the measure r dr.
    const std::vector<double>& weights() const { return w_; }

    double r_of_s(double s) const;
    double s_of_r(double r) const;

    // Same node layout with all radii multiplied by lambda.
    RadialGrid scaled(double lambda) const;
    bool compatible(const RadialGrid& other) const { return spec_ == other.spec_; }

    std::vector<double> sample(const std::function<double(double)>& fn) const;

    // Sum of w_i f_i: integral of f against r dr over the whole grid.
    double integrate(const std::vector<double>& f) const;
    // Integral of f r dr over [r1, r2] clipped to the grid, exact for the
    // piecewise-linear-in-s interpolant of f r dr/ds; additive in the range.
    double integrate_range(const std::vector<double>& f, double r1, double r2) const;

    // High-order d/dr. Near the origin, ghost values f(-s) = offset + parity*(f(s) - offset).
    std::vector<double> d_dr(const std::vector<double>& f, int parity = 1, double offset = 0.0) const;
    // High-order radial Laplacian f_rr + f_r/r; the origin entry is left at 0.
    std::vector<double> laplacian(const std::vector<double>& f, int parity = 1, double offset = 0.0) const;
    // Second-order conservative Laplacian on interior nodes; boundary entries 0.
    std::vector<double> laplacian2(const std::vector<double>& f) const;

    // Cubic Lagrange interpolation in s.
    double interpolate(const std::vector<double>& f, double r, int parity = 1, double offset = 0.0) const;

    // Spacing data for the conservative scheme.
    const std::vector<double>& half_r() const { return rh_; }      // r at s_{i+1/2}
    const std::vector<double>& half_h() const { return hh_; }      // r_{i+1} - r_i
    const std::vector<double>& mass() const { return mass_; }      // r_i (h_{i-1/2} + h_{i+1/2}) / 2
    double min_spacing() const;
    double min_positive_radius() const;

private:
    std::vector<double> d_ds(const std::vector<double>& f, int parity, double offset) const;

    GridSpec spec_;
    std::vector<double> r_, drds_, w_;
    std::vector<double> rh_, hh_, mass_;
    // One-sided first-derivative stencils at the first and last nodes.
    std::vector<std::vector<double>> left_, right_;
};

// Finite-difference weights for the m-th derivative at x0 from the given nodes.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int m);

}  // namespace wm
