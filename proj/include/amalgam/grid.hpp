#pragma once

// Uniform midpoint grids on the cube [-L, L]^dim (dim = 1 or 2), sampled
// fields, the test-function mini-language and the quadrature primitives that
// every other module builds on.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amalgam/error.hpp"

namespace amalgam {

/// A point of R^dim; the second coordinate is ignored (and zero) in dim 1.
using Point = std::array<double, 2>;

struct Grid {
    int dim = 1;
    double half_width = 1.0;   // L
    int points_per_axis = 8;   // N
    double spacing = 0.25;     // h = 2L / N

    std::size_t size() const
    {
        const auto n = static_cast<std::size_t>(points_per_axis);
        return dim == 1 ? n : n * n;
    }
    /// Cell midpoint along one axis: -L + (i + 1/2) h.
    double coord(int i) const { return -half_width + (i + 0.5) * spacing; }
    std::size_t index(int i, int j = 0) const
    {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(points_per_axis) + static_cast<std::size_t>(i);
    }
    int axis_index(std::size_t k, int axis) const
    {
        const auto n = static_cast<std::size_t>(points_per_axis);
        return static_cast<int>(axis == 0 ? k % n : k / n);
    }
    Point point(std::size_t k) const
    {
        if (dim == 1)
            return {coord(static_cast<int>(k)), 0.0};
        return {coord(axis_index(k, 0)), coord(axis_index(k, 1))};
    }
    double cell_volume() const { return dim == 1 ? spacing : spacing * spacing; }
    /// Lebesgue measure of the unit ball in R^dim.
    double unit_ball_volume() const;

    bool operator==(const Grid&) const = default;
};

Grid make_grid(int dim, double half_width, int points_per_axis);

struct Box {
    Point lo{};
    Point hi{};
};

struct SampledField {
    Grid grid;
    std::vector<double> values;
    std::optional<Box> support_hint;

    static SampledField zeros(const Grid& grid);
    static SampledField constant(const Grid& grid, double c);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }
};

/// Strictly positive field playing the role of w, v or a derived density.
struct WeightField {
    SampledField field;
    std::optional<std::string> closed_form;  // e.g. "power:0.5"

    const Grid& grid() const { return field.grid; }
    std::size_t size() const { return field.size(); }
    double operator[](std::size_t k) const { return field.values[k]; }
};

WeightField make_weight_field(SampledField field, std::optional<std::string> closed_form = std::nullopt);
WeightField unit_weight(const Grid& grid);

// Pointwise arithmetic. All throw ParameterError on grid mismatch.
SampledField add(const SampledField& a, const SampledField& b);
SampledField scale(const SampledField& a, double c);
SampledField abs(const SampledField& a);
SampledField multiply(const SampledField& a, const SampledField& b);
void require_same_grid(const Grid& a, const Grid& b, const char* where);

// -----------------------------------------------------------------------------
// Test functions

struct FunctionSpec {
    enum class Kind { indicator, gaussian, power, bump, oscillatory, random_smooth };

    Kind kind = Kind::gaussian;
    std::vector<double> parameters;
    std::optional<std::uint64_t> seed;  // random_smooth only

    std::string to_string() const;
};

/// Parses `indicator:a,b`, `indicator:a,b,c,d`, `gaussian:sigma[,center...]`,
/// `power:a`, `bump:center...,width`, `oscillatory:freq`, `random_smooth:seed`.
FunctionSpec parse_function_spec(std::string_view text);

/// Evaluates the spec at every cell midpoint. Every kind is supported in
/// [-L/2, L/2]^dim: indicator and bump parameters are validated against that
/// window, everything else is truncated to it.
SampledField sample(const FunctionSpec& spec, const Grid& grid);

// -----------------------------------------------------------------------------
// Radii

struct RadiusLadder {
    std::vector<double> radii;  // strictly increasing

    /// h, 2h, 4h, ... up to the largest value not exceeding 2L.
    static RadiusLadder dyadic(const Grid& grid);
    /// Validates h <= radii.front(), radii.back() <= 2L and strict increase.
    static RadiusLadder from(const Grid& grid, std::vector<double> radii);
};

// -----------------------------------------------------------------------------
// Quadrature

/// Midpoint rule sum_i f_i w_i h^dim in index order.
double integrate(const SampledField& f, const WeightField* weight = nullptr);
double integrate(const SampledField& f, const WeightField& weight);

/// Weighted mean of f over the Euclidean ball |x - center| < r.
double ball_average(const SampledField& f, Point center, double r, const WeightField& weight);

/// w(B) = sum over in-ball samples of w h^dim.
double ball_measure(const WeightField& w, Point center, double r);

/// Number of samples in the ball (Lebesgue measure is count * h^dim).
std::size_t ball_count(const Grid& grid, Point center, double r);

/// Calls fn(k) for every sample index inside B(center, r), in increasing k.
template <class Fn>
void for_each_in_ball(const Grid& grid, Point center, double r, Fn&& fn);

/// Integer offsets of the grid-centred ball B(x_k, r), in increasing index
/// order. Membership uses the same predicate as for_each_in_ball, so sums over
/// a stencil match sums over the equivalent point-centred ball bitwise.
struct BallStencil {
    int dim = 1;
    int reach = 0;
    std::vector<std::array<int, 2>> offsets;

    static BallStencil make(const Grid& grid, double r, bool closed = false);

    template <class Fn>
    void for_each(const Grid& grid, std::size_t center, Fn&& fn) const;
};

// -----------------------------------------------------------------------------
// Implementation of the templates

namespace detail {
inline double sq(double x) { return x * x; }
}  // namespace detail

template <class Fn>
void for_each_in_ball(const Grid& grid, Point center, double r, Fn&& fn)
{
    const int n = grid.points_per_axis;
    const double h = grid.spacing;
    const double L = grid.half_width;
    const double r2 = r * r;
    auto range = [&](double c, double reach, int& lo, int& hi) {
        lo = static_cast<int>((c - reach + L) / h - 0.5) - 1;
        hi = static_cast<int>((c + reach + L) / h - 0.5) + 1;
        lo = lo < 0 ? 0 : lo;
        hi = hi > n - 1 ? n - 1 : hi;
    };
    int i0 = 0, i1 = 0;
    range(center[0], r, i0, i1);
    if (grid.dim == 1) {
        for (int i = i0; i <= i1; ++i)
            if (detail::sq(grid.coord(i) - center[0]) < r2)
                fn(static_cast<std::size_t>(i));
        return;
    }
    int j0 = 0, j1 = 0;
    range(center[1], r, j0, j1);
    for (int j = j0; j <= j1; ++j) {
        const double dy2 = detail::sq(grid.coord(j) - center[1]);
        if (dy2 >= r2)
            continue;
        for (int i = i0; i <= i1; ++i)
            if (detail::sq(grid.coord(i) - center[0]) + dy2 < r2)
                fn(grid.index(i, j));
    }
}

template <class Fn>
void BallStencil::for_each(const Grid& grid, std::size_t center, Fn&& fn) const
{
    const int n = grid.points_per_axis;
    const int ci = grid.axis_index(center, 0);
    const int cj = dim == 1 ? 0 : grid.axis_index(center, 1);
    for (const auto& off : offsets) {
        const int i = ci + off[0];
        const int j = cj + off[1];
        if (i < 0 || i >= n || j < 0 || j >= n)
            continue;
        fn(grid.index(i, j));
    }
}

}  // namespace amalgam
