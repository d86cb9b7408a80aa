#pragma once

// Muckenhoupt weight classes on sampled weights: per-ball A_p / A_{p,q}
// quantities, their suprema over finite ball families, A_1, dual weights,
// doubling and density checks.
//
// Every supremum is a maximum over a finite family and therefore a lower bound
// for the true class constant. ess sup / ess inf over a ball are max / min over
// the in-ball samples.

#include <string>
#include <string_view>
#include <vector>

#include "amalgam/exec.hpp"
#include "amalgam/grid.hpp"

namespace amalgam {

/// Weight grammar: a positive number `c` (or `const:c`), `power:a` (|x|^a),
/// `shifted_power:a` ((1+|x|)^a), `exp:a` (e^{a x_1}) and `random:seed`
/// (exp of half a seeded smooth random field). Weights are not truncated.
WeightField make_weight(std::string_view spec, const Grid& grid);

struct Ball {
    Point center{};
    double radius = 0.0;
};

struct BallFamily {
    std::vector<Ball> balls;

    /// Centres at every `stride`-th grid point per axis (starting at stride/2),
    /// one ball per ladder radius.
    static BallFamily grid_centered(const Grid& grid, int stride, const RadiusLadder& ladder);
    /// Balls centred at the supplied points.
    static BallFamily around(const std::vector<Point>& centers, const RadiusLadder& ladder);
};

struct ApReport {
    double constant = 0.0;
    Ball argmax{};
    std::size_t family_size = 0;

    std::string to_json() const;
};

/// (avg_B w)(avg_B w^{1/(1-p)})^{p-1}, cell averages over the in-ball samples.
double ap_quantity(const WeightField& w, const Ball& ball, double p);
ApReport ap_constant(const WeightField& w, double p, const BallFamily& family, Exec exec = Exec::parallel);

/// max_x M(w)(x) / w(x) with the inner sup over the ladder radii.
double a1_constant(const WeightField& w, const RadiusLadder& ladder, Exec exec = Exec::parallel);

/// (avg_B w^q)^{1/q} (avg_B w^{-p'})^{1/p'}; for p = 1 the second factor is
/// max over the ball of 1/w.
double apq_quantity(const WeightField& w, const Ball& ball, double p, double q);
ApReport apq_constant(const WeightField& w, double p, double q, const BallFamily& family,
                      Exec exec = Exec::parallel);

/// w^{1-p'} (equivalently w^{1/(1-p)}).
WeightField dual_weight(const WeightField& w, double p);
/// Pointwise power w^e.
WeightField pow_weight(const WeightField& w, double e);
/// Pointwise c w.
WeightField scale_weight(const WeightField& w, double c);

double conjugate_exponent(double p);

/// max over the family of w(2B)/w(B); balls whose double leaves the cube are
/// skipped.
double doubling_constant(const WeightField& w, const BallFamily& family);

struct DensityReport {
    struct Pair {
        double measure_ratio = 0.0;  // |E| / |B|
        double weight_ratio = 0.0;   // w(E) / w(B)
    };
    std::vector<Pair> pairs;
    double fitted_c = 0.0;
    double fitted_delta = 0.0;
};

/// Concentric sub-balls E = B(c, s r) for s in `fractions`; (C, delta) fitted
/// to log(w(E)/w(B)) = log C + delta log(|E|/|B|) by least squares.
DensityReport density_check(const WeightField& w, const Ball& ball, const std::vector<double>& fractions);

}  // namespace amalgam
