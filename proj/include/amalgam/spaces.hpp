#pragma once

// Norms: weighted Lebesgue (strong and weak), the weighted amalgam norm
// (L^p_w, L^q_v)_t with the q = infinity modification, the weak amalgam norm,
// dual exponents/weights and the Hoelder pairing defect.

#include <limits>
#include <string>

#include "amalgam/exec.hpp"
#include "amalgam/grid.hpp"

namespace amalgam {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct SpaceParams {
    double p = 2.0;        // inner exponent, 1 < p < infinity
    double q = 2.0;        // outer exponent, 1 <= q <= infinity
    double t = 1.0;        // ball radius
    WeightField w;         // inner weight
    WeightField v;         // outer weight

    /// Throws ParameterError unless p, q, t and the weights are admissible:
    /// 1 < p < inf, 1 <= q <= inf, h <= t <= L/2, weights on the same grid.
    void validate(const Grid& grid) const;
    std::string describe() const;
};

/// Clamps t into [h, L/2].
double clamp_radius(const Grid& grid, double t);

struct DualParams {
    double p_dual = 2.0;
    double q_dual = 2.0;
    WeightField inner_dual;  // w^{1-p'}
    WeightField outer_dual;  // v^{1-q'}; unit weight when q' = infinity

    SpaceParams as_space(double t) const { return SpaceParams{p_dual, q_dual, t, inner_dual, outer_dual}; }
};

struct LevelSet {
    double threshold = 0.0;
    SampledField indicator;  // 1 where |f| > threshold
};

LevelSet level_set(const SampledField& f, double threshold);

/// (sum |f|^p w h^n)^{1/p}; p = infinity gives max |f| over the grid.
double lp_norm(const SampledField& f, const WeightField* w, double p);
double lp_norm(const SampledField& f, const WeightField& w, double p);

/// sup_lambda lambda w(|f| > lambda)^{1/p}, lambda over (1 - 1e-9) times the
/// distinct sample magnitudes.
double weak_lp_norm(const SampledField& f, const WeightField* w, double p);
double weak_lp_norm(const SampledField& f, const WeightField& w, double p);

/// x -> ((1 / w(B(x,t))) int_{B(x,t)} |f|^p w)^{1/p} at every grid point.
SampledField inner_ball_norm(const SampledField& f, const WeightField& w, double p, double t,
                             Exec exec = Exec::parallel);

double amalgam_norm(const SampledField& f, const SpaceParams& params, Exec exec = Exec::parallel);

/// sup_lambda lambda ||chi_{|f| > lambda}||_{(L^p_w, L^q_v)_t}, same lambda
/// candidates as weak_lp_norm. Level sets are grown incrementally from the
/// largest magnitude down, so the cost is one pass over the stencil per sample
/// plus one outer reduction per candidate.
double weak_amalgam_norm(const SampledField& f, const SpaceParams& params, Exec exec = Exec::parallel);

/// Conjugate exponents with inner dual weight w^{1-p'} and outer dual weight
/// v^{1-q'}. q = 1 pairs with q' = infinity, whose norm ignores the weight.
DualParams dual_params(const SpaceParams& params);

/// ||f||_{X} ||g||_{X'} - ||f g||_1.
double holder_defect(const SampledField& f, const SampledField& g, const SpaceParams& params,
                     Exec exec = Exec::parallel);

}  // namespace amalgam
