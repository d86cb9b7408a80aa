#include "amalgam/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "amalgam/weights.hpp"

namespace amalgam {

namespace {

constexpr double lambda_shrink = 1.0 - 1e-9;

void require_finite(const SampledField& f, const char* where)
{
    for (double x : f.values)
        if (!std::isfinite(x))
            throw NumericError(std::string(where) + ": non-finite sample");
}

// Indices sorted by decreasing |f|; ties keep index order.
std::vector<std::size_t> order_by_magnitude(const SampledField& f)
{
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(f[a]) > std::abs(f[b]); });
    return order;
}

// Fixed-order blocked sum whose value depends only on the current terms, not
// on the history of updates.
class BlockedSum {
public:
    explicit BlockedSum(std::size_t n) : terms_(n, 0.0), blocks_((n + block - 1) / block, 0.0), dirty_(blocks_.size(), 0) {}

    void set(std::size_t k, double value)
    {
        terms_[k] = value;
        const auto b = k / block;
        if (!dirty_[b]) {
            dirty_[b] = 1;
            dirty_list_.push_back(b);
        }
    }

    double sum()
    {
        refresh();
        double s = 0.0;
        for (double b : blocks_)
            s += b;
        return s;
    }

    double max()
    {
        refresh_max();
        double m = 0.0;
        for (double b : blocks_)
            m = std::max(m, b);
        return m;
    }

private:
    static constexpr std::size_t block = 64;

    template <class Op>
    void refresh_with(Op op)
    {
        for (auto b : dirty_list_) {
            const auto lo = b * block;
            const auto hi = std::min(terms_.size(), lo + block);
            double acc = 0.0;
            for (auto k = lo; k < hi; ++k)
                acc = op(acc, terms_[k]);
            blocks_[b] = acc;
            dirty_[b] = 0;
        }
        dirty_list_.clear();
    }
    void refresh() { refresh_with([](double a, double x) { return a + x; }); }
    void refresh_max() { refresh_with([](double a, double x) { return std::max(a, x); }); }

    std::vector<double> terms_;
    std::vector<double> blocks_;
    std::vector<char> dirty_;
    std::vector<std::size_t> dirty_list_;
};

}  // namespace

void SpaceParams::validate(const Grid& grid) const
{
    if (!(p > 1.0) || std::isinf(p))
        throw ParameterError("inner exponent p must satisfy 1 < p < infinity");
    if (!(q >= 1.0))
        throw ParameterError("outer exponent q must satisfy 1 <= q <= infinity");
    const double h = grid.spacing;
    if (!(t >= h * (1.0 - 1e-12)) || t > 0.5 * grid.half_width * (1.0 + 1e-12))
        throw ParameterError("radius t must lie in [h, L/2]");
    require_same_grid(w.grid(), grid, "space inner weight");
    require_same_grid(v.grid(), grid, "space outer weight");
}

std::string SpaceParams::describe() const
{
    std::ostringstream os;
    os.precision(12);
    os << "p=" << p << " q=";
    if (std::isinf(q))
        os << "inf";
    else
        os << q;
    os << " t=" << t
       << " w=" << w.closed_form.value_or("<field>") << " v=" << v.closed_form.value_or("<field>");
    return os.str();
}

double clamp_radius(const Grid& grid, double t)
{
    return std::clamp(t, grid.spacing, 0.5 * grid.half_width);
}

LevelSet level_set(const SampledField& f, double threshold)
{
    if (!(threshold > 0.0))
        throw ParameterError("level-set threshold must be positive");
    LevelSet set{threshold, SampledField::zeros(f.grid)};
    for (std::size_t k = 0; k < f.size(); ++k)
        set.indicator[k] = std::abs(f[k]) > threshold ? 1.0 : 0.0;
    return set;
}

double lp_norm(const SampledField& f, const WeightField* w, double p)
{
    require_finite(f, "lp_norm");
    if (!(p > 0.0))
        throw ParameterError("Lebesgue exponent must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : f.values)
            m = std::max(m, std::abs(x));
        return m;
    }
    if (w)
        require_same_grid(f.grid, w->grid(), "lp_norm");
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double a = std::abs(f[k]);
        if (a == 0.0)
            continue;
        s += std::pow(a, p) * (w ? (*w)[k] : 1.0);
    }
    return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

double lp_norm(const SampledField& f, const WeightField& w, double p)
{
    return lp_norm(f, &w, p);
}

double weak_lp_norm(const SampledField& f, const WeightField* w, double p)
{
    require_finite(f, "weak_lp_norm");
    if (!(p > 0.0))
        throw ParameterError("Lebesgue exponent must be positive");
    if (w)
        require_same_grid(f.grid, w->grid(), "weak_lp_norm");
    const auto order = order_by_magnitude(f);
    const double cell = f.grid.cell_volume();
    double measure = 0.0;
    double best = 0.0;
    std::size_t next = 0;
    for (std::size_t idx = 0; idx < order.size();) {
        const double value = std::abs(f[order[idx]]);
        if (value == 0.0)
            break;
        const double lambda = lambda_shrink * value;
        while (next < order.size() && std::abs(f[order[next]]) > lambda) {
            measure += (w ? (*w)[order[next]] : 1.0);
            ++next;
        }
        const double candidate =
            std::isinf(p) ? (measure > 0.0 ? lambda : 0.0) : lambda * std::pow(measure * cell, 1.0 / p);
        best = std::max(best, candidate);
        while (idx < order.size() && std::abs(f[order[idx]]) == value)
            ++idx;
    }
    return best;
}

double weak_lp_norm(const SampledField& f, const WeightField& w, double p)
{
    return weak_lp_norm(f, &w, p);
}

SampledField inner_ball_norm(const SampledField& f, const WeightField& w, double p, double t, Exec exec)
{
    require_same_grid(f.grid, w.grid(), "inner_ball_norm");
    require_finite(f, "inner_ball_norm");
    if (!(p > 0.0) || std::isinf(p))
        throw ParameterError("inner exponent must be finite and positive");
    if (!(t >= f.grid.spacing * (1.0 - 1e-12)))
        throw ParameterError("ball radius t must be at least the grid spacing");
    const auto stencil = BallStencil::make(f.grid, t);
    std::vector<double> powered(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double a = std::abs(f[k]);
        powered[k] = a == 0.0 ? 0.0 : std::pow(a, p) * w[k];
    }
    SampledField out = SampledField::zeros(f.grid);
    parallel_for(f.size(), exec, [&](std::size_t x) {
        double num = 0.0;
        double den = 0.0;
        stencil.for_each(f.grid, x, [&](std::size_t y) {
            num += powered[y];
            den += w[y];
        });
        out[x] = std::pow(num / den, 1.0 / p);
    });
    return out;
}

double amalgam_norm(const SampledField& f, const SpaceParams& params, Exec exec)
{
    params.validate(f.grid);
    const SampledField inner = inner_ball_norm(f, params.w, params.p, params.t, exec);
    return lp_norm(inner, params.v, params.q);
}

double weak_amalgam_norm(const SampledField& f, const SpaceParams& params, Exec exec)
{
    params.validate(f.grid);
    require_finite(f, "weak_amalgam_norm");
    const Grid& grid = f.grid;
    const auto stencil = BallStencil::make(grid, params.t);
    const std::size_t n = f.size();
    const auto& w = params.w;
    const auto& v = params.v;
    const double p = params.p;
    const double q = params.q;
    const bool sup_outer = std::isinf(q);

    std::vector<double> ball_weight(n);
    parallel_for(n, exec, [&](std::size_t x) {
        double den = 0.0;
        stencil.for_each(grid, x, [&](std::size_t y) { den += w[y]; });
        ball_weight[x] = den;
    });

    std::vector<double> level_weight(n, 0.0);
    BlockedSum outer(n);
    const auto order = order_by_magnitude(f);
    const double cell = grid.cell_volume();
    double best = 0.0;
    std::size_t next = 0;
    for (std::size_t idx = 0; idx < order.size();) {
        const double value = std::abs(f[order[idx]]);
        if (value == 0.0)
            break;
        const double lambda = lambda_shrink * value;
        while (next < order.size() && std::abs(f[order[next]]) > lambda) {
            const std::size_t y = order[next];
            const double wy = w[y];
            stencil.for_each(grid, y, [&](std::size_t x) {
                level_weight[x] += wy;
                const double ratio = level_weight[x] / ball_weight[x];
                outer.set(x, sup_outer ? std::pow(ratio, 1.0 / p) : std::pow(ratio, q / p) * v[x]);
            });
            ++next;
        }
        const double norm = sup_outer ? outer.max() : std::pow(outer.sum() * cell, 1.0 / q);
        best = std::max(best, lambda * norm);
        while (idx < order.size() && std::abs(f[order[idx]]) == value)
            ++idx;
    }
    return best;
}

DualParams dual_params(const SpaceParams& params)
{
    if (!(params.p > 1.0) || std::isinf(params.p))
        throw ParameterError("dual space needs 1 < p < infinity");
    if (!(params.q >= 1.0))
        throw ParameterError("dual space needs q >= 1");
    DualParams d;
    d.p_dual = conjugate_exponent(params.p);
    d.q_dual = conjugate_exponent(params.q);
    d.inner_dual = dual_weight(params.w, params.p);
    if (std::isinf(d.q_dual) || std::isinf(params.q))
        d.outer_dual = unit_weight(params.v.grid());
    else
        d.outer_dual = dual_weight(params.v, params.q);
    return d;
}

double holder_defect(const SampledField& f, const SampledField& g, const SpaceParams& params, Exec exec)
{
    require_same_grid(f.grid, g.grid, "holder_defect");
    const DualParams dual = dual_params(params);
    const double a = amalgam_norm(f, params, exec);
    const double b = amalgam_norm(g, dual.as_space(params.t), exec);
    return a * b - integrate(abs(multiply(f, g)));
}

}  // namespace amalgam
