#include "amalgam/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "amalgam/operators.hpp"
#include "amalgam/rng.hpp"

namespace amalgam {

namespace {

double parse_real(std::string_view text, std::string_view context)
{
    const std::string owned(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(owned, &used);
        if (used == owned.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ParameterError("not a number: '" + owned + "' in weight spec '" + std::string(context) + "'");
}

struct BallSums {
    std::size_t count = 0;
    double first = 0.0;
    double second = 0.0;
    double max_inverse = 0.0;
};

template <class F, class G>
BallSums ball_sums(const WeightField& w, const Ball& ball, F&& first, G&& second)
{
    if (!(ball.radius > 0.0))
        throw ParameterError("ball radius must be positive");
    BallSums s;
    for_each_in_ball(w.grid(), ball.center, ball.radius, [&](std::size_t k) {
        s.first += first(w[k]);
        s.second += second(w[k]);
        s.max_inverse = std::max(s.max_inverse, 1.0 / w[k]);
        ++s.count;
    });
    if (s.count == 0)
        throw DegenerateBallError("ball contains no grid sample");
    return s;
}

ApReport fold_max(const std::vector<double>& values, const BallFamily& family)
{
    ApReport report;
    report.family_size = family.balls.size();
    report.constant = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > report.constant) {
            report.constant = values[i];
            report.argmax = family.balls[i];
        }
    }
    return report;
}

void require_family(const BallFamily& family)
{
    if (family.balls.empty())
        throw ParameterError("ball family must not be empty");
}

}  // namespace

double conjugate_exponent(double p)
{
    if (p == 1.0)
        return std::numeric_limits<double>::infinity();
    if (std::isinf(p))
        return 1.0;
    if (!(p > 1.0))
        throw ParameterError("conjugate exponent needs p >= 1");
    return p / (p - 1.0);
}

WeightField make_weight(std::string_view spec, const Grid& grid)
{
    const std::string text(spec);
    const auto colon = spec.find(':');
    const auto kind = colon == std::string_view::npos ? std::string_view{} : spec.substr(0, colon);
    const auto arg = colon == std::string_view::npos ? spec : spec.substr(colon + 1);

    SampledField field = SampledField::zeros(grid);
    auto fill = [&](auto&& fn) {
        for (std::size_t k = 0; k < grid.size(); ++k)
            field[k] = fn(grid.point(k));
    };
    auto norm = [&](const Point& x) { return grid.dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]); };

    if (kind.empty() || kind == "const") {
        const double c = parse_real(arg, spec);
        if (!(c > 0.0))
            throw ParameterError("constant weight must be positive");
        fill([&](const Point&) { return c; });
    } else if (kind == "power") {
        const double a = parse_real(arg, spec);
        fill([&](const Point& x) { return std::pow(norm(x), a); });
    } else if (kind == "shifted_power") {
        const double a = parse_real(arg, spec);
        fill([&](const Point& x) { return std::pow(1.0 + norm(x), a); });
    } else if (kind == "exp") {
        const double a = parse_real(arg, spec);
        fill([&](const Point& x) { return std::exp(a * x[0]); });
    } else if (kind == "random") {
        const auto seed = static_cast<std::uint64_t>(parse_real(arg, spec));
        // Same bump generator as random_smooth, without the support window.
        Rng rng(seed ^ 0x5bd1e995ull);
        const double L = grid.half_width;
        const int count = 4 + static_cast<int>(rng.below(13));
        std::vector<std::array<double, 4>> terms(static_cast<std::size_t>(count));
        for (auto& t : terms)
            t = {rng.uniform(-L, L), grid.dim == 2 ? rng.uniform(-L, L) : 0.0, rng.uniform(L / 20.0, L / 4.0),
                 rng.uniform(-1.0, 1.0)};
        fill([&](const Point& x) {
            double s = 0.0;
            for (const auto& t : terms) {
                const double r2 = detail::sq(x[0] - t[0]) + (grid.dim == 2 ? detail::sq(x[1] - t[1]) : 0.0);
                s += t[3] * std::exp(-r2 / (2.0 * t[2] * t[2]));
            }
            return std::exp(0.5 * s);
        });
    } else {
        throw ParameterError("unknown weight kind in '" + text + "'");
    }
    return make_weight_field(std::move(field), text);
}

BallFamily BallFamily::grid_centered(const Grid& grid, int stride, const RadiusLadder& ladder)
{
    if (stride < 1)
        throw ParameterError("ball family stride must be positive");
    if (ladder.radii.empty())
        throw ParameterError("ball family ladder must not be empty");
    std::vector<Point> centers;
    const int n = grid.points_per_axis;
    const int start = stride / 2;
    if (grid.dim == 1) {
        for (int i = start; i < n; i += stride)
            centers.push_back({grid.coord(i), 0.0});
    } else {
        for (int j = start; j < n; j += stride)
            for (int i = start; i < n; i += stride)
                centers.push_back({grid.coord(i), grid.coord(j)});
    }
    return around(centers, ladder);
}

BallFamily BallFamily::around(const std::vector<Point>& centers, const RadiusLadder& ladder)
{
    BallFamily family;
    for (const auto& c : centers)
        for (double r : ladder.radii)
            family.balls.push_back({c, r});
    return family;
}

std::string ApReport::to_json() const
{
    std::ostringstream os;
    os.precision(17);
    os << "{\"constant\": " << constant << ", \"center\": [" << argmax.center[0] << ", " << argmax.center[1]
       << "], \"radius\": " << argmax.radius << ", \"family_size\": " << family_size << "}";
    return os.str();
}

double ap_quantity(const WeightField& w, const Ball& ball, double p)
{
    if (!(p > 1.0) || std::isinf(p))
        throw ParameterError("A_p quantity needs 1 < p < infinity");
    const double e = 1.0 / (1.0 - p);
    const auto s = ball_sums(w, ball, [](double x) { return x; }, [e](double x) { return std::pow(x, e); });
    const double n = static_cast<double>(s.count);
    return (s.first / n) * std::pow(s.second / n, p - 1.0);
}

ApReport ap_constant(const WeightField& w, double p, const BallFamily& family, Exec exec)
{
    require_family(family);
    std::vector<double> values(family.balls.size());
    parallel_for(values.size(), exec, [&](std::size_t i) { values[i] = ap_quantity(w, family.balls[i], p); });
    return fold_max(values, family);
}

double a1_constant(const WeightField& w, const RadiusLadder& ladder, Exec exec)
{
    if (ladder.radii.empty())
        throw ParameterError("A_1 ladder must not be empty");
    const SampledField m = maximal_centered(w.field, ladder, exec);
    double best = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k)
        best = std::max(best, m[k] / w[k]);
    return best;
}

double apq_quantity(const WeightField& w, const Ball& ball, double p, double q)
{
    if (!(p >= 1.0) || std::isinf(p) || !(q > 1.0) || std::isinf(q))
        throw ParameterError("A_{p,q} quantity needs p >= 1 and 1 < q < infinity");
    if (p == 1.0) {
        const auto s = ball_sums(w, ball, [q](double x) { return std::pow(x, q); }, [](double) { return 0.0; });
        return std::pow(s.first / static_cast<double>(s.count), 1.0 / q) * s.max_inverse;
    }
    const double pp = conjugate_exponent(p);
    const auto s = ball_sums(
        w, ball, [q](double x) { return std::pow(x, q); }, [pp](double x) { return std::pow(x, -pp); });
    const double n = static_cast<double>(s.count);
    return std::pow(s.first / n, 1.0 / q) * std::pow(s.second / n, 1.0 / pp);
}

ApReport apq_constant(const WeightField& w, double p, double q, const BallFamily& family, Exec exec)
{
    require_family(family);
    std::vector<double> values(family.balls.size());
    parallel_for(values.size(), exec, [&](std::size_t i) { values[i] = apq_quantity(w, family.balls[i], p, q); });
    return fold_max(values, family);
}

WeightField pow_weight(const WeightField& w, double e)
{
    SampledField f = w.field;
    for (double& x : f.values)
        x = std::pow(x, e);
    std::optional<std::string> tag;
    if (w.closed_form) {
        std::ostringstream os;
        os.precision(17);
        os << "(" << *w.closed_form << ")^" << e;
        tag = os.str();
    }
    return make_weight_field(std::move(f), tag);
}

WeightField scale_weight(const WeightField& w, double c)
{
    if (!(c > 0.0))
        throw ParameterError("weight scale must be positive");
    SampledField f = scale(w.field, c);
    return make_weight_field(std::move(f), std::nullopt);
}

WeightField dual_weight(const WeightField& w, double p)
{
    if (!(p > 1.0) || std::isinf(p))
        throw ParameterError("dual weight needs 1 < p < infinity");
    return pow_weight(w, 1.0 - conjugate_exponent(p));
}

double doubling_constant(const WeightField& w, const BallFamily& family)
{
    const Grid& g = w.grid();
    const double L = g.half_width;
    double best = 0.0;
    std::size_t used = 0;
    for (const auto& ball : family.balls) {
        const double reach = 2.0 * ball.radius;
        if (std::abs(ball.center[0]) + reach > L || (g.dim == 2 && std::abs(ball.center[1]) + reach > L))
            continue;
        const double small = ball_measure(w, ball.center, ball.radius);
        const double big = ball_measure(w, ball.center, reach);
        best = std::max(best, big / small);
        ++used;
    }
    if (used == 0)
        throw ParameterError("no ball of the family has its double inside the cube");
    return best;
}

DensityReport density_check(const WeightField& w, const Ball& ball, const std::vector<double>& fractions)
{
    if (fractions.empty())
        throw ParameterError("density check needs at least one fraction");
    const Grid& g = w.grid();
    const double whole_w = ball_measure(w, ball.center, ball.radius);
    const double whole_n = static_cast<double>(ball_count(g, ball.center, ball.radius));
    DensityReport report;
    for (double s : fractions) {
        if (!(s > 0.0 && s <= 1.0))
            throw ParameterError("sub-radius fractions must lie in (0, 1]");
        const double r = s * ball.radius;
        const auto n = ball_count(g, ball.center, r);
        if (n == 0)
            throw DegenerateBallError("sub-ball contains no grid sample");
        report.pairs.push_back({static_cast<double>(n) / whole_n, ball_measure(w, ball.center, r) / whole_w});
    }
    // Least squares on the log-log pairs.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(report.pairs.size());
    for (const auto& pr : report.pairs) {
        const double x = std::log(pr.measure_ratio);
        const double y = std::log(pr.weight_ratio);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) {
        report.fitted_delta = 1.0;
        report.fitted_c = 1.0;
        return report;
    }
    report.fitted_delta = (m * sxy - sx * sy) / denom;
    report.fitted_c = std::exp((sy - report.fitted_delta * sx) / m);
    return report;
}

}  // namespace amalgam
