#include "amalgam/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "amalgam/rng.hpp"

namespace amalgam {

namespace {

std::string format_number(double x)
{
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

std::vector<double> parse_numbers(std::string_view text, std::string_view what)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
        while (!item.empty() && item.front() == ' ')
            item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ')
            item.remove_suffix(1);
        if (item.empty())
            throw ParameterError("empty parameter in '" + std::string(what) + "'");
        double value = 0.0;
        const std::string owned(item);
        try {
            std::size_t used = 0;
            value = std::stod(owned, &used);
            if (used != owned.size())
                throw std::invalid_argument(owned);
        } catch (const std::exception&) {
            throw ParameterError("not a number: '" + owned + "' in '" + std::string(what) + "'");
        }
        out.push_back(value);
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

double radius(const Point& x, int dim)
{
    return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

bool inside_window(const Point& x, const Grid& grid)
{
    const double half = 0.5 * grid.half_width;
    if (std::abs(x[0]) > half)
        return false;
    return grid.dim == 1 || std::abs(x[1]) <= half;
}

// C-infinity bump exp(1 - 1/(1 - s^2)) on s < 1, value 1 at s = 0.
double smooth_bump(double s)
{
    if (s >= 1.0)
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

struct GaussianTerm {
    Point center{};
    double sigma = 1.0;
    double amplitude = 1.0;
};

std::vector<GaussianTerm> random_terms(std::uint64_t seed, const Grid& grid)
{
    Rng rng(seed);
    const double L = grid.half_width;
    const auto count = 4 + static_cast<int>(rng.below(13));  // 4..16 bumps
    std::vector<GaussianTerm> terms(static_cast<std::size_t>(count));
    for (auto& term : terms) {
        term.center[0] = rng.uniform(-0.25 * L, 0.25 * L);
        term.center[1] = grid.dim == 2 ? rng.uniform(-0.25 * L, 0.25 * L) : 0.0;
        term.sigma = rng.uniform(L / 40.0, L / 10.0);
        term.amplitude = rng.uniform(-1.0, 1.0);
    }
    return terms;
}

void check_window(const Grid& grid, double lo, double hi, const char* what)
{
    const double half = 0.5 * grid.half_width;
    if (lo < -half || hi > half)
        throw ParameterError(std::string(what) + " must lie inside [-L/2, L/2]");
}

}  // namespace

double Grid::unit_ball_volume() const
{
    return dim == 1 ? 2.0 : std::numbers::pi;
}

Grid make_grid(int dim, double half_width, int points_per_axis)
{
    if (dim != 1 && dim != 2)
        throw ParameterError("grid dimension must be 1 or 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw ParameterError("grid half-width must be positive");
    if (points_per_axis < 8 || points_per_axis % 2 != 0)
        throw ParameterError("points per axis must be even and at least 8");
    Grid g;
    g.dim = dim;
    g.half_width = half_width;
    g.points_per_axis = points_per_axis;
    g.spacing = 2.0 * half_width / points_per_axis;
    return g;
}

SampledField SampledField::zeros(const Grid& grid)
{
    return SampledField{grid, std::vector<double>(grid.size(), 0.0), std::nullopt};
}

SampledField SampledField::constant(const Grid& grid, double c)
{
    return SampledField{grid, std::vector<double>(grid.size(), c), std::nullopt};
}

WeightField make_weight_field(SampledField field, std::optional<std::string> closed_form)
{
    for (double x : field.values)
        if (!(x > 0.0) || !std::isfinite(x))
            throw ParameterError("weight samples must be positive and finite");
    field.support_hint.reset();
    return WeightField{std::move(field), std::move(closed_form)};
}

WeightField unit_weight(const Grid& grid)
{
    return WeightField{SampledField::constant(grid, 1.0), std::string("1")};
}

void require_same_grid(const Grid& a, const Grid& b, const char* where)
{
    if (!(a == b))
        throw ParameterError(std::string(where) + ": fields live on different grids");
}

SampledField add(const SampledField& a, const SampledField& b)
{
    require_same_grid(a.grid, b.grid, "add");
    SampledField out = SampledField::zeros(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k)
        out[k] = a[k] + b[k];
    return out;
}

SampledField scale(const SampledField& a, double c)
{
    SampledField out = a;
    for (double& x : out.values)
        x *= c;
    return out;
}

SampledField abs(const SampledField& a)
{
    SampledField out = a;
    for (double& x : out.values)
        x = std::abs(x);
    return out;
}

SampledField multiply(const SampledField& a, const SampledField& b)
{
    require_same_grid(a.grid, b.grid, "multiply");
    SampledField out = SampledField::zeros(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k)
        out[k] = a[k] * b[k];
    return out;
}

// -----------------------------------------------------------------------------

std::string FunctionSpec::to_string() const
{
    std::string name;
    switch (kind) {
    case Kind::indicator: name = "indicator"; break;
    case Kind::gaussian: name = "gaussian"; break;
    case Kind::power: name = "power"; break;
    case Kind::bump: name = "bump"; break;
    case Kind::oscillatory: name = "oscillatory"; break;
    case Kind::random_smooth: return "random_smooth:" + std::to_string(seed.value_or(0));
    }
    std::string out = name + ":";
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        if (i)
            out += ",";
        out += format_number(parameters[i]);
    }
    return out;
}

FunctionSpec parse_function_spec(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ParameterError("function spec needs 'kind:parameters': '" + std::string(text) + "'");
    const auto kind = text.substr(0, colon);
    const auto args = text.substr(colon + 1);
    FunctionSpec spec;
    if (kind == "random_smooth") {
        spec.kind = FunctionSpec::Kind::random_smooth;
        std::uint64_t seed = 0;
        const auto res = std::from_chars(args.data(), args.data() + args.size(), seed);
        if (res.ec != std::errc{} || res.ptr != args.data() + args.size())
            throw ParameterError("random_smooth needs an integer seed: '" + std::string(text) + "'");
        spec.seed = seed;
        return spec;
    }
    if (kind == "indicator")
        spec.kind = FunctionSpec::Kind::indicator;
    else if (kind == "gaussian")
        spec.kind = FunctionSpec::Kind::gaussian;
    else if (kind == "power")
        spec.kind = FunctionSpec::Kind::power;
    else if (kind == "bump")
        spec.kind = FunctionSpec::Kind::bump;
    else if (kind == "oscillatory")
        spec.kind = FunctionSpec::Kind::oscillatory;
    else
        throw ParameterError("unknown function kind '" + std::string(kind) + "'");
    spec.parameters = parse_numbers(args, text);
    return spec;
}

SampledField sample(const FunctionSpec& spec, const Grid& grid)
{
    using Kind = FunctionSpec::Kind;
    const int dim = grid.dim;
    const auto& par = spec.parameters;
    const double half = 0.5 * grid.half_width;
    SampledField out = SampledField::zeros(grid);
    Box window{{-half, dim == 2 ? -half : 0.0}, {half, dim == 2 ? half : 0.0}};
    out.support_hint = window;

    auto fill = [&](auto&& fn) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const Point x = grid.point(k);
            out[k] = inside_window(x, grid) ? fn(x) : 0.0;
        }
    };

    switch (spec.kind) {
    case Kind::indicator: {
        const std::size_t need = dim == 1 ? 2 : 4;
        if (par.size() != need)
            throw ParameterError("indicator needs " + std::to_string(need) + " endpoints in dim " + std::to_string(dim));
        if (!(par[0] < par[1]) || (dim == 2 && !(par[2] < par[3])))
            throw ParameterError("indicator endpoints must be increasing");
        check_window(grid, par[0], par[1], "indicator");
        if (dim == 2)
            check_window(grid, par[2], par[3], "indicator");
        out.support_hint = Box{{par[0], dim == 2 ? par[2] : 0.0}, {par[1], dim == 2 ? par[3] : 0.0}};
        fill([&](const Point& x) {
            const bool in0 = par[0] < x[0] && x[0] < par[1];
            const bool in1 = dim == 1 || (par[2] < x[1] && x[1] < par[3]);
            return in0 && in1 ? 1.0 : 0.0;
        });
        break;
    }
    case Kind::gaussian: {
        if (par.empty() || par.size() > static_cast<std::size_t>(1 + dim))
            throw ParameterError("gaussian needs sigma[,center...]");
        const double sigma = par[0];
        if (!(sigma > 0.0))
            throw ParameterError("gaussian sigma must be positive");
        const Point c{par.size() > 1 ? par[1] : 0.0, par.size() > 2 ? par[2] : 0.0};
        fill([&](const Point& x) {
            const double r2 = detail::sq(x[0] - c[0]) + (dim == 2 ? detail::sq(x[1] - c[1]) : 0.0);
            return std::exp(-r2 / (2.0 * sigma * sigma));
        });
        break;
    }
    case Kind::power: {
        if (par.size() != 1)
            throw ParameterError("power needs one exponent");
        const double a = par[0];
        fill([&](const Point& x) { return std::pow(radius(x, dim), a); });
        break;
    }
    case Kind::bump: {
        if (par.size() != static_cast<std::size_t>(dim + 1))
            throw ParameterError("bump needs center coordinates and a width");
        const double width = par[static_cast<std::size_t>(dim)];
        if (!(width > 0.0))
            throw ParameterError("bump width must be positive");
        const Point c{par[0], dim == 2 ? par[1] : 0.0};
        check_window(grid, c[0] - width, c[0] + width, "bump");
        if (dim == 2)
            check_window(grid, c[1] - width, c[1] + width, "bump");
        fill([&](const Point& x) {
            const Point d{x[0] - c[0], x[1] - c[1]};
            return smooth_bump(radius(d, dim) / width);
        });
        break;
    }
    case Kind::oscillatory: {
        if (par.size() != 1)
            throw ParameterError("oscillatory needs one frequency");
        const double freq = par[0];
        fill([&](const Point& x) { return std::cos(freq * x[0]) * smooth_bump(radius(x, dim) / half); });
        break;
    }
    case Kind::random_smooth: {
        if (!spec.seed)
            throw ParameterError("random_smooth needs a seed");
        const auto terms = random_terms(*spec.seed, grid);
        fill([&](const Point& x) {
            double s = 0.0;
            for (const auto& term : terms) {
                const double r2 =
                    detail::sq(x[0] - term.center[0]) + (dim == 2 ? detail::sq(x[1] - term.center[1]) : 0.0);
                s += term.amplitude * std::exp(-r2 / (2.0 * term.sigma * term.sigma));
            }
            return s;
        });
        break;
    }
    }
    return out;
}

// -----------------------------------------------------------------------------

RadiusLadder RadiusLadder::dyadic(const Grid& grid)
{
    RadiusLadder ladder;
    for (double r = grid.spacing; r <= 2.0 * grid.half_width * (1.0 + 1e-12); r *= 2.0)
        ladder.radii.push_back(r);
    return ladder;
}

RadiusLadder RadiusLadder::from(const Grid& grid, std::vector<double> radii)
{
    if (radii.empty())
        throw ParameterError("radius ladder must not be empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= grid.spacing * (1.0 - 1e-12)) || radii[i] > 2.0 * grid.half_width * (1.0 + 1e-12))
            throw ParameterError("ladder radii must lie in [h, 2L]");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw ParameterError("ladder radii must be strictly increasing");
    }
    return RadiusLadder{std::move(radii)};
}

// -----------------------------------------------------------------------------

double integrate(const SampledField& f, const WeightField* weight)
{
    double s = 0.0;
    if (weight) {
        require_same_grid(f.grid, weight->grid(), "integrate");
        for (std::size_t k = 0; k < f.size(); ++k)
            s += f[k] * (*weight)[k];
    } else {
        for (double x : f.values)
            s += x;
    }
    return s * f.grid.cell_volume();
}

double integrate(const SampledField& f, const WeightField& weight)
{
    return integrate(f, &weight);
}

namespace {

void check_ball(const Grid& grid, Point center, double r)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw ParameterError("ball radius must be positive");
    const double L = grid.half_width;
    if (std::abs(center[0]) > L || (grid.dim == 2 && std::abs(center[1]) > L))
        throw ParameterError("ball center must lie inside the cube");
}

}  // namespace

double ball_average(const SampledField& f, Point center, double r, const WeightField& weight)
{
    require_same_grid(f.grid, weight.grid(), "ball_average");
    check_ball(f.grid, center, r);
    double num = 0.0;
    double den = 0.0;
    std::size_t count = 0;
    for_each_in_ball(f.grid, center, r, [&](std::size_t k) {
        num += f[k] * weight[k];
        den += weight[k];
        ++count;
    });
    if (count == 0)
        throw DegenerateBallError("ball contains no grid sample");
    return num / den;
}

double ball_measure(const WeightField& w, Point center, double r)
{
    check_ball(w.grid(), center, r);
    double s = 0.0;
    std::size_t count = 0;
    for_each_in_ball(w.grid(), center, r, [&](std::size_t k) {
        s += w[k];
        ++count;
    });
    if (count == 0)
        throw DegenerateBallError("ball contains no grid sample");
    return s * w.grid().cell_volume();
}

std::size_t ball_count(const Grid& grid, Point center, double r)
{
    std::size_t count = 0;
    for_each_in_ball(grid, center, r, [&](std::size_t) { ++count; });
    return count;
}

BallStencil BallStencil::make(const Grid& grid, double r, bool closed)
{
    BallStencil s;
    s.dim = grid.dim;
    const double h = grid.spacing;
    const double r2 = r * r;
    s.reach = static_cast<int>(r / h) + 1;
    auto inside = [&](double d2) { return closed ? d2 <= r2 : d2 < r2; };
    if (grid.dim == 1) {
        for (int di = -s.reach; di <= s.reach; ++di)
            if (inside(detail::sq(di * h)))
                s.offsets.push_back({di, 0});
        return s;
    }
    for (int dj = -s.reach; dj <= s.reach; ++dj) {
        const double dy2 = detail::sq(dj * h);
        for (int di = -s.reach; di <= s.reach; ++di)
            if (inside(detail::sq(di * h) + dy2))
                s.offsets.push_back({di, dj});
    }
    return s;
}

}  // namespace amalgam
