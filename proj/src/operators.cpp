#include "amalgam/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fftw3.h>

#include "amalgam/rng.hpp"

namespace amalgam {

namespace {

constexpr double pi = std::numbers::pi;

double bump(double s)
{
    if (s >= 1.0)
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double norm(const Point& d, int dim)
{
    return dim == 1 ? std::abs(d[0]) : std::hypot(d[0], d[1]);
}

std::vector<std::size_t> support_of(const SampledField& f)
{
    std::vector<std::size_t> s;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f[k] != 0.0)
            s.push_back(k);
    return s;
}

// Values of a translation-invariant kernel on every index difference
// (di, dj) in (-N, N)^dim, stored at (di + N - 1) + (dj + N - 1)(2N - 1).
class OffsetTable {
public:
    template <class Fn>
    OffsetTable(const Grid& grid, Fn&& fn) : grid_(grid), width_(2 * grid.points_per_axis - 1)
    {
        const int n = grid.points_per_axis;
        const double h = grid.spacing;
        const int rows = grid.dim == 1 ? 1 : width_;
        values_.resize(static_cast<std::size_t>(width_) * static_cast<std::size_t>(rows));
        for (int r = 0; r < rows; ++r) {
            const int dj = grid.dim == 1 ? 0 : r - (n - 1);
            for (int c = 0; c < width_; ++c) {
                const int di = c - (n - 1);
                values_[static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c)] =
                    fn(di, dj, Point{di * h, dj * h});
            }
        }
    }

    // Kernel at x_a - x_b.
    double between(std::size_t a, std::size_t b) const
    {
        const int n = grid_.points_per_axis;
        const int di = grid_.axis_index(a, 0) - grid_.axis_index(b, 0);
        if (grid_.dim == 1)
            return values_[static_cast<std::size_t>(di + n - 1)];
        const int dj = grid_.axis_index(a, 1) - grid_.axis_index(b, 1);
        return values_[static_cast<std::size_t>(dj + n - 1) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(di + n - 1)];
    }

private:
    Grid grid_;
    int width_;
    std::vector<double> values_;
};

// out[x] = sum over supp(f) (index order) of table(x - y) f(y).
SampledField convolve(const SampledField& f, const OffsetTable& table, Exec exec)
{
    const auto supp = support_of(f);
    SampledField out = SampledField::zeros(f.grid);
    parallel_for(f.size(), exec, [&](std::size_t x) {
        double s = 0.0;
        for (std::size_t y : supp)
            s += table.between(x, y) * f[y];
        out[x] = s;
    });
    return out;
}

void require_finite(const SampledField& f, const char* where)
{
    for (double x : f.values)
        if (!std::isfinite(x))
            throw NumericError(std::string(where) + ": non-finite sample");
}

void require_eps(const Grid& grid, double eps)
{
    if (!(eps >= grid.spacing * (1.0 - 1e-12)))
        throw ParameterError("truncation radius eps must be at least the grid spacing");
}

double parse_number(std::string_view text, std::string_view context)
{
    const std::string owned(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(owned, &used);
        if (used == owned.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ParameterError("not a number: '" + owned + "' in '" + std::string(context) + "'");
}

void validate_levels(const Grid& grid, const ScaleLadder& levels, double top, const char* what)
{
    if (levels.levels.empty())
        throw ParameterError(std::string(what) + ": empty scale ladder");
    if (levels.levels.size() != levels.log_widths.size())
        throw ParameterError(std::string(what) + ": ladder widths do not match levels");
    for (std::size_t k = 0; k < levels.levels.size(); ++k) {
        const double t = levels.levels[k];
        if (!(t >= grid.spacing * (1.0 - 1e-12)) || t > top * (1.0 + 1e-12))
            throw ParameterError(std::string(what) + ": scale outside the admissible range");
        if (k > 0 && !(t > levels.levels[k - 1]))
            throw ParameterError(std::string(what) + ": scales must increase");
        if (!(levels.log_widths[k] > 0.0))
            throw ParameterError(std::string(what) + ": widths must be positive");
    }
}

}  // namespace

// -----------------------------------------------------------------------------
// Maximal functions

std::vector<double> ladder_averages(const SampledField& f, const RadiusLadder& ladder, Exec exec)
{
    require_finite(f, "maximal");
    const Grid& grid = f.grid;
    const auto& radii = ladder.radii;
    if (radii.empty())
        throw ParameterError("radius ladder must not be empty");
    if (!(radii.front() >= grid.spacing * (1.0 - 1e-12)))
        throw DegenerateBallError("smallest ladder radius is below the grid spacing");
    const std::size_t m = radii.size();

    // Offsets of the largest ball grouped by the first radius that contains them.
    const auto outer = BallStencil::make(grid, radii.back());
    const double h = grid.spacing;
    std::vector<std::pair<std::size_t, std::array<int, 2>>> shelled;
    shelled.reserve(outer.offsets.size());
    for (const auto& o : outer.offsets) {
        const double d2 = detail::sq(o[0] * h) + detail::sq(o[1] * h);
        std::size_t shell = 0;
        while (shell < m && !(d2 < radii[shell] * radii[shell]))
            ++shell;
        shelled.push_back({shell, o});
    }
    std::stable_sort(shelled.begin(), shelled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<double> magnitude(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        magnitude[k] = std::abs(f[k]);

    const int n = grid.points_per_axis;
    std::vector<double> out(f.size() * m);
    parallel_for(f.size(), exec, [&](std::size_t x) {
        const int ci = grid.axis_index(x, 0);
        const int cj = grid.dim == 1 ? 0 : grid.axis_index(x, 1);
        double sum = 0.0;
        std::size_t count = 0;
        std::size_t pos = 0;
        for (std::size_t level = 0; level < m; ++level) {
            for (; pos < shelled.size() && shelled[pos].first == level; ++pos) {
                const int i = ci + shelled[pos].second[0];
                const int j = cj + shelled[pos].second[1];
                if (i < 0 || i >= n || j < 0 || j >= n)
                    continue;
                sum += magnitude[grid.index(i, j)];
                ++count;
            }
            out[x * m + level] = sum / static_cast<double>(count);
        }
    });
    return out;
}

SampledField maximal_centered(const SampledField& f, const RadiusLadder& ladder, Exec exec)
{
    const auto avg = ladder_averages(f, ladder, exec);
    const std::size_t m = ladder.radii.size();
    SampledField out = SampledField::zeros(f.grid);
    for (std::size_t x = 0; x < f.size(); ++x)
        out[x] = *std::max_element(avg.begin() + static_cast<std::ptrdiff_t>(x * m),
                                   avg.begin() + static_cast<std::ptrdiff_t>((x + 1) * m));
    return out;
}

SampledField maximal_uncentered(const SampledField& f, const BallFamily& family, Exec exec)
{
    require_finite(f, "maximal_uncentered");
    if (family.balls.empty())
        throw ParameterError("ball family must not be empty");
    const Grid& grid = f.grid;
    std::vector<double> averages(family.balls.size(), 0.0);
    std::vector<char> nonempty(family.balls.size(), 0);
    parallel_for(family.balls.size(), exec, [&](std::size_t b) {
        const Ball& ball = family.balls[b];
        double sum = 0.0;
        std::size_t count = 0;
        for_each_in_ball(grid, ball.center, ball.radius, [&](std::size_t k) {
            sum += std::abs(f[k]);
            ++count;
        });
        if (count > 0) {
            averages[b] = sum / static_cast<double>(count);
            nonempty[b] = 1;
        }
    });
    std::vector<double> best(f.size(), -1.0);
    for (std::size_t b = 0; b < family.balls.size(); ++b) {
        if (!nonempty[b])
            continue;
        const double a = averages[b];
        for_each_in_ball(grid, family.balls[b].center, family.balls[b].radius,
                         [&](std::size_t k) { best[k] = std::max(best[k], a); });
    }
    SampledField out = SampledField::zeros(grid);
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (best[k] < 0.0)
            throw DegenerateBallError("a grid point lies in no ball of the family");
        out[k] = best[k];
    }
    return out;
}

SampledField hardy_op(const SampledField& f)
{
    require_finite(f, "hardy_op");
    const Grid& grid = f.grid;
    const std::size_t n = f.size();
    std::vector<double> radius(n);
    for (std::size_t k = 0; k < n; ++k)
        radius[k] = norm(grid.point(k), grid.dim);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radius[a] < radius[b]; });

    const double cell = grid.cell_volume();
    SampledField out = SampledField::zeros(grid);
    double acc = 0.0;
    for (std::size_t pos = 0; pos < n;) {
        std::size_t end = pos;
        const double r = radius[order[pos]];
        while (end < n && radius[order[end]] == r) {
            acc += std::abs(f[order[end]]);
            ++end;
        }
        const double value = acc * cell / std::pow(r, grid.dim);
        for (; pos < end; ++pos)
            out[order[pos]] = value;
    }
    return out;
}

// -----------------------------------------------------------------------------
// Singular integrals

double cz_kernel(CzKernel kernel, Point d)
{
    switch (kernel) {
    case CzKernel::hilbert:
        return 1.0 / (pi * d[0]);
    case CzKernel::riesz1:
    case CzKernel::riesz2: {
        const double r = std::hypot(d[0], d[1]);
        const double dj = kernel == CzKernel::riesz1 ? d[0] : d[1];
        return dj / (2.0 * pi * r * r * r);
    }
    }
    return 0.0;
}

SampledField cz_apply(const SampledField& f, CzKernel kernel, double eps, Exec exec)
{
    require_finite(f, "cz_apply");
    const Grid& grid = f.grid;
    require_eps(grid, eps);
    if ((kernel == CzKernel::hilbert) != (grid.dim == 1))
        throw ParameterError("the Hilbert kernel needs dim 1 and the Riesz kernels dim 2");
    const double cell = grid.cell_volume();
    const OffsetTable table(grid, [&](int, int, Point d) {
        return norm(d, grid.dim) > eps ? cz_kernel(kernel, d) * cell : 0.0;
    });
    return convolve(f, table, exec);
}

SphereFunction SphereFunction::from_samples(int dim, std::vector<double> samples, bool enforce_mean_zero)
{
    if (dim != 1 && dim != 2)
        throw ParameterError("sphere dimension must be 1 or 2");
    if (dim == 1 && samples.size() != 2)
        throw ParameterError("a sphere function in dim 1 has exactly two values");
    if (dim == 2 && samples.size() < 4)
        throw ParameterError("a sphere function in dim 2 needs at least 4 nodes");
    for (double s : samples)
        if (!std::isfinite(s))
            throw ParameterError("sphere function values must be finite");
    SphereFunction omega;
    omega.dim_ = dim;
    omega.samples_ = std::move(samples);
    omega.mean_zero_ = enforce_mean_zero;
    if (enforce_mean_zero) {
        const double m = omega.mean();
        for (double& s : omega.samples_)
            s -= m;
    }
    return omega;
}

double SphereFunction::mean() const
{
    double s = 0.0;
    for (double x : samples_)
        s += x;
    return s / static_cast<double>(samples_.size());
}

double SphereFunction::operator()(Point d) const
{
    if (dim_ == 1)
        return d[0] < 0.0 ? samples_[0] : samples_[1];
    const auto m = static_cast<long>(samples_.size());
    const double theta = std::atan2(d[1], d[0]);
    long node = std::lround(theta / (2.0 * pi / static_cast<double>(m)));
    node = ((node % m) + m) % m;
    return samples_[static_cast<std::size_t>(node)];
}

SphereFunction parse_sphere_spec(std::string_view spec, int dim, int nodes)
{
    const std::string text(spec);
    const auto colon = spec.find(':');
    const auto kind = spec.substr(0, colon);
    const auto arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    if (kind == "sgn") {
        if (dim != 1)
            throw ParameterError("sphere spec 'sgn' is for dim 1");
        return SphereFunction::from_samples(1, {-1.0, 1.0});
    }
    if (kind == "values") {
        std::vector<double> values;
        std::size_t start = 0;
        while (start <= arg.size()) {
            const auto comma = arg.find(',', start);
            const auto piece = arg.substr(start, comma == std::string_view::npos ? arg.size() - start : comma - start);
            values.push_back(parse_number(piece, spec));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        return SphereFunction::from_samples(dim, std::move(values));
    }
    if (kind == "cos" || kind == "sin") {
        const double k = arg.empty() ? 1.0 : parse_number(arg, spec);
        if (dim == 1) {
            // The circle reduces to the two points theta = pi and theta = 0.
            const double at_minus = kind == "cos" ? std::cos(k * pi) : std::sin(k * pi);
            const double at_plus = kind == "cos" ? 1.0 : 0.0;
            return SphereFunction::from_samples(1, {at_minus, at_plus});
        }
        if (nodes < 4)
            throw ParameterError("sphere node count must be at least 4");
        std::vector<double> values(static_cast<std::size_t>(nodes));
        for (int m = 0; m < nodes; ++m) {
            const double theta = 2.0 * pi * m / nodes;
            values[static_cast<std::size_t>(m)] = kind == "cos" ? std::cos(k * theta) : std::sin(k * theta);
        }
        return SphereFunction::from_samples(2, std::move(values));
    }
    throw ParameterError("unknown sphere spec '" + text + "'");
}

SampledField rough_singular(const SampledField& f, const SphereFunction& omega, double eps, Exec exec)
{
    require_finite(f, "rough_singular");
    const Grid& grid = f.grid;
    require_eps(grid, eps);
    if (omega.dim() != grid.dim)
        throw ParameterError("sphere function dimension does not match the grid");
    if (std::abs(omega.mean()) > 1e-12)
        throw ParameterError("sphere function must have mean zero");
    const double cell = grid.cell_volume();
    const OffsetTable table(grid, [&](int, int, Point d) {
        const double r = norm(d, grid.dim);
        return r > eps ? omega(d) / std::pow(r, grid.dim) * cell : 0.0;
    });
    return convolve(f, table, exec);
}

// -----------------------------------------------------------------------------
// Scale ladders and the Marcinkiewicz integral

ScaleLadder ScaleLadder::dyadic(double t_min, double t_max)
{
    return geometric(t_min, t_max, 1);
}

ScaleLadder ScaleLadder::geometric(double t_min, double t_max, int per_octave)
{
    if (!(t_min > 0.0) || !(t_max >= t_min) || per_octave < 1)
        throw ParameterError("scale ladder needs 0 < t_min <= t_max and per_octave >= 1");
    ScaleLadder s;
    const double width = std::log(2.0) / per_octave;
    for (int k = 0;; ++k) {
        const double t = t_min * std::exp2(static_cast<double>(k) / per_octave);
        if (t > t_max * (1.0 + 1e-12))
            break;
        s.levels.push_back(t);
        s.log_widths.push_back(width);
    }
    return s;
}

double ScaleLadder::lower_edge() const
{
    return levels.front() * std::exp(-0.5 * log_widths.front());
}

double ScaleLadder::upper_edge() const
{
    return levels.back() * std::exp(0.5 * log_widths.back());
}

SampledField marcinkiewicz(const SampledField& f, const SphereFunction& omega, const ScaleLadder& levels, Exec exec)
{
    require_finite(f, "marcinkiewicz");
    const Grid& grid = f.grid;
    validate_levels(grid, levels, 2.0 * grid.half_width, "marcinkiewicz");
    if (omega.dim() != grid.dim)
        throw ParameterError("sphere function dimension does not match the grid");
    const auto& t = levels.levels;
    const std::size_t m = t.size();
    const double cell = grid.cell_volume();

    // Kernel and the first level whose closed ball contains the offset.
    const OffsetTable kernel(grid, [&](int, int, Point d) {
        const double r = norm(d, grid.dim);
        return r > 0.0 ? omega(d) * std::pow(r, 1 - grid.dim) * cell : 0.0;
    });
    const OffsetTable shell(grid, [&](int, int, Point d) {
        const double r = norm(d, grid.dim);
        std::size_t k = 0;
        while (k < m && r > t[k])
            ++k;
        return static_cast<double>(k);
    });

    const auto supp = support_of(f);
    SampledField out = SampledField::zeros(grid);
    parallel_for(f.size(), exec, [&](std::size_t x) {
        std::vector<double> bucket(m + 1, 0.0);
        for (std::size_t y : supp) {
            const auto k = static_cast<std::size_t>(shell.between(x, y));
            bucket[k] += kernel.between(x, y) * f[y];
        }
        double F = 0.0;
        double total = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            F += bucket[k];
            total += F * F / (t[k] * t[k]) * levels.log_widths[k];
        }
        out[x] = std::sqrt(total);
    });
    return out;
}

// -----------------------------------------------------------------------------
// Riesz potential

double riesz_gamma(int dim, double alpha)
{
    const double n = dim;
    return std::pow(pi, n / 2.0) * std::exp2(alpha) * std::tgamma(alpha / 2.0) / std::tgamma((n - alpha) / 2.0);
}

double riesz_self_cell(const Grid& grid, double alpha)
{
    const double half = grid.spacing / 2.0;
    if (grid.dim == 1)
        return 2.0 * std::pow(half, alpha) / alpha;
    // Square split into 8 triangles; radial part integrated exactly, angular by Simpson.
    const int intervals = 2000;
    const double a = pi / 4.0;
    const double step = a / intervals;
    double s = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::pow(std::cos(i * step), -alpha);
    }
    s *= step / 3.0;
    return 8.0 / alpha * std::pow(half, alpha) * s;
}

SampledField riesz_potential(const SampledField& f, double alpha, Exec exec)
{
    require_finite(f, "riesz_potential");
    const Grid& grid = f.grid;
    if (!(alpha > 0.0 && alpha < grid.dim))
        throw ParameterError("Riesz potential order must lie in (0, n)");
    const double cell = grid.cell_volume();
    const double self = riesz_self_cell(grid, alpha);
    const double inv_gamma = 1.0 / riesz_gamma(grid.dim, alpha);
    const OffsetTable table(grid, [&](int di, int dj, Point d) {
        if (di == 0 && dj == 0)
            return self * inv_gamma;
        return std::pow(norm(d, grid.dim), alpha - grid.dim) * cell * inv_gamma;
    });
    return convolve(f, table, exec);
}

double riesz_potential_at(const SampledField& f, double alpha, double x)
{
    const Grid& grid = f.grid;
    if (grid.dim != 1)
        throw ParameterError("riesz_potential_at is implemented for dim 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("Riesz potential order must lie in (0, n)");
    require_finite(f, "riesz_potential_at");
    auto G = [&](double xi) {
        const double d = xi - x;
        return (d < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(d), alpha) / alpha;
    };
    const double h = grid.spacing;
    double s = 0.0;
    for (int i = 0; i < grid.points_per_axis; ++i) {
        if (f[static_cast<std::size_t>(i)] == 0.0)
            continue;
        const double lo = -grid.half_width + i * h;
        s += f[static_cast<std::size_t>(i)] * (G(lo + h) - G(lo));
    }
    return s / riesz_gamma(1, alpha);
}

// -----------------------------------------------------------------------------
// Bochner-Riesz

namespace {

class Spectrum {
public:
    explicit Spectrum(const SampledField& f) : grid_(f.grid), size_(f.size())
    {
        data_ = fftw_alloc_complex(size_);
        out_ = fftw_alloc_complex(size_);
        for (std::size_t k = 0; k < size_; ++k) {
            data_[k][0] = f[k];
            data_[k][1] = 0.0;
        }
        const int n = grid_.points_per_axis;
        fftw_plan forward = grid_.dim == 1 ? fftw_plan_dft_1d(n, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE)
                                           : fftw_plan_dft_2d(n, n, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(forward);
        fftw_destroy_plan(forward);
        backward_ = grid_.dim == 1 ? fftw_plan_dft_1d(n, out_, out_, FFTW_BACKWARD, FFTW_ESTIMATE)
                                   : fftw_plan_dft_2d(n, n, out_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    Spectrum(const Spectrum&) = delete;
    Spectrum& operator=(const Spectrum&) = delete;
    ~Spectrum()
    {
        fftw_destroy_plan(backward_);
        fftw_free(data_);
        fftw_free(out_);
    }

    double frequency(int k) const
    {
        const int n = grid_.points_per_axis;
        const int signed_k = k < n / 2 ? k : k - n;
        return pi * signed_k / grid_.half_width;
    }

    SampledField apply(double delta, double R)
    {
        const int n = grid_.points_per_axis;
        for (std::size_t k = 0; k < size_; ++k) {
            const double xi1 = frequency(grid_.axis_index(k, 0));
            const double xi2 = grid_.dim == 1 ? 0.0 : frequency(grid_.axis_index(k, 1));
            const double s = 1.0 - (xi1 * xi1 + xi2 * xi2) / (R * R);
            const double m = s > 0.0 ? std::pow(s, delta) : 0.0;
            out_[k][0] = data_[k][0] * m;
            out_[k][1] = data_[k][1] * m;
        }
        fftw_execute(backward_);
        SampledField r = SampledField::zeros(grid_);
        const double inv = 1.0 / static_cast<double>(size_);
        for (std::size_t k = 0; k < size_; ++k)
            r[k] = out_[k][0] * inv;
        (void)n;
        return r;
    }

private:
    Grid grid_;
    std::size_t size_;
    fftw_complex* data_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan backward_ = nullptr;
};

void require_multiplier(double delta, double R)
{
    if (!(delta > 0.0))
        throw ParameterError("Bochner-Riesz order delta must be positive");
    if (!(R > 0.0))
        throw ParameterError("Bochner-Riesz radius R must be positive");
}

}  // namespace

SampledField bochner_riesz(const SampledField& f, const MultiplierSpec& spec)
{
    require_finite(f, "bochner_riesz");
    require_multiplier(spec.delta, spec.R);
    Spectrum s(f);
    return s.apply(spec.delta, spec.R);
}

SampledField bochner_riesz_maximal(const SampledField& f, double delta, const std::vector<double>& radii)
{
    require_finite(f, "bochner_riesz_maximal");
    if (radii.empty())
        throw ParameterError("Bochner-Riesz R ladder must not be empty");
    for (double R : radii)
        require_multiplier(delta, R);
    Spectrum s(f);
    SampledField out = SampledField::zeros(f.grid);
    for (double R : radii) {
        const SampledField t = s.apply(delta, R);
        for (std::size_t k = 0; k < f.size(); ++k)
            out[k] = std::max(out[k], std::abs(t[k]));
    }
    return out;
}

// -----------------------------------------------------------------------------
// g-function

Profile laplacian_of_gaussian(int dim)
{
    if (dim != 1 && dim != 2)
        throw ParameterError("profile dimension must be 1 or 2");
    const double c = std::pow(2.0 * pi, -dim / 2.0);
    Profile p;
    p.name = "log";
    p.dim = dim;
    p.cutoff = 8.0;
    p.value = [dim, c](Point x) {
        const double r2 = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
        return c * (dim - r2) * std::exp(-0.5 * r2);
    };
    return p;
}

Profile gaussian_profile(int dim)
{
    if (dim != 1 && dim != 2)
        throw ParameterError("profile dimension must be 1 or 2");
    const double c = std::pow(2.0 * pi, -dim / 2.0);
    Profile p;
    p.name = "gaussian";
    p.dim = dim;
    p.cutoff = 8.0;
    p.value = [dim, c](Point x) {
        const double r2 = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
        return c * std::exp(-0.5 * r2);
    };
    return p;
}

double profile_relative_mean(const Profile& profile)
{
    const int n = profile.dim == 1 ? 16000 : 800;
    const double step = 2.0 * profile.cutoff / n;
    double s = 0.0;
    double a = 0.0;
    for (int j = 0; j < (profile.dim == 1 ? 1 : n); ++j) {
        const double y = profile.dim == 1 ? 0.0 : -profile.cutoff + (j + 0.5) * step;
        for (int i = 0; i < n; ++i) {
            const double v = profile.value({-profile.cutoff + (i + 0.5) * step, y});
            s += v;
            a += std::abs(v);
        }
    }
    if (a == 0.0)
        throw ParameterError("profile vanishes identically");
    return std::abs(s) / a;
}

SampledField g_function(const SampledField& f, const Profile& profile, const ScaleLadder& levels, Exec exec)
{
    require_finite(f, "g_function");
    const Grid& grid = f.grid;
    if (profile.dim != grid.dim || !profile.value)
        throw ParameterError("profile does not match the grid");
    if (profile_relative_mean(profile) > 1e-8)
        throw ParameterError("g-function profile must have mean zero");
    validate_levels(grid, levels, 2.0 * grid.half_width, "g_function");
    const double cell = grid.cell_volume();
    std::vector<double> sum(f.size(), 0.0);
    for (std::size_t k = 0; k < levels.levels.size(); ++k) {
        const double t = levels.levels[k];
        const double scale = cell / std::pow(t, grid.dim);
        const double reach = profile.cutoff * t;
        const OffsetTable table(grid, [&](int, int, Point d) {
            if (norm(d, grid.dim) > reach)
                return 0.0;
            return profile.value({d[0] / t, d[1] / t}) * scale;
        });
        const SampledField conv = convolve(f, table, exec);
        for (std::size_t x = 0; x < f.size(); ++x)
            sum[x] += conv[x] * conv[x] * levels.log_widths[k];
    }
    SampledField out = SampledField::zeros(grid);
    for (std::size_t x = 0; x < f.size(); ++x)
        out[x] = std::sqrt(sum[x]);
    return out;
}

// -----------------------------------------------------------------------------
// Intrinsic square function

namespace {

double reference_step(int dim)
{
    return dim == 1 ? 1.0 / 256.0 : 1.0 / 16.0;
}

}  // namespace

BumpDictionary BumpDictionary::from_atoms(int dim, double alpha, std::vector<Atom> atoms)
{
    if (dim != 1 && dim != 2)
        throw ParameterError("dictionary dimension must be 1 or 2");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ParameterError("Hoelder exponent alpha must lie in (0, 1]");
    if (atoms.empty())
        throw ParameterError("bump dictionary must not be empty");
    BumpDictionary d;
    d.dim_ = dim;
    d.alpha_ = alpha;
    d.atoms_ = std::move(atoms);
    for (std::size_t k = 0; k < d.atoms_.size(); ++k) {
        auto& atom = d.atoms_[k];
        if (!(atom.rho > 0.0) || norm(atom.a, dim) + atom.rho > 1.0 + 1e-12 ||
            norm(atom.b, dim) + atom.rho > 1.0 + 1e-12)
            throw ParameterError("dictionary atom is not supported in the unit ball");
        atom.scale = 1.0;
        const double semi = d.measured_seminorm(k);
        if (!(semi > 0.0))
            throw ParameterError("dictionary atom vanishes");
        atom.scale = 1.0 / semi;
    }
    return d;
}

BumpDictionary BumpDictionary::make(int dim, int size, double alpha, std::uint64_t seed)
{
    if (size < 1)
        throw ParameterError("dictionary size must be positive");
    Rng rng(seed);
    const double step = reference_step(dim);
    auto snap = [step](double x) { return std::round(x / step) * step; };
    std::vector<Atom> atoms;
    while (static_cast<int>(atoms.size()) < size) {
        Atom atom;
        atom.rho = snap(rng.uniform(0.25, 0.5));
        const double room = 1.0 - atom.rho;
        auto draw = [&] {
            Point c{};
            do {
                c = {snap(rng.uniform(-room, room)), dim == 2 ? snap(rng.uniform(-room, room)) : 0.0};
            } while (norm(c, dim) > room);
            return c;
        };
        atom.a = draw();
        atom.b = draw();
        if (norm({atom.a[0] - atom.b[0], atom.a[1] - atom.b[1]}, dim) < 0.1 * atom.rho)
            continue;
        atoms.push_back(atom);
    }
    return from_atoms(dim, alpha, std::move(atoms));
}

double BumpDictionary::value(std::size_t k, Point x) const
{
    const Atom& atom = atoms_[k];
    const double ra = norm({x[0] - atom.a[0], x[1] - atom.a[1]}, dim_) / atom.rho;
    const double rb = norm({x[0] - atom.b[0], x[1] - atom.b[1]}, dim_) / atom.rho;
    return atom.scale * (bump(ra) - bump(rb));
}

BumpDictionary BumpDictionary::prefix(std::size_t count) const
{
    if (count < 1 || count > atoms_.size())
        throw ParameterError("dictionary prefix size out of range");
    BumpDictionary d = *this;
    d.atoms_.resize(count);
    return d;
}

std::vector<Point> BumpDictionary::reference_points() const
{
    const double step = reference_step(dim_);
    const int m = static_cast<int>(std::lround(1.0 / step));
    std::vector<Point> pts;
    if (dim_ == 1) {
        for (int i = -m; i <= m; ++i)
            pts.push_back({i * step, 0.0});
    } else {
        for (int j = -m; j <= m; ++j)
            for (int i = -m; i <= m; ++i)
                pts.push_back({i * step, j * step});
    }
    return pts;
}

double BumpDictionary::measured_seminorm(std::size_t k) const
{
    const auto pts = reference_points();
    std::vector<double> v(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        v[i] = value(k, pts[i]);
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double diff = std::abs(v[i] - v[j]);
            if (diff == 0.0)
                continue;
            const double d = norm({pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]}, dim_);
            best = std::max(best, diff / (alpha_ == 1.0 ? d : std::pow(d, alpha_)));
        }
    return best;
}

ConeDiscretization ConeDiscretization::make(const Grid& grid, const ScaleLadder& levels)
{
    validate_levels(grid, levels, 0.5 * grid.half_width, "cone");
    ConeDiscretization c;
    c.levels = levels;
    for (double t : levels.levels)
        c.apertures.push_back(BallStencil::make(grid, t));
    return c;
}

ConeDiscretization ConeDiscretization::dyadic(const Grid& grid)
{
    return make(grid, ScaleLadder::dyadic(grid.spacing, 0.5 * grid.half_width));
}

SampledField intrinsic_envelope(const SampledField& f, const BumpDictionary& dict, double t, Exec exec)
{
    const Grid& grid = f.grid;
    if (dict.dim() != grid.dim)
        throw ParameterError("dictionary dimension does not match the grid");
    const auto ball = BallStencil::make(grid, t, true);
    const double scale = grid.cell_volume() / std::pow(t, grid.dim);
    const double h = grid.spacing;
    const std::size_t K = dict.size();
    const std::size_t m = ball.offsets.size();
    // phi_t(y - z) with z = y + offset.
    std::vector<double> kernel(K * m);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t o = 0; o < m; ++o)
            kernel[k * m + o] =
                dict.value(k, {-ball.offsets[o][0] * h / t, -ball.offsets[o][1] * h / t}) * scale;
    const int n = grid.points_per_axis;
    SampledField out = SampledField::zeros(grid);
    parallel_for(f.size(), exec, [&](std::size_t y) {
        const int ci = grid.axis_index(y, 0);
        const int cj = grid.dim == 1 ? 0 : grid.axis_index(y, 1);
        double best = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            double s = 0.0;
            for (std::size_t o = 0; o < m; ++o) {
                const int i = ci + ball.offsets[o][0];
                const int j = cj + ball.offsets[o][1];
                if (i < 0 || i >= n || j < 0 || j >= n)
                    continue;
                s += kernel[k * m + o] * f[grid.index(i, j)];
            }
            best = std::max(best, std::abs(s));
        }
        out[y] = best;
    });
    return out;
}

SampledField intrinsic_square(const SampledField& f, double alpha, const BumpDictionary& dict,
                              const ConeDiscretization& cone, Exec exec)
{
    require_finite(f, "intrinsic_square");
    const Grid& grid = f.grid;
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ParameterError("Hoelder exponent alpha must lie in (0, 1]");
    if (std::abs(dict.alpha() - alpha) > 1e-12)
        throw ParameterError("dictionary was normalized for a different alpha");
    if (cone.levels.levels.empty() || cone.apertures.size() != cone.levels.levels.size())
        throw ParameterError("cone discretization must not be empty");
    const double cell = grid.cell_volume();
    std::vector<double> total(f.size(), 0.0);
    for (std::size_t k = 0; k < cone.levels.levels.size(); ++k) {
        const double t = cone.levels.levels[k];
        const SampledField A = intrinsic_envelope(f, dict, t, exec);
        const double factor = cone.levels.log_widths[k] / std::pow(t, grid.dim) * cell;
        const auto& aperture = cone.apertures[k];
        std::vector<double> level(f.size());
        parallel_for(f.size(), exec, [&](std::size_t x) {
            double s = 0.0;
            aperture.for_each(grid, x, [&](std::size_t y) { s += A[y] * A[y]; });
            level[x] = s * factor;
        });
        for (std::size_t x = 0; x < f.size(); ++x)
            total[x] += level[x];
    }
    SampledField out = SampledField::zeros(grid);
    for (std::size_t x = 0; x < f.size(); ++x)
        out[x] = std::sqrt(total[x]);
    return out;
}

// -----------------------------------------------------------------------------
// Operator specs

bool OperatorSpec::sublinear_only() const
{
    switch (kind) {
    case Kind::identity:
    case Kind::cz:
    case Kind::rough:
    case Kind::riesz:
    case Kind::bochner_riesz:
        return false;
    default:
        return true;
    }
}

OperatorSpec parse_operator_spec(std::string_view text)
{
    OperatorSpec op;
    op.text = std::string(text);
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    // key=value pairs separated by commas.
    auto keyed = [&](auto&& on_pair) {
        std::size_t start = 0;
        while (start < arg.size()) {
            const auto comma = arg.find(',', start);
            const auto piece = arg.substr(start, comma == std::string_view::npos ? arg.size() - start : comma - start);
            const auto eq = piece.find('=');
            if (eq == std::string_view::npos)
                throw ParameterError("expected key=value in operator spec '" + op.text + "'");
            on_pair(piece.substr(0, eq), piece.substr(eq + 1));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
    };
    auto unknown = [&](std::string_view key) {
        throw ParameterError("unknown key '" + std::string(key) + "' in operator spec '" + op.text + "'");
    };
    auto no_args = [&] {
        if (!arg.empty())
            throw ParameterError("operator '" + std::string(head) + "' takes no arguments");
    };

    if (head == "id" || head == "identity") {
        no_args();
        op.kind = OperatorSpec::Kind::identity;
    } else if (head == "M") {
        op.kind = OperatorSpec::Kind::maximal;
        keyed([&](std::string_view k, std::string_view v) {
            if (k != "ladder")
                unknown(k);
            if (v != "dyadic")
                throw ParameterError("only the dyadic ladder is supported");
        });
    } else if (head == "Mbar") {
        no_args();
        op.kind = OperatorSpec::Kind::maximal_uncentered;
    } else if (head == "H") {
        no_args();
        op.kind = OperatorSpec::Kind::hardy;
    } else if (head == "CZ") {
        op.kind = OperatorSpec::Kind::cz;
        if (arg == "hilbert")
            op.kernel = CzKernel::hilbert;
        else if (arg == "riesz1")
            op.kernel = CzKernel::riesz1;
        else if (arg == "riesz2")
            op.kernel = CzKernel::riesz2;
        else
            throw ParameterError("unknown kernel in operator spec '" + op.text + "'");
    } else if (head == "TOmega" || head == "mu") {
        if (arg.empty())
            throw ParameterError("operator '" + std::string(head) + "' needs a sphere spec");
        op.kind = head == "mu" ? OperatorSpec::Kind::marcinkiewicz : OperatorSpec::Kind::rough;
        op.sphere = std::string(arg);
    } else if (head == "I") {
        op.kind = OperatorSpec::Kind::riesz;
        bool seen = false;
        keyed([&](std::string_view k, std::string_view v) {
            if (k != "alpha")
                unknown(k);
            op.alpha = parse_number(v, text);
            seen = true;
        });
        if (!seen)
            throw ParameterError("operator 'I' needs alpha=");
    } else if (head == "BR" || head == "BRmax") {
        op.kind = head == "BR" ? OperatorSpec::Kind::bochner_riesz : OperatorSpec::Kind::bochner_riesz_maximal;
        keyed([&](std::string_view k, std::string_view v) {
            if (k == "delta")
                op.delta = parse_number(v, text);
            else if (k == "R" && head == "BR")
                op.R = parse_number(v, text);
            else
                unknown(k);
        });
        require_multiplier(op.delta, op.R);
    } else if (head == "g") {
        no_args();
        op.kind = OperatorSpec::Kind::g;
    } else if (head == "S") {
        op.kind = OperatorSpec::Kind::intrinsic;
        keyed([&](std::string_view k, std::string_view v) {
            if (k == "alpha")
                op.alpha = parse_number(v, text);
            else if (k == "K")
                op.atoms = static_cast<int>(parse_number(v, text));
            else if (k == "seed")
                op.seed = static_cast<std::uint64_t>(parse_number(v, text));
            else
                unknown(k);
        });
        if (!(op.alpha > 0.0 && op.alpha <= 1.0) || op.atoms < 1)
            throw ParameterError("operator 'S' needs 0 < alpha <= 1 and K >= 1");
    } else {
        throw ParameterError("unknown operator '" + op.text + "'");
    }
    return op;
}

SampledField apply_operator(const OperatorSpec& op, const SampledField& f, Exec exec)
{
    const Grid& grid = f.grid;
    const double h = grid.spacing;
    const double L = grid.half_width;
    switch (op.kind) {
    case OperatorSpec::Kind::identity:
        return f;
    case OperatorSpec::Kind::maximal:
        return maximal_centered(f, RadiusLadder::dyadic(grid), exec);
    case OperatorSpec::Kind::maximal_uncentered:
        return maximal_uncentered(f, BallFamily::grid_centered(grid, 1, RadiusLadder::dyadic(grid)), exec);
    case OperatorSpec::Kind::hardy:
        return hardy_op(f);
    case OperatorSpec::Kind::cz:
        return cz_apply(f, op.kernel, h, exec);
    case OperatorSpec::Kind::rough:
        return rough_singular(f, parse_sphere_spec(op.sphere, grid.dim), h, exec);
    case OperatorSpec::Kind::marcinkiewicz:
        return marcinkiewicz(f, parse_sphere_spec(op.sphere, grid.dim), ScaleLadder::dyadic(h, L), exec);
    case OperatorSpec::Kind::riesz:
        return riesz_potential(f, op.alpha, exec);
    case OperatorSpec::Kind::bochner_riesz:
        return bochner_riesz(f, {op.delta, op.R});
    case OperatorSpec::Kind::bochner_riesz_maximal: {
        std::vector<double> radii;
        const double nyquist = pi / h;
        for (double R = 1.0; R <= nyquist * (1.0 + 1e-12); R *= 2.0)
            radii.push_back(R);
        return bochner_riesz_maximal(f, op.delta, radii);
    }
    case OperatorSpec::Kind::g:
        return g_function(f, laplacian_of_gaussian(grid.dim), ScaleLadder::dyadic(h, L), exec);
    case OperatorSpec::Kind::intrinsic: {
        const auto dict = BumpDictionary::make(grid.dim, op.atoms, op.alpha, op.seed);
        return intrinsic_square(f, op.alpha, dict, ConeDiscretization::dyadic(grid), exec);
    }
    }
    throw ParameterError("unhandled operator");
}

}  // namespace amalgam
