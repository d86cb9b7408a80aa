#include <cmath>
#include <numbers>

#include <doctest.h>

#include "amalgam/harness.hpp"
#include "amalgam/spaces.hpp"
#include "amalgam/weights.hpp"

using namespace amalgam;

namespace {

SampledField make(const char* spec, const Grid& g)
{
    return sample(parse_function_spec(spec), g);
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

SpaceParams space(const Grid& g, double p, double q, double t, const char* w = "1", const char* v = "1")
{
    return SpaceParams{p, q, t, make_weight(w, g), make_weight(v, g)};
}

}  // namespace

TEST_CASE("Lebesgue norms")
{
    const Grid g = make_grid(1, 8.0, 1024);
    CHECK(std::abs(lp_norm(make("gaussian:1", g), unit_weight(g), 2.0) - std::pow(std::numbers::pi, 0.25)) < 1e-3);
    const auto ind = make("indicator:0,1", make_grid(1, 4.0, 64));
    const WeightField w = make_weight("power:0.5", ind.grid);
    const double expect = std::pow(integrate(ind, w), 1.0 / 3.0);
    CHECK(rel(lp_norm(ind, w, 3.0), expect) < 1e-14);
    CHECK(rel(weak_lp_norm(ind, w, 3.0), expect) < 1e-8);
    CHECK(lp_norm(make("random_smooth:3", g), nullptr, infinity) > 0.0);
}

TEST_CASE("weak Lebesgue norm never exceeds the strong norm")
{
    const Grid g = make_grid(1, 4.0, 256);
    for (std::uint64_t s = 1; s <= 100; ++s) {
        const auto f = sample(parse_function_spec("random_smooth:" + std::to_string(s)), g);
        const WeightField w = make_weight("random:" + std::to_string(s + 1000), g);
        const double p = 1.2 + 0.03 * static_cast<double>(s);
        CHECK(weak_lp_norm(f, w, p) <= lp_norm(f, w, p) * (1.0 + 1e-9));
    }
}

TEST_CASE("inner ball norm")
{
    const Grid g = make_grid(1, 4.0, 512);
    const auto c = inner_ball_norm(SampledField::constant(g, -2.0), make_weight("power:0.3", g), 2.0, 0.5);
    for (double x : c.values)
        CHECK(x == doctest::Approx(2.0).epsilon(1e-14));

    const auto ind = make("indicator:0,1", g);
    const auto small = inner_ball_norm(ind, unit_weight(g), 2.0, 0.05);
    const std::size_t mid = g.size() / 2 + 32;  // x = 0.5 + h/2
    CHECK(small[mid] == 1.0);

    // Fraction of B(1, 1) inside [0, 1] is 1/2.
    const auto big = inner_ball_norm(ind, unit_weight(g), 2.0, 1.0);
    std::size_t at1 = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (std::abs(g.point(k)[0] - 1.0) < std::abs(g.point(at1)[0] - 1.0))
            at1 = k;
    CHECK(std::abs(big[at1] - std::sqrt(0.5)) <= 2.0 * g.spacing);
}

TEST_CASE("slice identity for every t")
{
    const Grid g = make_grid(1, 4.0, 1024);
    for (double p : {1.5, 2.0, 3.0})
        for (const char* s : {"gaussian:0.5", "indicator:-0.5,1", "bump:0.2,0.8"}) {
            const auto f = make(s, g);
            const double ref = lp_norm(f, unit_weight(g), p);
            for (double t : standard_t_grid(g))
                CHECK(rel(amalgam_norm(f, space(g, p, p, t)), ref) < 1e-3);
        }
}

TEST_CASE("amalgam norm basics")
{
    const Grid g = make_grid(1, 4.0, 512);
    const SpaceParams sp = space(g, 2.5, 1.5, 0.3, "power:0.3", "random:4");
    const auto f = make("random_smooth:5", g);
    CHECK(amalgam_norm(SampledField::zeros(g), sp) == 0.0);
    CHECK(weak_amalgam_norm(SampledField::zeros(g), sp) == 0.0);
    CHECK(rel(amalgam_norm(scale(f, -4.0), sp), 4.0 * amalgam_norm(f, sp)) < 1e-12);
    CHECK(rel(weak_amalgam_norm(scale(f, 0.5), sp), 0.5 * weak_amalgam_norm(f, sp)) < 1e-12);

    SpaceParams inf = sp;
    inf.q = infinity;
    double mx = 0.0;
    for (double x : inner_ball_norm(f, sp.w, sp.p, sp.t).values)
        mx = std::max(mx, x);
    CHECK(amalgam_norm(f, inf) == mx);

    // Monotone in |f|.
    const auto big = add(abs(f), make("gaussian:0.3", g));
    CHECK(amalgam_norm(f, sp) <= amalgam_norm(big, sp));
}

TEST_CASE("parameter validation and clamping")
{
    const Grid g = make_grid(1, 4.0, 64);
    CHECK_THROWS_AS(space(g, 1.0, 2.0, 0.5).validate(g), ParameterError);
    CHECK_THROWS_AS(space(g, 2.0, 0.5, 0.5).validate(g), ParameterError);
    CHECK_THROWS_AS(space(g, 2.0, 2.0, 0.01).validate(g), ParameterError);
    CHECK_NOTHROW(space(g, 2.0, infinity, 0.5).validate(g));
    CHECK(clamp_radius(g, 0.0) == g.spacing);
    CHECK(clamp_radius(g, 10.0) == 2.0);
}

TEST_CASE("weak amalgam norm")
{
    const Grid g = make_grid(1, 4.0, 256);
    const SpaceParams sp = space(g, 2.0, 3.0, 0.5, "power:0.2", "shifted_power:0.5");
    const auto ind = make("indicator:-1,0.5", g);
    CHECK(rel(weak_amalgam_norm(ind, sp), amalgam_norm(ind, sp)) < 1e-8);

    // Two-level field against a dense lambda sweep.
    const auto two = add(make("indicator:-1,1", g), make("indicator:0,0.5", g));
    double dense = 0.0;
    for (int i = 1; i < 20000; ++i) {
        const double lambda = 2.0 * i / 20000.0;
        dense = std::max(dense, lambda * amalgam_norm(level_set(two, lambda).indicator, sp));
    }
    const double weak = weak_amalgam_norm(two, sp);
    CHECK(weak >= dense - 1e-12);
    CHECK(weak - dense <= 1.01e-4 * weak);
    for (double level : {1.0, 2.0}) {
        const double lambda = level * (1.0 - 1e-8);
        dense = std::max(dense, lambda * amalgam_norm(level_set(two, lambda).indicator, sp));
    }
    CHECK(std::abs(weak - dense) < 1e-6 * weak);
}

TEST_CASE("Chebyshev in amalgam form")
{
    const Grid g = make_grid(1, 4.0, 512);
    const SpaceParams sp = space(g, 2.0, 1.0, 0.25, "power:0.4", "power:-0.2");
    const auto f = make("random_smooth:6", g);
    const double strong = amalgam_norm(f, sp);
    for (double lambda : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8})
        CHECK(lambda * amalgam_norm(level_set(f, lambda).indicator, sp) <= strong * (1.0 + 1e-12));
    CHECK(weak_amalgam_norm(f, sp) <= strong * (1.0 + 1e-9));
}

TEST_CASE("dual parameters")
{
    const Grid g = make_grid(1, 4.0, 64);
    const auto d = dual_params(space(g, 2.0, 2.0, 0.5));
    CHECK(d.p_dual == 2.0);
    CHECK(d.q_dual == 2.0);
    CHECK(d.inner_dual[3] == 1.0);
    const SpaceParams sp = space(g, 3.0, 1.5, 0.5, "power:0.3", "random:1");
    const auto dd = dual_params(dual_params(sp).as_space(0.5));
    CHECK(rel(dd.p_dual, 3.0) < 1e-12);
    CHECK(rel(dd.q_dual, 1.5) < 1e-12);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(rel(dd.inner_dual[k], sp.w[k]) < 1e-12);
        CHECK(rel(dd.outer_dual[k], sp.v[k]) < 1e-12);
    }
    const auto one = dual_params(space(g, 2.0, 1.0, 0.5, "1", "power:-0.2"));
    CHECK(std::isinf(one.q_dual));
    CHECK_THROWS_AS(dual_params(space(g, 1.0, 2.0, 0.5)), ParameterError);
}

TEST_CASE("Hoelder defect")
{
    const Grid g = make_grid(1, 4.0, 512);
    const SpaceParams sp = space(g, 2.0, 2.0, 0.5);
    const auto ind = make("indicator:0,1", g);
    CHECK(holder_defect(ind, SampledField::zeros(g), sp) == 0.0);
    CHECK(std::abs(holder_defect(ind, ind, sp)) < 1e-3);
    for (const auto& tr : seeded_triples(g, 100, 9)) {
        const auto f = sample(tr.f, g);
        const auto h = sample(tr.g, g);
        const double scale = std::max(1.0, integrate(abs(multiply(f, h))));
        CHECK(holder_defect(f, h, tr.space(g)) >= -1e-9 * scale);
    }
}

TEST_CASE("Hoelder pairing fails for a strongly varying inner weight")
{
    // f = w^{-1/2} chi, g = w^{1/2} chi: the ball-wise Hoelder step loses a factor Q_2(w, B)^{1/2}.
    const Grid g = make_grid(1, 4.0, 512);
    const WeightField w = make_weight("power:0.9", g);
    SampledField f = SampledField::zeros(g), h = SampledField::zeros(g);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (std::abs(g.point(k)[0]) < 0.5) {
            f[k] = 1.0 / std::sqrt(w[k]);
            h[k] = std::sqrt(w[k]);
        }
    CHECK(holder_defect(f, h, SpaceParams{2.0, 2.0, 1.0, w, unit_weight(g)}) < -0.1);
}

TEST_CASE("serial and parallel norms agree bitwise")
{
    const Grid g = make_grid(2, 2.0, 48);
    const auto f = make("random_smooth:2", g);
    const SpaceParams sp = space(g, 2.0, 3.0, 0.3, "power:0.5", "random:3");
    CHECK(amalgam_norm(f, sp, Exec::serial) == amalgam_norm(f, sp, Exec::parallel));
    CHECK(weak_amalgam_norm(f, sp, Exec::serial) == weak_amalgam_norm(f, sp, Exec::parallel));
    CHECK(inner_ball_norm(f, sp.w, 2.0, 0.3, Exec::serial).values ==
          inner_ball_norm(f, sp.w, 2.0, 0.3, Exec::parallel).values);
}
