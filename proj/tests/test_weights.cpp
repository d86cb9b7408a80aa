#include <cmath>

#include <doctest.h>

#include "amalgam/weights.hpp"

using namespace amalgam;

namespace {

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

BallFamily family_for(const Grid& g, int stride, double r_max)
{
    std::vector<double> radii;
    for (double r = g.spacing; r <= r_max; r *= 2.0)
        radii.push_back(r);
    const auto ladder = RadiusLadder::from(g, radii);
    auto family = BallFamily::grid_centered(g, stride, ladder);
    for (const auto& b : BallFamily::around({{0.0, 0.0}}, ladder).balls)
        family.balls.push_back(b);
    return family;
}

}  // namespace

TEST_CASE("weight grammar")
{
    const Grid g = make_grid(1, 4.0, 64);
    CHECK(make_weight("2.5", g)[3] == 2.5);
    CHECK(make_weight("const:2.5", g)[3] == 2.5);
    const WeightField p = make_weight("power:0.5", g);
    CHECK(p[40] == std::pow(std::abs(g.point(40)[0]), 0.5));
    CHECK(make_weight("shifted_power:-1", g)[0] == doctest::Approx(1.0 / (1.0 + 3.9375)));
    CHECK(make_weight("exp:1", g)[10] == doctest::Approx(std::exp(g.point(10)[0])));
    CHECK(make_weight("random:3", g).field.values == make_weight("random:3", g).field.values);
    CHECK_THROWS_AS(make_weight("-1", g), ParameterError);
    CHECK_THROWS_AS(make_weight("gaussian:1", g), ParameterError);
}

TEST_CASE("unit weight is in every class with constant 1")
{
    const Grid g = make_grid(1, 4.0, 256);
    const auto family = family_for(g, 4, 4.0);
    for (double p : {1.2, 2.0, 5.0})
        CHECK(ap_constant(unit_weight(g), p, family).constant == 1.0);
    CHECK(a1_constant(unit_weight(g), RadiusLadder::dyadic(g)) == 1.0);
    CHECK(apq_constant(unit_weight(g), 1.5, 3.0, family).constant == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(apq_quantity(unit_weight(g), {{0.0, 0.0}, 1.0}, 1.0, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("power weight A_2 at origin-centred balls")
{
    // avg |x|^{1/2} = (2/3) r^{1/2}, avg |x|^{-1/2} = 2 r^{-1/2}. The midpoint sum of the singular
    // factor is low by zeta(1/2, 1/2) / (2 sqrt(r/h)) relative, zeta(1/2, 1/2) = (sqrt 2 - 1) zeta(1/2).
    const Grid g = make_grid(1, 4.0, 1024);
    const WeightField w = make_weight("power:0.5", g);
    const double hurwitz = (std::sqrt(2.0) - 1.0) * -1.4603545088095868;
    for (double r : {0.5, 1.0, 2.0, 3.0}) {
        const double q = ap_quantity(w, {{0.0, 0.0}, r}, 2.0);
        const double predicted = 4.0 / 3.0 * (1.0 + hurwitz / (2.0 * std::sqrt(r / g.spacing)));
        CHECK(rel(q, predicted) < 2e-3);
        if (r >= 2.0)
            CHECK(rel(q, 4.0 / 3.0) < 0.02);
    }
}

TEST_CASE("power weight class estimates under refinement")
{
    auto estimate = [](const char* spec, int n) {
        const Grid g = make_grid(1, 4.0, n);
        return ap_constant(make_weight(spec, g), 2.0, family_for(g, n / 256, 2.0)).constant;
    };
    const double a = estimate("power:0.5", 4096);
    const double b = estimate("power:0.5", 8192);
    CHECK(b >= 4.0 / 3.0);
    CHECK(rel(a, b) <= 0.05);
    CHECK(estimate("power:1.2", 8192) >= 1.3 * estimate("power:1.2", 1024));
}

TEST_CASE("per-ball quantities: Jensen, monotonicity, scaling")
{
    const Grid g = make_grid(1, 4.0, 512);
    const WeightField w = make_weight("random:11", g);
    const auto family = family_for(g, 16, 4.0);
    for (const auto& b : family.balls) {
        const double q2 = ap_quantity(w, b, 2.0);
        CHECK(q2 >= 1.0 - 1e-9);
        CHECK(ap_quantity(w, b, 3.0) <= q2 * (1.0 + 1e-9));
        CHECK(rel(ap_quantity(scale_weight(w, 7.5), b, 2.0), q2) < 1e-13);
    }
    CHECK_THROWS_AS(ap_quantity(w, {{0.0, 0.0}, 1.0}, 1.0), ParameterError);
    CHECK_THROWS_AS(ap_quantity(w, {{0.0, 0.0}, 1e-4}, 2.0), DegenerateBallError);
}

TEST_CASE("duality and power identities per ball")
{
    const Grid g = make_grid(1, 4.0, 512);
    const auto family = family_for(g, 32, 4.0);
    for (const char* spec : {"power:0.5", "random:2", "exp:0.3"}) {
        const WeightField w = make_weight(spec, g);
        for (double p : {1.5, 2.0, 4.0}) {
            const double pp = conjugate_exponent(p);
            const WeightField dual = dual_weight(w, p);
            for (const auto& b : family.balls)
                CHECK(rel(ap_quantity(dual, b, pp), std::pow(ap_quantity(w, b, p), pp - 1.0)) < 1e-10);
        }
        for (auto [p, q] : {std::pair{1.5, 3.0}, std::pair{2.0, 4.0}, std::pair{4.0 / 3.0, 4.0}}) {
            const WeightField wq = pow_weight(w, q);
            const double index = 1.0 + q / conjugate_exponent(p);
            for (const auto& b : family.balls)
                CHECK(rel(std::pow(apq_quantity(w, b, p, q), q), ap_quantity(wq, b, index)) < 1e-10);
        }
    }
}

TEST_CASE("A_{p,q} of |x|^{-1/8} at p = 4/3, q = 4 is refinement stable")
{
    auto estimate = [](int n) {
        const Grid g = make_grid(1, 4.0, n);
        return apq_constant(make_weight("power:-0.125", g), 4.0 / 3.0, 4.0, family_for(g, n / 128, 2.0)).constant;
    };
    const double a = estimate(2048);
    const double b = estimate(4096);
    CHECK(std::isfinite(b));
    CHECK(rel(a, b) <= 0.05);
}

TEST_CASE("A_1 constants")
{
    auto a1 = [](const char* spec, int n, double top) {
        const Grid g = make_grid(1, 4.0, n);
        std::vector<double> radii;
        for (double r = g.spacing; r <= top; r *= 2.0)
            radii.push_back(r);
        return a1_constant(make_weight(spec, g), RadiusLadder::from(g, radii));
    };
    const double lo = a1("shifted_power:-0.5", 1024, 4.0);
    const double hi = a1("shifted_power:-0.5", 2048, 4.0);
    CHECK(rel(lo, hi) <= 0.05);
    double prev = 0.0;
    for (double top : {0.5, 1.0, 2.0, 4.0}) {
        const double v = a1("exp:1", 512, top);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("dual weights")
{
    const Grid g = make_grid(1, 4.0, 128);
    const WeightField w = make_weight("random:5", g);
    const WeightField inv = dual_weight(w, 2.0);
    const WeightField back = dual_weight(dual_weight(w, 3.0), 1.5);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(rel(inv[k], 1.0 / w[k]) < 1e-15);
        CHECK(rel(back[k], w[k]) < 1e-12);
    }
    CHECK(dual_weight(unit_weight(g), 3.0)[5] == 1.0);
    CHECK_THROWS_AS(dual_weight(w, 1.0), ParameterError);
}

TEST_CASE("doubling constants")
{
    const Grid g = make_grid(1, 4.0, 1024);
    const auto fam = BallFamily::around({{0.0, 0.0}, {0.7, 0.0}}, RadiusLadder::from(g, {0.25, 0.5, 1.0}));
    CHECK(std::abs(doubling_constant(unit_weight(g), fam) - 2.0) <= 2.0 * g.spacing / 0.25);

    const Grid g2 = make_grid(2, 4.0, 256);
    const auto fam2 = BallFamily::around({{0.0, 0.0}, {0.3, -0.2}}, RadiusLadder::from(g2, {0.5, 1.0}));
    CHECK(std::abs(doubling_constant(unit_weight(g2), fam2) - 4.0) <= 0.05);

    auto power = [](int n) {
        const Grid gn = make_grid(1, 4.0, n);
        const auto f = BallFamily::around({{0.0, 0.0}, {0.5, 0.0}}, RadiusLadder::from(gn, {0.125, 0.25, 0.5, 1.0}));
        return doubling_constant(make_weight("power:0.5", gn), f);
    };
    CHECK(rel(power(2048), power(4096)) <= 0.05);
    const auto outside = BallFamily::around({{3.5, 0.0}}, RadiusLadder::from(g, {2.0}));
    CHECK_THROWS_AS(doubling_constant(unit_weight(g), outside), ParameterError);
}

TEST_CASE("density check")
{
    const Grid g = make_grid(1, 4.0, 1024);
    const auto rep = density_check(unit_weight(g), {{0.0, 0.0}, 1.0}, {0.25, 0.5, 1.0});
    CHECK(std::abs(rep.fitted_delta - 1.0) < 1e-3);
    CHECK(std::abs(rep.fitted_c - 1.0) < 1e-3);
    for (const auto& pair : rep.pairs)
        CHECK(pair.weight_ratio == doctest::Approx(pair.measure_ratio).epsilon(1e-12));
    CHECK(rep.pairs.back().measure_ratio == 1.0);
    CHECK(rep.pairs.back().weight_ratio == 1.0);

    // w(B(0, r)) = (4/3) r^{3/2}.
    const auto pw = density_check(make_weight("power:0.5", g), {{0.0, 0.0}, 1.0}, {0.125, 0.25, 0.5, 0.75, 1.0});
    CHECK(std::abs(pw.fitted_delta - 1.5) <= 0.075);
    for (std::size_t i = 1; i < pw.pairs.size(); ++i)
        CHECK(pw.pairs[i].weight_ratio > pw.pairs[i - 1].weight_ratio);
    CHECK_THROWS_AS(density_check(unit_weight(g), {{0.0, 0.0}, 1.0}, {0.0}), ParameterError);
}

TEST_CASE("serial and parallel constants agree")
{
    const Grid g = make_grid(1, 4.0, 512);
    const WeightField w = make_weight("random:8", g);
    const auto family = family_for(g, 8, 4.0);
    const auto a = ap_constant(w, 2.5, family, Exec::serial);
    const auto b = ap_constant(w, 2.5, family, Exec::parallel);
    CHECK(a.constant == b.constant);
    CHECK(a.argmax.center == b.argmax.center);
    CHECK(a1_constant(w, RadiusLadder::dyadic(g), Exec::serial) == a1_constant(w, RadiusLadder::dyadic(g), Exec::parallel));
}
