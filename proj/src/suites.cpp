#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "amalgam/harness.hpp"

namespace amalgam {

namespace {

using json = nlohmann::json;

class Recorder {
public:
    explicit Recorder(std::string suite) { result_.suite = std::move(suite); }

    void check(const std::string& name, bool ok, const std::string& detail = {})
    {
        result_.checks.push_back({name, ok, detail});
    }

    // Runs body; a thrown error is recorded as a failed check.
    template <class Fn>
    void guarded(const std::string& name, Fn&& body)
    {
        try {
            body();
        } catch (const std::exception& e) {
            check(name, false, std::string("error: ") + e.what());
        }
    }

    SuiteResult take() { return std::move(result_); }

private:
    SuiteResult result_;
};

std::string fmt(double x)
{
    return format_double(x);
}

SampledField make(const std::string& spec, const Grid& g)
{
    return sample(parse_function_spec(spec), g);
}

std::size_t nearest(const Grid& g, double x)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < g.size(); ++k)
        if (std::abs(g.point(k)[0] - x) < std::abs(g.point(best)[0] - x))
            best = k;
    return best;
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// -----------------------------------------------------------------------------

SuiteResult grid_suite(const VerifyOptions&)
{
    Recorder r("grid");
    r.guarded("make_grid", [&] {
        const Grid g = make_grid(1, 4.0, 8);
        bool ok = g.spacing == 1.0 && g.size() == 8;
        for (int i = 0; i < 8; ++i)
            ok = ok && g.coord(i) == -3.5 + i;
        const Grid g2 = make_grid(2, 1.0, 8);
        ok = ok && g2.size() == 64 && g2.spacing == 0.25;
        bool odd_rejected = false;
        try {
            make_grid(1, 4.0, 7);
        } catch (const ParameterError&) {
            odd_rejected = true;
        }
        r.check("make_grid", ok && odd_rejected);
    });
    r.guarded("sample", [&] {
        const Grid g = make_grid(1, 4.0, 8);
        const auto f = make("gaussian:1", g);
        const bool ok = f[4] == std::exp(-0.125);
        const Grid g2 = make_grid(2, 4.0, 64);
        const auto a = make("random_smooth:7", g2);
        const auto b = make("random_smooth:7", g2);
        r.check("sample", ok && a.values == b.values, "gaussian(0.5)=" + fmt(f[4]));
    });
    r.guarded("integrate", [&] {
        const Grid g = make_grid(1, 4.0, 8);
        const double ones = integrate(SampledField::constant(g, 1.0));
        const double ind = integrate(make("indicator:0,1", g));
        const Grid fine = make_grid(1, 8.0, 1024);
        const double gauss = integrate(make("gaussian:1", fine));
        // The field is truncated to [-4, 4].
        const double oracle = std::sqrt(2.0 * std::numbers::pi) * std::erf(4.0 / std::sqrt(2.0));
        r.check("integrate", ones == 8.0 && ind == 1.0 && std::abs(gauss - oracle) < 1e-6,
                "gaussian=" + fmt(gauss) + " oracle=" + fmt(oracle));
    });
    r.guarded("ball_quadrature", [&] {
        const Grid g = make_grid(1, 4.0, 8);
        const WeightField unit = unit_weight(g);
        const double m1 = ball_measure(unit, {0.0, 0.0}, 1.0);
        const Grid g2 = make_grid(2, 4.0, 256);
        const double m2 = ball_measure(unit_weight(g2), {0.0, 0.0}, 1.0);
        const Grid g3 = make_grid(1, 4.0, 64);
        SampledField x = SampledField::zeros(g3);
        for (std::size_t k = 0; k < x.size(); ++k)
            x[k] = g3.point(k)[0];
        const double odd = ball_average(x, {0.0, 0.0}, 1.0, unit_weight(g3));
        const double c = ball_average(SampledField::constant(g3, 2.5), {0.3, 0.0}, 0.7, make_weight("power:0.5", g3));
        r.check("ball_quadrature",
                m1 == 2.0 && std::abs(m2 - std::numbers::pi) <= 4.0 * g2.spacing && std::abs(odd) < 1e-12 &&
                    std::abs(c - 2.5) < 1e-14,
                "disc=" + fmt(m2));
    });
    r.guarded("refinement", [&] {
        std::vector<double> vals;
        for (int n : {256, 512, 1024, 2048})
            vals.push_back(integrate(make("bump:0,1", make_grid(1, 4.0, n))));
        const double d1 = std::abs(vals[1] - vals[0]), d2 = std::abs(vals[2] - vals[1]), d3 = std::abs(vals[3] - vals[2]);
        r.check("refinement", d2 <= d1 && d3 <= d2, "diffs " + fmt(d1) + " " + fmt(d2) + " " + fmt(d3));
    });
    return r.take();
}

// -----------------------------------------------------------------------------

SuiteResult weights_suite(const VerifyOptions& o)
{
    Recorder r("weights");
    const Grid g = make_grid(1, 4.0, 1024);
    const auto ladder = RadiusLadder::dyadic(g);
    r.guarded("unit_ap", [&] {
        const auto family = BallFamily::grid_centered(g, 16, ladder);
        bool ok = true;
        for (double p : {1.5, 2.0, 3.0})
            ok = ok && ap_constant(unit_weight(g), p, family, o.exec).constant == 1.0;
        ok = ok && a1_constant(unit_weight(g), ladder, o.exec) == 1.0;
        r.check("unit_ap", ok);
    });
    r.guarded("power_half_origin", [&] {
        const WeightField w = make_weight("power:0.5", g);
        double worst = 0.0;
        for (double rad : {2.0, 3.0})
            worst = std::max(worst, std::abs(ap_quantity(w, {{0.0, 0.0}, rad}, 2.0) / (4.0 / 3.0) - 1.0));
        r.check("power_half_origin", worst < 0.02, "worst relative deviation " + fmt(worst));
    });
    r.guarded("power_weight_classes", [&] {
        const auto origin_estimate = [&](const std::string& spec, int n) {
            const Grid gn = make_grid(1, 4.0, n);
            std::vector<double> radii;
            for (double rad = gn.spacing; rad <= 2.0; rad *= 2.0)
                radii.push_back(rad);
            const auto ladder_n = RadiusLadder::from(gn, radii);
            auto family = BallFamily::grid_centered(gn, n / 256, ladder_n);
            for (const auto& b : BallFamily::around({{0.0, 0.0}}, ladder_n).balls)
                family.balls.push_back(b);
            return ap_constant(make_weight(spec, gn), 2.0, family, o.exec).constant;
        };
        const double a = origin_estimate("power:0.5", 4096);
        const double b = origin_estimate("power:0.5", 8192);
        const double lo = origin_estimate("power:1.2", 1024);
        const double hi = origin_estimate("power:1.2", 8192);
        r.check("power_weight_classes", b >= 4.0 / 3.0 && std::abs(b / a - 1.0) <= 0.05 && hi >= 1.3 * lo,
                "power:0.5 " + fmt(a) + " -> " + fmt(b) + ", power:1.2 " + fmt(lo) + " -> " + fmt(hi));
    });
    r.guarded("identities", [&] {
        const Grid gi = make_grid(1, 4.0, 512);
        BallFamily family;
        const auto base = BallFamily::grid_centered(gi, 13, RadiusLadder::dyadic(gi));
        for (std::size_t i = 0; i < base.balls.size() && family.balls.size() < 200; ++i)
            family.balls.push_back(base.balls[i]);
        const auto rep = weight_identity_suite(gi, {"power:0.5", "power:-0.25", "shifted_power:1", "exp:0.5", "random:3"},
                                               {1.5, 2.0, 3.0}, {2.0, 3.0, 4.0}, family, o.exec);
        r.check("identities", rep.failures == 0 && family.balls.size() == 200,
                std::to_string(rep.checks) + " checks, worst duality " + fmt(rep.worst_duality) + ", worst power " +
                    fmt(rep.worst_power));
    });
    r.guarded("dual_roundtrip", [&] {
        const WeightField w = make_weight("random:5", g);
        const WeightField back = dual_weight(dual_weight(w, 3.0), 1.5);
        double worst = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            worst = std::max(worst, rel(back[k], w[k]));
        r.check("dual_roundtrip", worst < 1e-12, fmt(worst));
    });
    r.guarded("doubling", [&] {
        const auto family = BallFamily::around({{0.0, 0.0}, {0.5, 0.0}}, RadiusLadder::from(g, {0.25, 0.5, 1.0}));
        const double c = doubling_constant(unit_weight(g), family);
        r.check("doubling", std::abs(c - 2.0) <= 2.0 * g.spacing / 0.25, fmt(c));
    });
    r.guarded("density", [&] {
        const auto rep = density_check(unit_weight(g), {{0.0, 0.0}, 1.0}, {0.25, 0.5, 0.75, 1.0});
        const auto rep2 = density_check(make_weight("power:0.5", g), {{0.0, 0.0}, 1.0}, {0.25, 0.5, 0.75, 1.0});
        r.check("density",
                std::abs(rep.fitted_delta - 1.0) < 1e-3 && std::abs(rep.fitted_c - 1.0) < 1e-3 &&
                    std::abs(rep2.fitted_delta - 1.5) < 0.075,
                "unit delta " + fmt(rep.fitted_delta) + ", power:0.5 delta " + fmt(rep2.fitted_delta));
    });
    return r.take();
}

// -----------------------------------------------------------------------------

SuiteResult spaces_suite(const VerifyOptions& o)
{
    Recorder r("spaces");
    const Grid g = make_grid(1, 4.0, 1024);
    const WeightField unit = unit_weight(g);
    r.guarded("slice_identity", [&] {
        double worst = 0.0;
        for (double p : {1.5, 2.0, 3.0})
            for (const char* s : {"gaussian:0.5", "indicator:0,1", "bump:0,1"}) {
                const auto f = make(s, g);
                const double ref = lp_norm(f, unit, p);
                for (double t : standard_t_grid(g))
                    worst = std::max(worst, std::abs(amalgam_norm(f, {p, p, t, unit, unit}, o.exec) - ref) / ref);
            }
        r.check("slice_identity", worst < 1e-3, "worst relative gap " + fmt(worst));
    });
    r.guarded("gaussian_l2", [&] {
        const Grid wide = make_grid(1, 8.0, 1024);
        const double n = lp_norm(make("gaussian:1", wide), unit_weight(wide), 2.0);
        r.check("gaussian_l2", std::abs(n - std::pow(std::numbers::pi, 0.25)) < 1e-3, fmt(n));
    });
    r.guarded("holder_chebyshev", [&] {
        const auto triples = seeded_triples(g, 100, o.seed);
        double worst_holder = std::numeric_limits<double>::infinity();
        double worst_weak = 0.0;
        std::size_t bad = 0;
        for (const auto& tr : triples) {
            const auto f = sample(tr.f, g);
            const auto h = sample(tr.g, g);
            const SpaceParams sp = tr.space(g);
            const double d = holder_defect(f, h, sp, o.exec);
            const double scale = std::max(1.0, integrate(abs(multiply(f, h))));
            worst_holder = std::min(worst_holder, d / scale);
            const double strong = amalgam_norm(f, sp, o.exec);
            const double weak = weak_amalgam_norm(f, sp, o.exec);
            worst_weak = std::max(worst_weak, weak / strong);
            if (d < -1e-9 * scale || weak > strong * (1.0 + 1e-9))
                ++bad;
        }
        r.check("holder_chebyshev", bad == 0,
                "min scaled defect " + fmt(worst_holder) + ", max weak/strong " + fmt(worst_weak));
    });
    r.guarded("homogeneity_and_sup", [&] {
        const auto f = make("random_smooth:4", g);
        const SpaceParams sp{2.5, 1.5, 0.25, make_weight("power:0.3", g), make_weight("random:2", g)};
        const double a = amalgam_norm(scale(f, -3.0), sp, o.exec);
        const double b = 3.0 * amalgam_norm(f, sp, o.exec);
        SpaceParams inf = sp;
        inf.q = infinity;
        const auto inner = inner_ball_norm(f, sp.w, sp.p, sp.t, o.exec);
        double mx = 0.0;
        for (double x : inner.values)
            mx = std::max(mx, x);
        r.check("homogeneity_and_sup", rel(a, b) < 1e-12 && amalgam_norm(f, inf, o.exec) == mx);
    });
    r.guarded("chebyshev_levels", [&] {
        const auto f = make("random_smooth:9", g);
        const SpaceParams sp{2.0, 3.0, 0.5, make_weight("power:0.2", g), make_weight("shifted_power:0.5", g)};
        const double strong = amalgam_norm(f, sp, o.exec);
        bool ok = true;
        for (double lambda : {0.05, 0.1, 0.2, 0.4}) {
            const auto level = level_set(f, lambda);
            ok = ok && lambda * amalgam_norm(level.indicator, sp, o.exec) <= strong * (1.0 + 1e-12);
        }
        r.check("chebyshev_levels", ok);
    });
    return r.take();
}

// -----------------------------------------------------------------------------

SuiteResult operators_suite(const VerifyOptions& o)
{
    Recorder r("operators");
    const Grid g = make_grid(1, 4.0, 2048);
    const std::size_t at2 = nearest(g, 2.0);
    r.guarded("maximal_closed_form", [&] {
        const double m = maximal_centered(make("indicator:0,1", g), RadiusLadder::dyadic(g), o.exec)[at2];
        r.check("maximal_closed_form", std::abs(m - 0.25) <= 2.0 * g.spacing, fmt(m));
    });
    r.guarded("hilbert_closed_form", [&] {
        const double v = cz_apply(make("indicator:-1,1", g), CzKernel::hilbert, g.spacing, o.exec)[at2];
        const double want = std::log(3.0) / std::numbers::pi;
        r.check("hilbert_closed_form", std::abs(v - want) <= 1e-2, fmt(v) + " vs " + fmt(want));
    });
    r.guarded("riesz_closed_form", [&] {
        const double v = riesz_potential_at(make("indicator:0,1", g), 0.5, 0.0);
        const double want = 2.0 / riesz_gamma(1, 0.5);
        r.check("riesz_closed_form", std::abs(v - want) <= 1e-3, fmt(v) + " vs " + fmt(want));
    });
    r.guarded("hardy_closed_form", [&] {
        const auto H = hardy_op(make("indicator:-1,1", g));
        double worst = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double ax = std::abs(g.point(k)[0]);
            const double want = ax <= 1.0 ? 2.0 : 2.0 / ax;
            const double tol = ax <= 1.0 ? 2.0 * g.spacing / ax : 2.0 * g.spacing;
            worst = std::max(worst, std::abs(H[k] - want) / tol);
        }
        r.check("hardy_closed_form", worst <= 1.0, "worst error / tolerance " + fmt(worst));
    });
    r.guarded("rough_matches_hilbert", [&] {
        const auto f = make("random_smooth:3", g);
        const auto a = rough_singular(f, parse_sphere_spec("sgn", 1), g.spacing, o.exec);
        const auto b = cz_apply(f, CzKernel::hilbert, g.spacing, o.exec);
        double worst = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            worst = std::max(worst, std::abs(a[k] - std::numbers::pi * b[k]));
        r.check("rough_matches_hilbert", worst <= 1e-10, fmt(worst));
    });
    r.guarded("bochner_riesz_contract", [&] {
        const Grid g2 = make_grid(2, 4.0, 64);
        const auto f = make("random_smooth:5", g2);
        const auto t = bochner_riesz(f, {0.5, 3.0});
        const bool mean = std::abs(integrate(t) - integrate(f)) <= 1e-10;
        const std::vector<double> radii{1.0, 2.0, 4.0, 8.0};
        const auto mx = bochner_riesz_maximal(f, 0.5, radii);
        bool dominates = true;
        for (double R : radii) {
            const auto tr = bochner_riesz(f, {0.5, R});
            for (std::size_t k = 0; k < f.size(); ++k)
                dominates = dominates && mx[k] >= std::abs(tr[k]);
        }
        r.check("bochner_riesz_contract", mean && dominates);
    });
    r.guarded("band_limited_recovery", [&] {
        const auto f = make("gaussian:0.5", g);
        const auto t = bochner_riesz(f, {0.5, 100.0});
        const double err = lp_norm(add(t, scale(f, -1.0)), nullptr, 2.0) / lp_norm(f, nullptr, 2.0);
        r.check("band_limited_recovery", err < 1e-2, "relative L2 error " + fmt(err));
    });
    r.guarded("serial_parallel", [&] {
        const Grid gs = make_grid(1, 4.0, 512);
        const auto f = make("random_smooth:2", gs);
        const auto lad = RadiusLadder::dyadic(gs);
        bool same = maximal_centered(f, lad, Exec::serial).values == maximal_centered(f, lad, Exec::parallel).values;
        same = same && cz_apply(f, CzKernel::hilbert, gs.spacing, Exec::serial).values ==
                           cz_apply(f, CzKernel::hilbert, gs.spacing, Exec::parallel).values;
        const auto levels = ScaleLadder::dyadic(gs.spacing, gs.half_width);
        same = same && g_function(f, laplacian_of_gaussian(1), levels, Exec::serial).values ==
                           g_function(f, laplacian_of_gaussian(1), levels, Exec::parallel).values;
        r.check("serial_parallel", same);
    });
    return r.take();
}

// -----------------------------------------------------------------------------

SuiteResult harness_suite(const VerifyOptions& o)
{
    Recorder r("harness");
    const Grid g = make_grid(1, 4.0, 1024);
    const auto family = TestFamily::standard(g, o.seed);
    r.guarded("identity_ratios", [&] {
        const TheoremCase id{"identity", "id", 2.0, 2.0, 2.0, 2.0, "power:0.3", "power:0.2", NormSelector::strong};
        const auto rep = op_norm_estimate(id, family, g, 0.5, o.exec);
        double worst = 0.0;
        for (const auto& e : rep.entries)
            worst = std::max(worst, std::abs(e.ratio - 1.0));
        r.check("identity_ratios", worst <= 1e-12, fmt(worst));
    });
    r.guarded("slice_spread", [&] {
        const TheoremCase id{"identity", "id", 2.0, 2.0, 2.0, 2.0, "1", "1", NormSelector::strong};
        const auto s = sweep_t(id, family, g, standard_t_grid(g), o.exec);
        r.check("slice_spread", std::abs(s.spread - 1.0) <= 1e-3, fmt(s.spread));
    });
    r.guarded("pointwise_maximal", [&] {
        const Grid gp = make_grid(1, 4.0, 512);
        std::size_t bad = 0;
        for (const char* s : {"indicator:0,1", "gaussian:0.5", "random_smooth:1"})
            bad += pointwise_maximal_check(make(s, gp), 0.5, RadiusLadder::dyadic(gp), o.exec).violations();
        r.check("pointwise_maximal", bad == 0, std::to_string(bad) + " violations");
    });
    r.guarded("scaling_unit", [&] {
        const auto f = make("gaussian:0.5", g);
        const auto rep = scaling_check(f, {2.0, 2.0, 0.25, unit_weight(g), unit_weight(g)}, {1.0, 2.0, 4.0}, o.exec);
        double worst = 0.0;
        for (const auto& row : rep.rows)
            worst = std::max(worst, std::abs(row.ratio - 1.0));
        r.check("scaling_unit", rep.rows[0].ratio == 1.0 && worst <= 1e-3, fmt(worst));
    });
    return r.take();
}

// -----------------------------------------------------------------------------

SuiteResult theorems_suite(const VerifyOptions& o)
{
    Recorder r("theorems");
    if (o.fixtures_path.empty()) {
        r.check("fixtures", false, "no fixtures file given");
        return r.take();
    }
    const Fixtures fx = Fixtures::load(o.fixtures_path);
    const Grid g = reference_grid(1);
    const auto family = TestFamily::standard(g, 1);
    const auto ts = standard_t_grid(g);
    for (const auto& c : standard_theorem_cases()) {
        r.guarded(c.label(), [&] {
            const auto pinned = fx.find(sweep_fixture_id(c), config_hash(sweep_fixture_config(c, g, ts, family)));
            if (!pinned) {
                r.check(c.label(), false, "no pinned spread for this configuration");
                return;
            }
            const auto s = sweep_t(c, family, g, ts, o.exec);
            const double limit = pinned->value * fixture_headroom;
            r.check(c.label(), s.spread <= limit, "spread " + fmt(s.spread) + " limit " + fmt(limit));
        });
    }
    r.guarded("dilation", [&] {
        const auto pinned = fx.find(scaling_fixture_id(), config_hash(scaling_fixture_config(g)));
        if (!pinned) {
            r.check("dilation", false, "no pinned constant for this configuration");
            return;
        }
        const auto rep = reference_scaling(g, o.exec);
        const double K = pinned->value * fixture_headroom;
        bool ok = true;
        for (const auto& row : rep.rows)
            ok = ok && row.ratio >= 1.0 / K && row.ratio <= K * std::pow(row.alpha, g.dim * 2.0);
        r.check("dilation", ok, "needed K " + fmt(rep.needed_k) + " pinned " + fmt(pinned->value));
    });
    return r.take();
}

}  // namespace

bool SuiteResult::passed() const
{
    for (const auto& c : checks)
        if (!c.passed)
            return false;
    return true;
}

std::string SuiteResult::to_json() const
{
    json j;
    j["suite"] = suite;
    j["passed"] = passed();
    j["checks"] = json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return j.dump(2);
}

const std::vector<std::string>& suite_ids()
{
    static const std::vector<std::string> ids{"grid", "weights", "spaces", "operators", "harness", "theorems"};
    return ids;
}

SuiteResult run_suite(const std::string& id, const VerifyOptions& options)
{
    if (id == "grid")
        return grid_suite(options);
    if (id == "weights")
        return weights_suite(options);
    if (id == "spaces")
        return spaces_suite(options);
    if (id == "operators")
        return operators_suite(options);
    if (id == "harness")
        return harness_suite(options);
    if (id == "theorems")
        return theorems_suite(options);
    throw ParameterError("unknown suite '" + id + "'");
}

Fixtures pin_fixtures(const std::string& date, Exec exec)
{
    Fixtures fx;
    const Grid g = reference_grid(1);
    const auto family = TestFamily::standard(g, 1);
    const auto ts = standard_t_grid(g);
    for (const auto& c : standard_theorem_cases()) {
        const auto s = sweep_t(c, family, g, ts, exec);
        fx.put({sweep_fixture_id(c), config_hash(sweep_fixture_config(c, g, ts, family)), s.spread, date});
    }
    const auto rep = reference_scaling(g, exec);
    fx.put({scaling_fixture_id(), config_hash(scaling_fixture_config(g)), rep.needed_k, date});
    return fx;
}

}  // namespace amalgam
