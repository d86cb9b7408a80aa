#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "amalgam/harness.hpp"

using namespace amalgam;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail)
{
    std::cout << (ok ? "PASS" : "FAIL") << "  " << id << ". " << name << "  (" << detail << ")" << std::endl;
    if (!ok)
        ++failures;
}

void criterion(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& body)
{
    try {
        const auto [ok, detail] = body();
        report(id, name, ok, detail);
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SampledField make(const std::string& spec, const Grid& g)
{
    return sample(parse_function_spec(spec), g);
}

std::size_t nearest(const Grid& g, double x)
{
    std::size_t best = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (std::abs(g.point(k)[0] - x) < std::abs(g.point(best)[0] - x))
            best = k;
    return best;
}

std::string num(double x)
{
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Mean of v over indices [i - m + 1, i + m - 1] clipped to the window, from prefix sums.
double window_mean(const std::vector<double>& prefix, int n, int i, int m)
{
    const int a = std::max(0, i - m + 1), b = std::min(n - 1, i + m - 1);
    return (prefix[static_cast<std::size_t>(b + 1)] - prefix[static_cast<std::size_t>(a)]) / (b - a + 1);
}

std::vector<double> prefix_of(const std::vector<double>& v)
{
    std::vector<double> p(v.size() + 1, 0.0);
    for (std::size_t k = 0; k < v.size(); ++k)
        p[k + 1] = p[k] + v[k];
    return p;
}

// Direct check of the two-part pointwise decomposition on a dim-1 dyadic ladder.
std::size_t pointwise_violations(const SampledField& f, double t)
{
    const Grid& g = f.grid;
    const int n = g.points_per_axis;
    const int tm = static_cast<int>(std::lround(t / g.spacing));
    std::vector<int> ladder;
    for (int m = 1; m * g.spacing <= 2.0 * g.half_width + 1e-12; m *= 2)
        ladder.push_back(m);
    std::vector<double> mag(f.values.size());
    for (std::size_t k = 0; k < mag.size(); ++k)
        mag[k] = std::abs(f.values[k]);
    const auto pf = prefix_of(mag);
    std::vector<double> u(mag.size());
    for (int i = 0; i < n; ++i)
        u[static_cast<std::size_t>(i)] = window_mean(pf, n, i, tm);
    const auto pu = prefix_of(u);
    std::vector<double> mbar(mag.size(), 0.0);
    for (int c = 0; c < n; ++c)
        for (int m : ladder) {
            const double a = window_mean(pu, n, c, m);
            for (int x = std::max(0, c - m + 1); x <= std::min(n - 1, c + m - 1); ++x)
                mbar[static_cast<std::size_t>(x)] = std::max(mbar[static_cast<std::size_t>(x)], a);
        }
    std::size_t bad = 0;
    for (int x = 0; x < n; ++x) {
        std::vector<double> local(mag.size(), 0.0);
        for (int j = std::max(0, x - 2 * tm + 1); j <= std::min(n - 1, x + 2 * tm - 1); ++j)
            local[static_cast<std::size_t>(j)] = mag[static_cast<std::size_t>(j)];
        const auto pl = prefix_of(local);
        for (int y = std::max(0, x - tm + 1); y <= std::min(n - 1, x + tm - 1); ++y) {
            double my = 0.0;
            for (int m : ladder)
                my = std::max(my, window_mean(pl, n, y, m));
            for (int m : ladder) {
                const double avg = window_mean(pf, n, y, m);
                if (m <= tm && avg > my * (1.0 + 1e-12) + 1e-15)
                    ++bad;
                if (m > tm && avg > 2.0 * mbar[static_cast<std::size_t>(x)] + 1e-9)
                    ++bad;
            }
        }
    }
    return bad;
}

}  // namespace

int main()
{
    const Exec exec = Exec::parallel;

    criterion(1, "slice identity", [&] {
        const auto start = std::chrono::steady_clock::now();
        const Grid g = make_grid(1, 4.0, 1024);
        const auto ts = standard_t_grid(g);
        double worst = 0.0;
        for (double p : {1.5, 2.0, 3.0})
            for (const char* spec : {"gaussian:0.5", "indicator:-1,1", "bump:0,1"}) {
                const auto f = make(spec, g);
                // Direct midpoint sum of |f|^p.
                double s = 0.0;
                for (double x : f.values)
                    s += std::pow(std::abs(x), p) * g.spacing;
                const double lp = std::pow(s, 1.0 / p);
                for (double t : ts) {
                    const SpaceParams sp{p, p, t, unit_weight(g), unit_weight(g)};
                    worst = std::max(worst, std::abs(amalgam_norm(f, sp, exec) - lp) / lp);
                }
            }
        const double secs = seconds_since(start);
        return std::pair{worst < 1e-3 && secs < 10.0, "worst relative gap " + num(worst) + ", " + num(secs) + " s"};
    });

    const Grid gh = make_grid(1, 4.0, 512);
    const auto triples = seeded_triples(gh, 100, 9);

    criterion(2, "Hoelder inequality", [&] {
        const auto start = std::chrono::steady_clock::now();
        double worst = std::numeric_limits<double>::infinity();
        int q1 = 0;
        for (const auto& tr : triples) {
            const auto d = holder_defect(sample(tr.f, gh), sample(tr.g, gh), tr.space(gh), exec);
            worst = std::min(worst, d);
            q1 += tr.q == 1.0;
        }
        const double secs = seconds_since(start);
        return std::pair{worst >= -1e-9 && q1 > 0 && triples.size() == 100 && secs < 30.0,
                         "min defect " + num(worst) + ", " + std::to_string(q1) + " q = 1 triples, " + num(secs) + " s"};
    });

    criterion(3, "weak norm below strong norm", [&] {
        double worst = 0.0;
        for (const auto& tr : triples) {
            const auto f = sample(tr.f, gh);
            const auto sp = tr.space(gh);
            const double strong = amalgam_norm(f, sp, exec);
            const double weak = weak_amalgam_norm(f, sp, exec);
            if (strong > 0.0)
                worst = std::max(worst, weak / strong);
        }
        return std::pair{worst <= 1.0 + 1e-9, "max weak/strong " + num(worst)};
    });

    criterion(4, "A_p algebra", [&] {
        const Grid g = make_grid(1, 4.0, 512);
        BallFamily family;
        const auto base = BallFamily::grid_centered(g, 13, RadiusLadder::dyadic(g));
        for (std::size_t i = 0; i < base.balls.size() && family.balls.size() < 200; ++i)
            family.balls.push_back(base.balls[i]);
        const std::vector<std::string> weights{"power:0.5", "power:-0.25", "shifted_power:1", "exp:0.5", "random:3"};
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
        double duality = 0.0, power = 0.0;
        std::size_t checks = 0;
        for (const auto& spec : weights) {
            const auto w = make_weight(spec, g);
            for (double p : {1.5, 2.0, 3.0}) {
                const double pp = p / (p - 1.0);
                // w^{1-p'} sampled directly.
                SampledField dual = SampledField::zeros(g);
                for (std::size_t k = 0; k < g.size(); ++k)
                    dual[k] = std::pow(w.field[k], 1.0 - pp);
                const auto dw = make_weight_field(dual);
                for (const auto& b : family.balls) {
                    duality = std::max(duality, rel(ap_quantity(dw, b, pp), std::pow(ap_quantity(w, b, p), pp - 1.0)));
                    ++checks;
                }
                for (double q : {2.0, 3.0, 4.0}) {
                    if (q <= p)
                        continue;
                    SampledField wq = SampledField::zeros(g);
                    for (std::size_t k = 0; k < g.size(); ++k)
                        wq[k] = std::pow(w.field[k], q);
                    const auto wqw = make_weight_field(wq);
                    for (const auto& b : family.balls) {
                        power = std::max(power, rel(std::pow(apq_quantity(w, b, p, q), q), ap_quantity(wqw, b, 1.0 + q / pp)));
                        ++checks;
                    }
                }
            }
        }
        bool unit = true;
        for (double p : {1.5, 2.0, 3.0})
            unit = unit && ap_constant(unit_weight(g), p, base, exec).constant == 1.0;
        return std::pair{duality <= 1e-10 && power <= 1e-10 && unit && family.balls.size() == 200,
                         std::to_string(checks) + " ball checks, duality " + num(duality) + ", power " + num(power)};
    });

    criterion(5, "power weight boundary behaviour", [&] {
        const auto estimate = [&](const std::string& spec, int n) {
            const Grid g = make_grid(1, 4.0, n);
            std::vector<double> radii;
            for (double r = g.spacing; r <= 2.0; r *= 2.0)
                radii.push_back(r);
            const auto ladder = RadiusLadder::from(g, radii);
            auto family = BallFamily::grid_centered(g, n / 256, ladder);
            for (const auto& b : BallFamily::around({{0.0, 0.0}}, ladder).balls)
                family.balls.push_back(b);
            return ap_constant(make_weight(spec, g), 2.0, family, exec).constant;
        };
        const double a = estimate("power:0.5", 4096), b = estimate("power:0.5", 8192);
        const double lo = estimate("power:1.2", 1024), hi = estimate("power:1.2", 8192);
        return std::pair{b >= 4.0 / 3.0 && std::abs(b / a - 1.0) <= 0.05 && hi >= 1.3 * lo,
                         "|x|^0.5: " + num(a) + " -> " + num(b) + ", |x|^1.2: " + num(lo) + " -> " + num(hi)};
    });

    criterion(6, "closed-form operator values", [&] {
        const Grid g = make_grid(1, 4.0, 2048);
        const std::size_t at2 = nearest(g, 2.0);
        const double x2 = g.point(at2)[0];
        const double m = maximal_centered(make("indicator:0,1", g), RadiusLadder::dyadic(g), exec)[at2];
        const double hil = cz_apply(make("indicator:-1,1", g), CzKernel::hilbert, g.spacing, exec)[at2];
        const double hil_want = std::log((x2 + 1.0) / (x2 - 1.0)) / std::numbers::pi;
        const double gamma_half = std::sqrt(std::numbers::pi) * std::sqrt(2.0) * std::tgamma(0.25) / std::tgamma(0.25);
        const double ri = riesz_potential_at(make("indicator:0,1", g), 0.5, 0.0);
        const double ri_want = 2.0 / gamma_half;
        const auto H = hardy_op(make("indicator:-1,1", g));
        double hardy = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double ax = std::abs(g.point(k)[0]);
            const double want = ax <= 1.0 ? 2.0 : 2.0 / ax;
            const double tol = ax <= 1.0 ? 2.0 * g.spacing / ax : 2.0 * g.spacing;
            hardy = std::max(hardy, std::abs(H[k] - want) / tol);
        }
        const bool ok = std::abs(m - 0.25) <= 2.0 * g.spacing && std::abs(hil - hil_want) <= 1e-2 &&
                        std::abs(ri - ri_want) <= 1e-3 && hardy <= 1.0;
        return std::pair{ok, "M " + num(m) + ", H " + num(hil) + " vs " + num(hil_want) + ", I " + num(ri) + " vs " +
                                 num(ri_want) + ", Hardy error/tol " + num(hardy)};
    });

    criterion(7, "pointwise maximal decomposition", [&] {
        const Grid g = make_grid(1, 4.0, 512);
        std::size_t direct = 0, library = 0;
        for (const char* spec : {"indicator:0,1", "gaussian:0.5", "random_smooth:1"}) {
            const auto f = make(spec, g);
            direct += pointwise_violations(f, 0.5);
            library += pointwise_maximal_check(f, 0.5, RadiusLadder::dyadic(g), exec).violations();
        }
        return std::pair{direct == 0 && library == 0,
                         "violations: direct " + std::to_string(direct) + ", library " + std::to_string(library)};
    });

    criterion(8, "Bochner-Riesz spectral contract", [&] {
        double mean_err = 0.0;
        bool dominates = true;
        for (int dim : {1, 2}) {
            const Grid g = dim == 1 ? make_grid(1, 4.0, 512) : make_grid(2, 4.0, 64);
            const auto f = make("random_smooth:5", g);
            double sf = 0.0;
            for (double x : f.values)
                sf += x;
            const std::vector<double> radii{1.0, 2.0, 4.0, 8.0};
            const auto mx = bochner_riesz_maximal(f, 0.5, radii);
            for (double R : radii) {
                const auto tr = bochner_riesz(f, {0.5, R});
                double st = 0.0;
                for (double x : tr.values)
                    st += x;
                mean_err = std::max(mean_err, std::abs(st - sf) * std::pow(g.spacing, dim));
                for (std::size_t k = 0; k < f.size(); ++k)
                    dominates = dominates && mx[k] >= std::abs(tr[k]);
            }
        }
        const Grid g = make_grid(1, 4.0, 2048);
        const auto f = make("gaussian:0.5", g);
        const auto t = bochner_riesz(f, {0.5, 100.0});
        double num2 = 0.0, den2 = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            num2 += (t[k] - f[k]) * (t[k] - f[k]);
            den2 += f[k] * f[k];
        }
        const double err = std::sqrt(num2 / den2);
        return std::pair{mean_err <= 1e-10 && dominates && err < 1e-2,
                         "mean error " + num(mean_err) + ", recovery error " + num(err) +
                             (dominates ? ", maximal dominates" : ", maximal does not dominate")};
    });

    criterion(9, "t-uniformity against pinned spreads", [&] {
        const auto start = std::chrono::steady_clock::now();
        const Fixtures fx = Fixtures::load(AMALGAM_FIXTURES);
        const Grid g = reference_grid(1);
        const auto family = TestFamily::standard(g, 1);
        const auto ts = standard_t_grid(g);
        int ok = 0, total = 0;
        std::string worst;
        double worst_frac = 0.0;
        for (const auto& c : standard_theorem_cases()) {
            ++total;
            const auto pinned = fx.find(sweep_fixture_id(c), config_hash(sweep_fixture_config(c, g, ts, family)));
            if (!pinned)
                continue;
            const double spread = sweep_t(c, family, g, ts, exec).spread;
            const double frac = spread / (pinned->value * fixture_headroom);
            if (frac <= 1.0)
                ++ok;
            if (frac > worst_frac) {
                worst_frac = frac;
                worst = c.label();
            }
        }
        const double secs = seconds_since(start);
        return std::pair{ok == total && total == 16 && secs < 300.0,
                         std::to_string(ok) + "/" + std::to_string(total) + " within limit, closest " + worst +
                             " at " + num(worst_frac) + " of limit, " + num(secs) + " s"};
    });

    criterion(10, "deterministic verify reports", [&] {
        const std::string cli = AMALGAM_CLI;
        const std::string a = "acceptance_verify_a", b = "acceptance_verify_b";
        const int ra = std::system((cli + " verify all --out " + a + ".json > " + a + ".txt 2>&1").c_str());
        const int rb = std::system((cli + " verify all --out " + b + ".json > " + b + ".txt 2>&1").c_str());
        const std::string ja = slurp(a + ".json"), jb = slurp(b + ".json");
        const std::string ta = slurp(a + ".txt"), tb = slurp(b + ".txt");
        const bool ok = ra == 0 && rb == 0 && !ja.empty() && ja == jb && ta == tb;
        for (const auto& s : {a, b}) {
            std::remove((s + ".json").c_str());
            std::remove((s + ".txt").c_str());
        }
        return std::pair{ok, "exit " + std::to_string(ra) + "/" + std::to_string(rb) + ", " + std::to_string(ja.size()) +
                                 " report bytes" + (ja == jb && ta == tb ? ", identical" : ", differ")};
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
