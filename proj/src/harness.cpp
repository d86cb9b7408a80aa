#include "amalgam/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amalgam/rng.hpp"

namespace amalgam {

using json = nlohmann::json;

std::string format_double(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    if (std::isnan(x))
        return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

FunctionSpec spec_of(const std::string& text)
{
    return parse_function_spec(text);
}

std::string join(const std::vector<double>& xs)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i)
            s += ',';
        s += format_double(xs[i]);
    }
    return s;
}

json number(double x)
{
    if (std::isfinite(x))
        return x;
    return format_double(x);
}

std::optional<double> power_exponent(const std::string& spec)
{
    if (spec.rfind("power:", 0) == 0)
        return std::stod(spec.substr(6));
    if (spec.rfind("const:", 0) == 0)
        return 0.0;
    try {
        std::size_t used = 0;
        std::stod(spec, &used);
        if (used == spec.size())
            return 0.0;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

// Closed-form class membership of |x|^a.
bool power_in_ap(double a, double p, int n)
{
    if (std::isinf(p))
        return a > -n;
    if (p == 1.0)
        return a > -n && a <= 0.0;
    return a > -n && a < n * (p - 1.0);
}

bool power_in_apq(double a, double p, double q, int n)
{
    // w in A_{p,q} iff w^q in A_{1 + q/p'}.
    const double index = p == 1.0 ? 1.0 : 1.0 + q / conjugate_exponent(p);
    return power_in_ap(a * q, index, n);
}

void require_class(const std::string& spec, bool ok, const std::string& what)
{
    if (!ok)
        throw ParameterError("weight '" + spec + "' violates the hypothesis " + what);
}

bool close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

// -----------------------------------------------------------------------------
// Families and cases

TestFamily TestFamily::standard(const Grid& grid, std::uint64_t seed)
{
    const double s = grid.half_width / 4.0;
    auto f = [](double x) { return format_double(x); };
    TestFamily fam;
    fam.seed = seed;
    fam.label = "standard";
    std::vector<std::string> texts;
    if (grid.dim == 1) {
        texts = {"indicator:" + f(0) + "," + f(s),
                 "indicator:" + f(-1.5 * s) + "," + f(-0.5 * s),
                 "indicator:" + f(-0.25 * s) + "," + f(0.25 * s),
                 "gaussian:" + f(0.25 * s),
                 "gaussian:" + f(0.5 * s) + "," + f(0.5 * s),
                 "gaussian:" + f(s),
                 "bump:" + f(0) + "," + f(s),
                 "bump:" + f(-s) + "," + f(0.5 * s)};
    } else {
        texts = {"indicator:" + f(0) + "," + f(s) + "," + f(0) + "," + f(s),
                 "indicator:" + f(-1.5 * s) + "," + f(-0.5 * s) + "," + f(-0.5 * s) + "," + f(0.5 * s),
                 "indicator:" + f(-0.25 * s) + "," + f(0.25 * s) + "," + f(-0.25 * s) + "," + f(0.25 * s),
                 "gaussian:" + f(0.25 * s),
                 "gaussian:" + f(0.5 * s) + "," + f(0.5 * s) + "," + f(0),
                 "gaussian:" + f(s),
                 "bump:" + f(0) + "," + f(0) + "," + f(s),
                 "bump:" + f(-s) + "," + f(0.5 * s) + "," + f(0.5 * s)};
    }
    texts.push_back("oscillatory:" + f(4.0 / s));
    texts.push_back("oscillatory:" + f(12.0 / s));
    texts.push_back("random_smooth:" + std::to_string(seed));
    texts.push_back("random_smooth:" + std::to_string(seed + 1));
    for (const auto& t : texts)
        fam.specs.push_back(spec_of(t));
    return fam;
}

std::vector<SampledField> TestFamily::sample_all(const Grid& grid) const
{
    if (specs.empty())
        throw ParameterError("test family must not be empty");
    std::vector<SampledField> out;
    out.reserve(specs.size());
    for (const auto& s : specs)
        out.push_back(sample(s, grid));
    return out;
}

std::string TheoremCase::label() const
{
    return theorem_id + (selector == NormSelector::weak ? "/weak" : "/strong");
}

std::string TheoremCase::describe() const
{
    std::ostringstream os;
    os << label() << " op=" << op << " p=" << format_double(p) << " q=" << format_double(q)
       << " p_target=" << format_double(p_target) << " q_target=" << format_double(q_target) << " w=" << w
       << " v=" << v;
    return os.str();
}

void TheoremCase::validate(int dim) const
{
    const auto parsed = parse_operator_spec(op);
    using Kind = OperatorSpec::Kind;
    const bool weak = selector == NormSelector::weak;
    if (!(p > 1.0) || std::isinf(p))
        throw ParameterError(label() + ": source p must satisfy 1 < p < infinity");
    if (weak ? q != 1.0 : !(q > 1.0))
        throw ParameterError(label() + (weak ? ": weak cases need q = 1" : ": strong cases need q > 1"));
    if (std::isinf(q) && theorem_id != "Thm-M")
        throw ParameterError(label() + ": q = infinity is only covered for the maximal operator");

    const auto wa = power_exponent(w);
    const auto va = power_exponent(v);

    if (theorem_id == "Thm-Riesz") {
        if (parsed.kind != Kind::riesz)
            throw ParameterError(label() + ": operator must be a Riesz potential");
        const double a = parsed.alpha / dim;
        if (!close(1.0 / p - 1.0 / p_target, a, 1e-12) || !close(1.0 / q - 1.0 / q_target, a, 1e-12))
            throw ParameterError(label() + ": exponents must satisfy alpha/n = 1/p0 - 1/p = 1/q0 - 1/q");
        const double limit = dim / parsed.alpha;
        if (!(p_target > 1.0 && p_target < limit && q_target > 1.0 && q_target < limit))
            throw ParameterError(label() + ": target exponents must lie in (1, n/alpha)");
        if (wa)
            require_class(w, power_in_apq(*wa, p, p_target, dim), "w in A_{p0,p}");
        if (va)
            require_class(v, power_in_apq(*va, q, q_target, dim), weak ? "v in A_{1,q}" : "v in A_{q0,q}");
        return;
    }

    if (p_target != p || q_target != q)
        throw ParameterError(label() + ": source and target exponents must agree");
    static const std::vector<std::pair<std::string, Kind>> expected = {
        {"Thm-M", Kind::maximal},    {"Thm-CZ", Kind::cz},         {"Thm-TOmega", Kind::rough},
        {"Thm-Mu", Kind::marcinkiewicz}, {"Thm-g", Kind::g},       {"Thm-S", Kind::intrinsic},
        {"identity", Kind::identity}};
    bool known = false;
    for (const auto& [id, kind] : expected)
        if (id == theorem_id) {
            known = true;
            if (parsed.kind != kind)
                throw ParameterError(label() + ": operator does not match the theorem");
        }
    if (theorem_id == "Thm-BR") {
        known = true;
        const auto want = weak ? Kind::bochner_riesz : Kind::bochner_riesz_maximal;
        if (parsed.kind != want)
            throw ParameterError(label() + (weak ? ": weak case uses a fixed R" : ": strong case uses the maximal operator"));
        if (dim >= 2 && !close(parsed.delta, (dim - 1) / 2.0, 1e-12))
            throw ParameterError(label() + ": delta must be (n-1)/2");
    }
    if (!known)
        throw ParameterError("unknown theorem id '" + theorem_id + "'");
    if (wa)
        require_class(w, power_in_ap(*wa, p, dim), "w in A_p");
    if (va)
        require_class(v, power_in_ap(*va, q, dim), weak ? "v in A_1" : "v in A_q");
}

SpaceParams TheoremCase::source(const Grid& grid, double t) const
{
    return SpaceParams{p, q, clamp_radius(grid, t), make_weight(w, grid), make_weight(v, grid)};
}

SpaceParams TheoremCase::target(const Grid& grid, double t) const
{
    return SpaceParams{p_target, q_target, clamp_radius(grid, t), make_weight(w, grid), make_weight(v, grid)};
}

std::vector<TheoremCase> standard_theorem_cases()
{
    const std::string w = "power:0.3";
    const std::string v = "power:0.2";
    const std::string v1 = "power:-0.2";
    std::vector<TheoremCase> cases;
    auto both = [&](const std::string& id, const std::string& op, const std::string& weak_op) {
        cases.push_back({id, op, 2.0, 2.0, 2.0, 2.0, w, v, NormSelector::strong});
        cases.push_back({id, weak_op, 2.0, 1.0, 2.0, 1.0, w, v1, NormSelector::weak});
    };
    both("Thm-M", "M", "M");
    both("Thm-CZ", "CZ:hilbert", "CZ:hilbert");
    cases.push_back({"Thm-Riesz", "I:alpha=0.2", 2.0, 2.0, 10.0 / 3.0, 10.0 / 3.0, w, v, NormSelector::strong});
    cases.push_back({"Thm-Riesz", "I:alpha=0.2", 2.0, 1.0, 10.0 / 3.0, 1.25, w, v1, NormSelector::weak});
    both("Thm-TOmega", "TOmega:sgn", "TOmega:sgn");
    both("Thm-Mu", "mu:sgn", "mu:sgn");
    both("Thm-BR", "BRmax:delta=0.5", "BR:delta=0.5,R=8");
    both("Thm-g", "g", "g");
    both("Thm-S", "S:alpha=0.5,K=8", "S:alpha=0.5,K=8");
    return cases;
}

// -----------------------------------------------------------------------------
// Ratios and sweeps

std::string RatioReport::to_json() const
{
    json j;
    j["theorem_id"] = theorem_id;
    j["params"] = params;
    j["t"] = t;
    j["max_ratio"] = number(max_ratio);
    j["argmax_spec"] = argmax_spec;
    j["entries"] = json::array();
    for (const auto& e : entries)
        j["entries"].push_back({{"spec", e.spec},
                                {"source_norm", number(e.source_norm)},
                                {"target_norm", number(e.target_norm)},
                                {"ratio", number(e.ratio)},
                                {"skipped", e.skipped}});
    j["notes"] = notes;
    return j.dump(2);
}

std::string SweepReport::to_json() const
{
    json j;
    j["theorem_id"] = theorem_id;
    j["label"] = label;
    j["t_values"] = t_values;
    j["max_ratio"] = max_ratio;
    j["spread"] = number(spread);
    j["at_t"] = json::array();
    for (const auto& r : at_t)
        j["at_t"].push_back(json::parse(r.to_json()));
    return j.dump(2);
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::string SweepReport::to_csv(bool header) const
{
    std::ostringstream os;
    if (header)
        os << "theorem_id,t,spec,source_norm,target_norm,ratio\n";
    for (const auto& r : at_t) {
        const RatioEntry* best = nullptr;
        for (const auto& e : r.entries)
            if (!e.skipped && e.spec == r.argmax_spec) {
                best = &e;
                break;
            }
        if (!best)
            continue;
        os << csv_field(label) << ',' << format_double(r.t) << ',' << csv_field(best->spec) << ','
           << format_double(best->source_norm) << ',' << format_double(best->target_norm) << ','
           << format_double(best->ratio) << '\n';
    }
    return os.str();
}

namespace {

std::vector<RatioReport> evaluate(const TheoremCase& c, const TestFamily& family, const Grid& grid,
                                  const std::vector<double>& ts, Exec exec)
{
    c.validate(grid.dim);
    const auto op = parse_operator_spec(c.op);
    const auto inputs = family.sample_all(grid);
    std::vector<SampledField> outputs;
    outputs.reserve(inputs.size());
    for (const auto& f : inputs)
        outputs.push_back(apply_operator(op, f, exec));

    std::vector<RatioReport> reports;
    for (double t : ts) {
        const SpaceParams src = c.source(grid, t);
        const SpaceParams dst = c.target(grid, t);
        RatioReport r;
        r.theorem_id = c.label();
        r.params = "source{" + src.describe() + "} target{" + dst.describe() + "}";
        r.t = src.t;
        bool any = false;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            RatioEntry e;
            e.spec = family.specs[i].to_string();
            e.source_norm = amalgam_norm(inputs[i], src, exec);
            if (e.source_norm == 0.0) {
                e.skipped = true;
                r.notes.push_back("skipped zero-norm input " + e.spec);
                r.entries.push_back(e);
                continue;
            }
            e.target_norm = c.selector == NormSelector::weak ? weak_amalgam_norm(outputs[i], dst, exec)
                                                              : amalgam_norm(outputs[i], dst, exec);
            e.ratio = e.target_norm / e.source_norm;
            if (!std::isfinite(e.ratio))
                throw NumericError("non-finite ratio for " + e.spec);
            if (!any || e.ratio > r.max_ratio) {
                r.max_ratio = e.ratio;
                r.argmax_spec = e.spec;
            }
            any = true;
            r.entries.push_back(e);
        }
        if (!any)
            throw ParameterError("every family member has zero norm");
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace

RatioReport op_norm_estimate(const TheoremCase& c, const TestFamily& family, const Grid& grid, double t, Exec exec)
{
    return evaluate(c, family, grid, {t}, exec).front();
}

SweepReport sweep_t(const TheoremCase& c, const TestFamily& family, const Grid& grid, std::vector<double> t_grid,
                    Exec exec)
{
    if (t_grid.empty())
        throw ParameterError("t grid must not be empty");
    for (double& t : t_grid)
        t = clamp_radius(grid, t);
    std::sort(t_grid.begin(), t_grid.end());
    t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());
    SweepReport s;
    s.theorem_id = c.theorem_id;
    s.label = c.label();
    s.t_values = t_grid;
    s.at_t = evaluate(c, family, grid, t_grid, exec);
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < s.at_t.size(); ++i) {
        const double m = s.at_t[i].max_ratio;
        s.max_ratio.push_back(m);
        lo = i == 0 ? m : std::min(lo, m);
        hi = i == 0 ? m : std::max(hi, m);
    }
    s.spread = hi / lo;
    return s;
}

std::vector<double> parse_t_grid(const std::string& text, const Grid& grid)
{
    std::vector<double> ts;
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size() && v > 0.0)
                return v;
        } catch (const std::exception&) {
        }
        throw ParameterError("bad t value '" + s + "' in t grid '" + text + "'");
    };
    const auto c1 = text.find(':');
    if (c1 != std::string::npos) {
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos || text.substr(c2 + 1) != "dyadic")
            throw ParameterError("t grid must be start:end:dyadic or a comma list");
        const double start = num(text.substr(0, c1));
        const double end = num(text.substr(c1 + 1, c2 - c1 - 1));
        if (end < start)
            throw ParameterError("t grid end must not precede its start");
        for (double t = start; t <= end * (1.0 + 1e-12); t *= 2.0)
            ts.push_back(t);
    } else {
        std::stringstream ss(text);
        std::string piece;
        while (std::getline(ss, piece, ','))
            ts.push_back(num(piece));
    }
    if (ts.empty())
        throw ParameterError("t grid must not be empty");
    for (double& t : ts)
        t = clamp_radius(grid, t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

std::vector<double> standard_t_grid(const Grid& grid)
{
    std::vector<double> ts;
    for (int k = 6; k >= 0; --k)
        ts.push_back(std::ldexp(grid.half_width / 4.0, -k));
    for (double& t : ts)
        t = clamp_radius(grid, t);
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

// -----------------------------------------------------------------------------
// Dilation comparability

std::string ScalingReport::to_json() const
{
    json j;
    j["rows"] = json::array();
    for (const auto& r : rows)
        j["rows"].push_back({{"alpha", r.alpha}, {"ratio", r.ratio}, {"normalized", r.normalized}});
    j["needed_k"] = needed_k;
    return j.dump(2);
}

ScalingReport scaling_check(const SampledField& f, const SpaceParams& params, const std::vector<double>& alphas,
                            Exec exec)
{
    if (alphas.empty())
        throw ParameterError("scaling check needs at least one alpha");
    params.validate(f.grid);
    const double base = amalgam_norm(f, params, exec);
    if (!(base > 0.0))
        throw ParameterError("scaling check needs a function of positive norm");
    ScalingReport report;
    for (double a : alphas) {
        if (!(a > 0.0))
            throw ParameterError("dilation factors must be positive");
        SpaceParams scaled = params;
        scaled.t = a * params.t;
        try {
            scaled.validate(f.grid);
        } catch (const ParameterError&) {
            throw ParameterError("dilated radius alpha t = " + format_double(scaled.t) + " is not admissible");
        }
        ScalingReport::Row row;
        row.alpha = a;
        row.ratio = a == 1.0 ? 1.0 : amalgam_norm(f, scaled, exec) / base;
        row.normalized = row.ratio / std::pow(a, f.grid.dim * params.p);
        report.needed_k = std::max({report.needed_k, 1.0 / row.ratio, row.normalized});
        report.rows.push_back(row);
    }
    return report;
}

// -----------------------------------------------------------------------------
// Pointwise maximal decomposition

std::string PointwiseReport::to_json() const
{
    json j;
    j["pairs"] = pairs;
    j["violations_part1"] = violations_part1;
    j["violations_part2"] = violations_part2;
    j["worst_slack_part1"] = worst_slack_part1;
    j["worst_slack_part2"] = worst_slack_part2;
    return j.dump(2);
}

PointwiseReport pointwise_maximal_check(const SampledField& f, double t, const RadiusLadder& ladder, Exec exec)
{
    const Grid& grid = f.grid;
    if (!(t >= grid.spacing) || 2.0 * t > 2.0 * grid.half_width)
        throw ParameterError("pointwise check needs h <= t and 2t inside the cube");
    if (ladder.radii.empty())
        throw ParameterError("radius ladder must not be empty");
    const std::size_t n = f.size();
    const std::size_t m = ladder.radii.size();
    const int N = grid.points_per_axis;
    std::vector<BallStencil> stencils;
    for (double r : ladder.radii)
        stencils.push_back(BallStencil::make(grid, r));
    std::vector<double> magnitude(n);
    for (std::size_t k = 0; k < n; ++k)
        magnitude[k] = std::abs(f[k]);

    // Average of |f| (times a 0/1 mask) over B(y, r_i), stencil order.
    auto average = [&](std::size_t y, std::size_t i, auto&& mask) {
        const int ci = grid.axis_index(y, 0);
        const int cj = grid.dim == 1 ? 0 : grid.axis_index(y, 1);
        double s = 0.0;
        std::size_t count = 0;
        for (const auto& o : stencils[i].offsets) {
            const int a = ci + o[0];
            const int b = cj + o[1];
            if (a < 0 || a >= N || b < 0 || b >= N)
                continue;
            const std::size_t z = grid.index(a, b);
            s += magnitude[z] * mask(z);
            ++count;
        }
        return s / static_cast<double>(count);
    };

    std::vector<double> plain(n * m);
    parallel_for(n, exec, [&](std::size_t y) {
        for (std::size_t i = 0; i < m; ++i)
            plain[y * m + i] = average(y, i, [](std::size_t) { return 1.0; });
    });

    const WeightField unit = unit_weight(grid);
    const SampledField u = inner_ball_norm(f, unit, 1.0, t, exec);
    const SampledField mbar = maximal_uncentered(u, BallFamily::grid_centered(grid, 1, ladder), exec);
    const double two_n = grid.dim == 1 ? 2.0 : 4.0;
    const auto near = BallStencil::make(grid, t);

    struct Tally {
        std::size_t pairs = 0, v1 = 0, v2 = 0;
        double s1 = std::numeric_limits<double>::infinity();
        double s2 = std::numeric_limits<double>::infinity();
    };
    std::vector<Tally> tallies(n);
    parallel_for(n, exec, [&](std::size_t x) {
        Tally& tally = tallies[x];
        const Point px = grid.point(x);
        const double reach2 = 4.0 * t * t;
        auto in_double_ball = [&](std::size_t z) {
            const Point pz = grid.point(z);
            const double d2 = detail::sq(pz[0] - px[0]) + detail::sq(pz[1] - px[1]);
            return d2 < reach2 ? 1.0 : 0.0;
        };
        const double rhs2 = two_n * mbar[x] + 1e-9;
        near.for_each(grid, x, [&](std::size_t y) {
            ++tally.pairs;
            double masked_max = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                masked_max = std::max(masked_max, average(y, i, in_double_ball));
            for (std::size_t i = 0; i < m; ++i) {
                const double lhs = plain[y * m + i];
                if (ladder.radii[i] <= t) {
                    tally.s1 = std::min(tally.s1, masked_max - lhs);
                    if (lhs > masked_max)
                        ++tally.v1;
                } else {
                    tally.s2 = std::min(tally.s2, rhs2 - lhs);
                    if (lhs > rhs2)
                        ++tally.v2;
                }
            }
        });
    });
    PointwiseReport report;
    double s1 = std::numeric_limits<double>::infinity();
    double s2 = std::numeric_limits<double>::infinity();
    for (const auto& tl : tallies) {
        report.pairs += tl.pairs;
        report.violations_part1 += tl.v1;
        report.violations_part2 += tl.v2;
        s1 = std::min(s1, tl.s1);
        s2 = std::min(s2, tl.s2);
    }
    report.worst_slack_part1 = std::isinf(s1) ? 0.0 : s1;
    report.worst_slack_part2 = std::isinf(s2) ? 0.0 : s2;
    return report;
}

// -----------------------------------------------------------------------------
// Weight identities

std::string IdentityReport::to_json() const
{
    json j;
    j["checks"] = checks;
    j["failures"] = failures;
    j["worst_duality"] = worst_duality;
    j["worst_power"] = worst_power;
    j["stability"] = json::array();
    for (const auto& s : stability)
        j["stability"].push_back(
            {{"weight", s.weight}, {"p", s.p}, {"q", s.q}, {"coarse", number(s.coarse)}, {"fine", number(s.fine)}});
    j["notes"] = notes;
    return j.dump(2);
}

IdentityReport weight_identity_suite(const Grid& grid, const std::vector<std::string>& w_specs,
                                     const std::vector<double>& p_list, const std::vector<double>& q_list,
                                     const BallFamily& family, Exec exec)
{
    if (family.balls.empty())
        throw ParameterError("ball family must not be empty");
    IdentityReport report;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
    const Grid fine = make_grid(grid.dim, grid.half_width, 2 * grid.points_per_axis);
    for (const auto& spec : w_specs) {
        const WeightField w = make_weight(spec, grid);
        for (double p : p_list) {
            if (p > 1.0) {
                const double pp = conjugate_exponent(p);
                const WeightField d = dual_weight(w, p);
                std::vector<double> err(family.balls.size());
                parallel_for(err.size(), exec, [&](std::size_t i) {
                    const double a = ap_quantity(d, family.balls[i], pp);
                    const double b = std::pow(ap_quantity(w, family.balls[i], p), pp - 1.0);
                    err[i] = rel(a, b);
                });
                for (double e : err) {
                    ++report.checks;
                    report.worst_duality = std::max(report.worst_duality, e);
                    if (!(e <= 1e-10))
                        ++report.failures;
                }
            }
            for (double q : q_list) {
                if (!(q > p) || p == 1.0)
                    continue;
                const double index = 1.0 + q / conjugate_exponent(p);
                const WeightField wq = pow_weight(w, q);
                std::vector<double> err(family.balls.size());
                parallel_for(err.size(), exec, [&](std::size_t i) {
                    const double a = std::pow(apq_quantity(w, family.balls[i], p, q), q);
                    const double b = ap_quantity(wq, family.balls[i], index);
                    err[i] = rel(a, b);
                });
                for (double e : err) {
                    ++report.checks;
                    report.worst_power = std::max(report.worst_power, e);
                    if (!(e <= 1e-10))
                        ++report.failures;
                }
                const auto a = power_exponent(spec);
                if (a && spec.rfind("power:", 0) == 0 && power_in_apq(*a, p, q, grid.dim)) {
                    IdentityReport::Stability s{spec, p, q, 0.0, 0.0};
                    s.coarse = ap_constant(wq, index, family, exec).constant;
                    s.fine = ap_constant(pow_weight(make_weight(spec, fine), q), index, family, exec).constant;
                    report.stability.push_back(s);
                }
            }
        }
    }
    report.notes.push_back(
        "class index for w^q is 1 + q/p' (= q(n - alpha)/n); the alternative index p(n - alpha)/n "
        "does not follow from the per-ball algebra");
    return report;
}

// -----------------------------------------------------------------------------
// Hoelder triples

SpaceParams HolderTriple::space(const Grid& grid) const
{
    return SpaceParams{p, q, clamp_radius(grid, t), make_weight(w, grid), make_weight(v, grid)};
}

std::string HolderTriple::describe() const
{
    return "f=" + f.to_string() + " g=" + g.to_string() + " p=" + format_double(p) + " q=" + format_double(q) +
           " t=" + format_double(t) + " w=" + w + " v=" + v;
}

std::vector<HolderTriple> seeded_triples(const Grid& grid, std::size_t count, std::uint64_t seed)
{
    Rng rng(seed);
    const auto ts = standard_t_grid(grid);
    const auto family = TestFamily::standard(grid, seed);
    std::vector<HolderTriple> out;
    for (std::size_t i = 0; i < count; ++i) {
        HolderTriple tr;
        auto pick = [&] {
            if (rng.below(3) == 0)
                return family.specs[rng.below(family.specs.size())];
            FunctionSpec s;
            s.kind = FunctionSpec::Kind::random_smooth;
            s.seed = 1000 + rng.below(1000000);
            return s;
        };
        tr.f = pick();
        tr.g = pick();
        tr.p = rng.uniform(1.2, 4.0);
        switch (i % 4) {
        case 0:
            tr.q = 1.0;
            break;
        case 1:
            tr.q = infinity;
            break;
        default:
            tr.q = rng.uniform(1.2, 4.0);
        }
        tr.t = ts[rng.below(ts.size())];
        tr.w = "const:" + format_double(rng.uniform(0.5, 2.0));
        if (tr.q == 1.0)
            tr.v = "shifted_power:" + format_double(rng.uniform(0.0, 1.0));
        else
            tr.v = "random:" + std::to_string(rng.below(1000000));
        out.push_back(tr);
    }
    return out;
}

// -----------------------------------------------------------------------------
// Fixtures

std::uint64_t config_hash(const std::string& text)
{
    return fnv1a(text.data(), text.size());
}

Fixtures Fixtures::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParameterError("cannot open fixtures file '" + path + "'");
    Fixtures fx;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        FixtureRecord r;
        std::string hash, value;
        if (!(ls >> r.suite >> hash >> value >> r.date))
            throw ParameterError(path + ":" + std::to_string(lineno) + ": expected 'suite hash value date'");
        try {
            r.config_hash = std::stoull(hash, nullptr, 16);
            r.value = std::stod(value);
        } catch (const std::exception&) {
            throw ParameterError(path + ":" + std::to_string(lineno) + ": malformed hash or value");
        }
        fx.records_.push_back(r);
    }
    return fx;
}

void Fixtures::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        throw ParameterError("cannot write fixtures file '" + path + "'");
    out << "# suite config_hash value date\n";
    for (const auto& r : records_) {
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.config_hash));
        out << r.suite << ' ' << hash << ' ' << format_double(r.value) << ' ' << r.date << '\n';
    }
}

std::optional<FixtureRecord> Fixtures::find(const std::string& suite, std::uint64_t hash) const
{
    for (const auto& r : records_)
        if (r.suite == suite && r.config_hash == hash)
            return r;
    return std::nullopt;
}

void Fixtures::put(FixtureRecord record)
{
    for (auto& r : records_)
        if (r.suite == record.suite) {
            r = std::move(record);
            return;
        }
    records_.push_back(std::move(record));
}

Grid reference_grid(int dim)
{
    return dim == 1 ? make_grid(1, 4.0, 2048) : make_grid(2, 4.0, 128);
}

std::string sweep_fixture_id(const TheoremCase& c)
{
    return "sweep/" + c.label();
}

std::string sweep_fixture_config(const TheoremCase& c, const Grid& grid, const std::vector<double>& t_grid,
                                 const TestFamily& family)
{
    std::string s = "grid dim=" + std::to_string(grid.dim) + " L=" + format_double(grid.half_width) +
                    " N=" + std::to_string(grid.points_per_axis) + "; " + c.describe() + "; t=" + join(t_grid) +
                    "; family=";
    for (const auto& f : family.specs)
        s += f.to_string() + ";";
    return s;
}

std::string scaling_fixture_id()
{
    return "scaling/gaussian-power0.5-alpha2";
}

std::string scaling_fixture_config(const Grid& grid)
{
    return "grid dim=" + std::to_string(grid.dim) + " L=" + format_double(grid.half_width) +
           " N=" + std::to_string(grid.points_per_axis) + "; f=gaussian:L/8 p=2 q=2 t=L/8 w=power:0.5 v=1 alpha=1,2";
}

ScalingReport reference_scaling(const Grid& grid, Exec exec)
{
    const double L = grid.half_width;
    const SampledField f = sample(spec_of("gaussian:" + format_double(L / 8.0)), grid);
    const SpaceParams params{2.0, 2.0, L / 8.0, make_weight("power:0.5", grid), unit_weight(grid)};
    return scaling_check(f, params, {1.0, 2.0}, exec);
}

}  // namespace amalgam
