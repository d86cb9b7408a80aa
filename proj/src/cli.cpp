#include "amalgam/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "amalgam/harness.hpp"
#include "amalgam/spaces.hpp"
#include "amalgam/weights.hpp"

#ifndef AMALGAM_DEFAULT_FIXTURES
#define AMALGAM_DEFAULT_FIXTURES ""
#endif

namespace amalgam {

using json = nlohmann::json;

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : ParameterError(source + ":" + std::to_string(line) + ": " + what), line_(line)
{
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool is_identifier(const std::string& s)
{
    static const std::regex re("[A-Za-z_][A-Za-z0-9_]*");
    return std::regex_match(s, re);
}

double to_number(const std::string& text, const std::string& key)
{
    if (text == "inf" || text == "infinity")
        return infinity;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ParameterError("'" + key + "' expects a number, got '" + text + "'");
}

}  // namespace

// -----------------------------------------------------------------------------
// Config

Config Config::parse(std::string_view text, const std::string& source, const std::string& prefix)
{
    static const std::regex key_re(R"((?:^|[,\s]+)([A-Za-z_][A-Za-z0-9_]*)=)");
    Config config;
    std::vector<std::string> blocks;
    if (!prefix.empty())
        blocks.push_back(prefix);
    const std::size_t base_depth = blocks.size();
    auto path = [&](const std::string& key) {
        std::string p;
        for (const auto& b : blocks)
            p += b + ".";
        return p + key;
    };
    auto flush = [&](const std::string& raw, int line) {
        const std::string chunk = trim(raw);
        if (chunk.empty())
            return;
        std::vector<std::smatch> hits;
        for (auto it = std::sregex_iterator(chunk.begin(), chunk.end(), key_re); it != std::sregex_iterator(); ++it)
            hits.push_back(*it);
        if (hits.empty() || hits.front().position(0) != 0)
            throw ConfigError(source, line, "expected key=value, got '" + chunk + "'");
        for (std::size_t i = 0; i < hits.size(); ++i) {
            const auto begin = static_cast<std::size_t>(hits[i].position(0) + hits[i].length(0));
            const auto end = i + 1 < hits.size() ? static_cast<std::size_t>(hits[i + 1].position(0)) : chunk.size();
            std::string value = trim(chunk.substr(begin, end - begin));
            while (!value.empty() && value.back() == ',')
                value = trim(value.substr(0, value.size() - 1));
            if (value.empty())
                throw ConfigError(source, line, "empty value for '" + hits[i].str(1) + "'");
            if (value.find_first_of(" \t") != std::string::npos)
                throw ConfigError(source, line, "unexpected text after '" + hits[i].str(1) + "=" +
                                                    value.substr(0, value.find_first_of(" \t")) + "'");
            const std::string key = path(hits[i].str(1));
            if (config.entries_.count(key))
                throw ConfigError(source, line, "duplicate key '" + key + "'");
            config.entries_[key] = Entry{value, source, line};
        }
    };

    int line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view row = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line;
        if (const auto hash = row.find('#'); hash != std::string_view::npos)
            row = row.substr(0, hash);
        std::string buffer;
        for (char c : row) {
            if (c == '{') {
                const std::string name = trim(buffer);
                if (!is_identifier(name))
                    throw ConfigError(source, line, "block name expected before '{'");
                blocks.push_back(name);
                buffer.clear();
            } else if (c == '}') {
                flush(buffer, line);
                buffer.clear();
                if (blocks.size() == base_depth)
                    throw ConfigError(source, line, "unmatched '}'");
                blocks.pop_back();
            } else {
                buffer += c;
            }
        }
        flush(buffer, line);
    }
    if (blocks.size() != base_depth)
        throw ConfigError(source, line, "unterminated block '" + blocks.back() + "'");
    return config;
}

void Config::merge(const Config& other)
{
    for (const auto& [k, e] : other.entries_)
        entries_[k] = e;
}

void Config::set(const std::string& key, std::string value, std::string source, int line)
{
    entries_[key] = Entry{std::move(value), std::move(source), line};
}

bool Config::has(const std::string& key) const
{
    return entries_.count(key) > 0;
}

std::optional<std::pair<std::string, Config::Entry>> Config::lookup(std::initializer_list<std::string> keys) const
{
    for (const auto& k : keys)
        if (auto it = entries_.find(k); it != entries_.end())
            return *it;
    return std::nullopt;
}

std::optional<std::string> Config::find(std::initializer_list<std::string> keys) const
{
    if (auto hit = lookup(keys))
        return hit->second.value;
    return std::nullopt;
}

std::string Config::text(std::initializer_list<std::string> keys, const std::string& fallback) const
{
    return find(keys).value_or(fallback);
}

std::string Config::require(std::initializer_list<std::string> keys) const
{
    if (auto v = find(keys))
        return *v;
    throw ParameterError("missing required key '" + *keys.begin() + "'");
}

double Config::number(std::initializer_list<std::string> keys, double fallback) const
{
    auto hit = lookup(keys);
    if (!hit)
        return fallback;
    try {
        return to_number(hit->second.value, hit->first);
    } catch (const ParameterError& e) {
        throw ConfigError(hit->second.source, hit->second.line, e.what());
    }
}

double Config::require_number(std::initializer_list<std::string> keys) const
{
    if (!lookup(keys))
        throw ParameterError("missing required key '" + *keys.begin() + "'");
    return number(keys, 0.0);
}

Grid grid_from_config(const Config& config)
{
    const double dim = config.number({"grid.dim"}, 1.0);
    const double L = config.number({"grid.L"}, 4.0);
    const double N = config.number({"grid.N"}, 1024.0);
    if (dim != std::floor(dim) || N != std::floor(N))
        throw ParameterError("grid dim and N must be integers");
    return make_grid(static_cast<int>(dim), L, static_cast<int>(N));
}

// -----------------------------------------------------------------------------
// Commands

namespace {

struct Context {
    Config config;
    Grid grid;
    std::string out_path;
    std::string fixtures_path;
    std::uint64_t seed = 1;
    Exec exec = Exec::parallel;
    std::vector<std::string> positional;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

class AssertionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ParameterError("cannot write '" + path + "'");
    f << content;
}

// Writes to --out when given, otherwise to standard output.
void emit(const Context& ctx, const std::string& content)
{
    if (ctx.out_path.empty())
        *ctx.out << content;
    else
        write_file(ctx.out_path, content);
}

SpaceParams space_from(const Context& ctx)
{
    const Config& c = ctx.config;
    SpaceParams sp;
    sp.p = c.number({"space.p", "p"}, 2.0);
    sp.q = c.number({"space.q", "q"}, 2.0);
    sp.t = c.number({"space.t", "t"}, 1.0);
    sp.w = make_weight(c.text({"space.w", "w"}, "1"), ctx.grid);
    sp.v = make_weight(c.text({"space.v", "v"}, "1"), ctx.grid);
    sp.validate(ctx.grid);
    return sp;
}

SampledField function_from(const Context& ctx)
{
    const std::string spec = ctx.config.require({"f", "function.f"});
    if (spec == "0" || spec == "zero")
        return SampledField::zeros(ctx.grid);
    return sample(parse_function_spec(spec), ctx.grid);
}

int cmd_norm(Context& ctx)
{
    const auto f = function_from(ctx);
    const SpaceParams sp = space_from(ctx);
    json j;
    j["function"] = ctx.config.require({"f", "function.f"});
    j["params"] = sp.describe();
    const double strong = amalgam_norm(f, sp, ctx.exec);
    const double weak = weak_amalgam_norm(f, sp, ctx.exec);
    if (!std::isfinite(strong) || !std::isfinite(weak))
        throw NumericError("norm is not finite at this resolution");
    j["strong"] = strong;
    j["weak"] = weak;
    emit(ctx, j.dump(2) + "\n");
    return exit_pass;
}

int cmd_apconst(Context& ctx)
{
    const Config& c = ctx.config;
    const std::string cls = c.text({"class"}, "ap");
    const WeightField w = make_weight(c.text({"w"}, "1"), ctx.grid);
    const auto ladder = RadiusLadder::dyadic(ctx.grid);
    const double stride = c.number({"stride"}, 1.0);
    if (!(stride >= 1.0) || stride != std::floor(stride))
        throw ParameterError("stride must be a positive integer");
    BallFamily family = BallFamily::grid_centered(ctx.grid, static_cast<int>(stride), ladder);
    for (const auto& b : BallFamily::around({{0.0, 0.0}}, ladder).balls)
        family.balls.push_back(b);

    json j;
    j["class"] = cls;
    if (cls == "a1") {
        j["constant"] = a1_constant(w, ladder, ctx.exec);
    } else {
        ApReport rep;
        if (cls == "ap")
            rep = ap_constant(w, c.require_number({"p"}), family, ctx.exec);
        else if (cls == "apq")
            rep = apq_constant(w, c.require_number({"p"}), c.require_number({"q"}), family, ctx.exec);
        else if (cls == "a1q")
            rep = apq_constant(w, 1.0, c.require_number({"q"}), family, ctx.exec);
        else
            throw ParameterError("class must be ap, a1, apq or a1q");
        j.update(json::parse(rep.to_json()));
    }
    emit(ctx, j.dump(2) + "\n");
    return exit_pass;
}

TheoremCase case_from(const Context& ctx)
{
    const Config& c = ctx.config;
    TheoremCase tc{"identity", "id"};
    const auto selector = c.text({"case.norm", "norm"}, "strong");
    if (selector != "strong" && selector != "weak")
        throw ParameterError("norm must be strong or weak");
    tc.selector = selector == "weak" ? NormSelector::weak : NormSelector::strong;
    if (const auto id = c.find({"case.id", "case"})) {
        bool found = false;
        for (const auto& s : standard_theorem_cases())
            if (s.theorem_id == *id && s.selector == tc.selector) {
                tc = s;
                found = true;
            }
        if (!found)
            throw ParameterError("unknown theorem case '" + *id + "'");
    } else if (tc.selector == NormSelector::weak) {
        tc.q = tc.q_target = 1.0;
    }
    tc.theorem_id = c.text({"case.theorem", "theorem"}, tc.theorem_id);
    tc.op = c.text({"case.op", "op"}, tc.op);
    tc.p = c.number({"case.p", "p"}, tc.p);
    tc.q = c.number({"case.q", "q"}, tc.q);
    tc.p_target = c.number({"case.p_target", "p_target"}, tc.theorem_id == "Thm-Riesz" ? tc.p_target : tc.p);
    tc.q_target = c.number({"case.q_target", "q_target"}, tc.theorem_id == "Thm-Riesz" ? tc.q_target : tc.q);
    tc.w = c.text({"case.w", "w"}, tc.w);
    tc.v = c.text({"case.v", "v"}, tc.v);
    tc.validate(ctx.grid.dim);
    return tc;
}

std::vector<double> t_grid_from(const Context& ctx)
{
    if (const auto t = ctx.config.find({"t"}))
        return parse_t_grid(*t, ctx.grid);
    return standard_t_grid(ctx.grid);
}

int cmd_opnorm(Context& ctx)
{
    const TheoremCase tc = case_from(ctx);
    const auto family = TestFamily::standard(ctx.grid, ctx.seed);
    const double t = ctx.config.number({"t"}, ctx.grid.half_width / 4.0);
    emit(ctx, op_norm_estimate(tc, family, ctx.grid, t, ctx.exec).to_json() + "\n");
    return exit_pass;
}

// Compares a sweep spread against the pinned value, if a fixtures file is given.
void assert_spread(const Context& ctx, const TheoremCase& tc, const SweepReport& s, const TestFamily& family)
{
    if (ctx.fixtures_path.empty())
        return;
    const Fixtures fx = Fixtures::load(ctx.fixtures_path);
    const auto pinned = fx.find(sweep_fixture_id(tc), config_hash(sweep_fixture_config(tc, ctx.grid, s.t_values, family)));
    if (!pinned)
        throw AssertionFailure("no pinned spread for " + tc.label() + " at this configuration");
    const double limit = pinned->value * fixture_headroom;
    if (s.spread > limit)
        throw AssertionFailure(tc.label() + ": spread " + format_double(s.spread) + " exceeds " + format_double(limit));
}

int cmd_sweep(Context& ctx)
{
    const TheoremCase tc = case_from(ctx);
    const auto family = TestFamily::standard(ctx.grid, ctx.seed);
    const auto s = sweep_t(tc, family, ctx.grid, t_grid_from(ctx), ctx.exec);
    emit(ctx, s.to_csv());
    *(ctx.out_path.empty() ? ctx.err : ctx.out) << s.label << " spread " << format_double(s.spread) << "\n";
    assert_spread(ctx, tc, s, family);
    return exit_pass;
}

int cmd_verify(Context& ctx)
{
    std::vector<std::string> ids = ctx.positional;
    if (ids.empty() || (ids.size() == 1 && ids[0] == "all"))
        ids = suite_ids();
    for (const auto& id : ids) {
        bool known = false;
        for (const auto& k : suite_ids())
            known = known || k == id;
        if (!known)
            throw ParameterError("unknown suite '" + id + "'");
    }
    VerifyOptions options{ctx.fixtures_path.empty() ? std::string(AMALGAM_DEFAULT_FIXTURES) : ctx.fixtures_path,
                          ctx.seed, ctx.exec};
    json all = json::array();
    std::ostringstream table;
    bool ok = true;
    table << std::left << std::setw(10) << "suite" << std::setw(28) << "check" << std::setw(7) << "result"
          << "detail\n";
    for (const auto& id : ids) {
        const SuiteResult r = run_suite(id, options);
        ok = ok && r.passed();
        for (const auto& c : r.checks)
            table << std::left << std::setw(10) << r.suite << std::setw(28) << c.name << std::setw(7)
                  << (c.passed ? "PASS" : "FAIL") << c.detail << "\n";
        all.push_back(json::parse(r.to_json()));
    }
    table << (ok ? "all checks passed" : "some checks failed") << "\n";
    *ctx.out << table.str();
    if (!ctx.out_path.empty())
        write_file(ctx.out_path, all.dump(2) + "\n");
    return ok ? exit_pass : exit_failure;
}

std::string utc_timestamp(const char* format)
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, format, &tm);
    return buf;
}

int cmd_report(Context& ctx)
{
    if (ctx.out_path.empty())
        throw ParameterError("report needs --out <prefix>");
    const auto family = TestFamily::standard(ctx.grid, ctx.seed);
    const auto ts = t_grid_from(ctx);
    std::vector<TheoremCase> cases;
    if (ctx.config.find({"case", "case.id"}))
        cases.push_back(case_from(ctx));
    else
        cases = standard_theorem_cases();

    std::string csv;
    json sweeps = json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto s = sweep_t(cases[i], family, ctx.grid, ts, ctx.exec);
        csv += s.to_csv(i == 0);
        sweeps.push_back(json::parse(s.to_json()));
    }
    write_file(ctx.out_path + ".csv", csv);
    write_file(ctx.out_path + ".json", sweeps.dump(2) + "\n");
    json meta;
    meta["timestamp"] = utc_timestamp("%Y-%m-%dT%H:%M:%SZ");
    meta["grid"] = {{"dim", ctx.grid.dim}, {"L", ctx.grid.half_width}, {"N", ctx.grid.points_per_axis}};
    meta["seed"] = ctx.seed;
    meta["cases"] = cases.size();
    write_file(ctx.out_path + ".meta.json", meta.dump(2) + "\n");
    *ctx.out << "wrote " << ctx.out_path << ".csv, .json, .meta.json\n";
    return exit_pass;
}

int cmd_pin(Context& ctx)
{
    if (ctx.fixtures_path.empty())
        throw ParameterError("pin needs --fixtures <path>");
    const std::string date = ctx.config.text({"date"}, utc_timestamp("%Y-%m-%d"));
    const Fixtures fx = pin_fixtures(date, ctx.exec);
    fx.save(ctx.fixtures_path);
    for (const auto& r : fx.records())
        *ctx.out << r.suite << " " << format_double(r.value) << "\n";
    return exit_pass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Weighted amalgam spaces: norms, weight classes and operator-norm sweeps", "amalgam"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string grid_text, config_path;
    Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    bool serial = false;
    app.add_option("--grid", grid_text, "grid spec, e.g. dim=1,L=4,N=1024");
    app.add_option("--out", ctx.out_path, "output path (prefix for report)");
    app.add_option("--fixtures", ctx.fixtures_path, "pinned fixtures file (verify defaults to the bundled one)");
    app.add_option("--seed", ctx.seed, "family and triple seed");
    app.add_option("--config", config_path, "config file");
    app.add_flag("--serial", serial, "use the serial reference kernels");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"norm", "strong and weak amalgam norms of f"},
        {"apconst", "A_p / A_1 / A_{p,q} constant estimate (class=ap|a1|apq|a1q)"},
        {"opnorm", "operator-norm ratios over the test family at one t"},
        {"sweep", "ratio sweep over t; CSV"},
        {"verify", "run verification suites"},
        {"report", "all theorem sweeps as CSV and JSON"},
        {"pin", "measure and store the pinned constants"},
    };
    for (const auto& [name, help] : commands)
        app.add_subcommand(name, help)->add_option("args", ctx.positional, "key=value settings or suite ids");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    ctx.exec = serial ? Exec::serial : Exec::parallel;

    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw ParameterError("cannot open config '" + config_path + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            ctx.config = Config::parse(ss.str(), config_path);
        }
        if (!grid_text.empty())
            ctx.config.merge(Config::parse(grid_text, "--grid", "grid"));
        std::vector<std::string> rest;
        for (const auto& a : ctx.positional) {
            if (a.find('=') != std::string::npos)
                ctx.config.merge(Config::parse(a, "argument"));
            else
                rest.push_back(a);
        }
        ctx.positional = rest;
        if (command != "verify" && !ctx.positional.empty())
            throw ParameterError("unexpected argument '" + ctx.positional.front() + "'");
        ctx.grid = grid_from_config(ctx.config);

        if (command == "norm")
            return cmd_norm(ctx);
        if (command == "apconst")
            return cmd_apconst(ctx);
        if (command == "opnorm")
            return cmd_opnorm(ctx);
        if (command == "sweep")
            return cmd_sweep(ctx);
        if (command == "verify")
            return cmd_verify(ctx);
        if (command == "report")
            return cmd_report(ctx);
        return cmd_pin(ctx);
    } catch (const AssertionFailure& e) {
        err << "assertion failed: " << e.what() << "\n";
        return exit_failure;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const DegenerateBallError& e) {
        err << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
}

}  // namespace amalgam
