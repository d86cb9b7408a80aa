#pragma once

// Empirical verification: operator-norm ratios over seeded test families,
// t-sweeps, the dilation comparability check, the pointwise maximal
// decomposition check, weight identity checks, pinned fixtures and the
// named verification suites used by the CLI.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amalgam/exec.hpp"
#include "amalgam/grid.hpp"
#include "amalgam/operators.hpp"
#include "amalgam/spaces.hpp"
#include "amalgam/weights.hpp"

namespace amalgam {

struct TestFamily {
    std::vector<FunctionSpec> specs;
    std::uint64_t seed = 1;
    std::string label = "default";

    /// 3 indicators, 3 Gaussians, 2 bumps, 2 oscillatory, 2 random_smooth
    /// (seeds `seed`, `seed + 1`), scaled to the half width of `grid`.
    static TestFamily standard(const Grid& grid, std::uint64_t seed = 1);
    std::vector<SampledField> sample_all(const Grid& grid) const;
};

enum class NormSelector { strong, weak };

/// One boundedness statement: Op maps the source space into the target space
/// (or its weak variant). Weights are given as specs and sampled per grid.
struct TheoremCase {
    std::string theorem_id;  // Thm-M, Thm-CZ, Thm-Riesz, Thm-TOmega, Thm-Mu, Thm-BR, Thm-g, Thm-S, identity
    std::string op;          // operator spec
    double p = 2.0;          // source exponents
    double q = 2.0;
    double p_target = 2.0;   // target exponents
    double q_target = 2.0;
    std::string w = "1";
    std::string v = "1";
    NormSelector selector = NormSelector::strong;

    std::string label() const;
    /// Hypotheses of the cited theorem on exponents and (for power and
    /// constant weights) weight classes. Throws ParameterError.
    void validate(int dim) const;
    SpaceParams source(const Grid& grid, double t) const;
    SpaceParams target(const Grid& grid, double t) const;
    std::string describe() const;
};

/// Weighted dim-1 configuration: w = power:0.3, v = power:0.2, p = q = 2, and
/// a weak (q = 1, v = power:-0.2) variant of every theorem.
std::vector<TheoremCase> standard_theorem_cases();

struct RatioEntry {
    std::string spec;
    double source_norm = 0.0;
    double target_norm = 0.0;
    double ratio = 0.0;
    bool skipped = false;  // zero source norm
};

struct RatioReport {
    std::string theorem_id;
    std::string params;
    double t = 0.0;
    std::vector<RatioEntry> entries;
    double max_ratio = 0.0;
    std::string argmax_spec;
    std::vector<std::string> notes;

    std::string to_json() const;
};

struct SweepReport {
    std::string theorem_id;
    std::string label;
    std::vector<double> t_values;
    std::vector<RatioReport> at_t;
    std::vector<double> max_ratio;
    double spread = 1.0;

    std::string to_json() const;
    /// Columns: theorem_id,t,spec,source_norm,target_norm,ratio; one row per
    /// t holding the maximizing family member.
    std::string to_csv(bool header = true) const;
};

RatioReport op_norm_estimate(const TheoremCase& c, const TestFamily& family, const Grid& grid, double t,
                             Exec exec = Exec::parallel);
/// The operator is applied once per family member; norms are evaluated at
/// every t. t values are clamped to [h, L/2] and deduplicated.
SweepReport sweep_t(const TheoremCase& c, const TestFamily& family, const Grid& grid, std::vector<double> t_grid,
                    Exec exec = Exec::parallel);

/// `start:end:dyadic` (doubling) or a comma list; clamped to [h, L/2].
std::vector<double> parse_t_grid(const std::string& text, const Grid& grid);
/// 7 dyadic values ending at L/4.
std::vector<double> standard_t_grid(const Grid& grid);

struct ScalingReport {
    struct Row {
        double alpha = 1.0;
        double ratio = 1.0;       // ||f||_{alpha t} / ||f||_t
        double normalized = 1.0;  // ratio / alpha^{n p}
    };
    std::vector<Row> rows;
    /// Smallest K >= 1 with ratio in [1/K, K alpha^{np}] for every row.
    double needed_k = 1.0;

    std::string to_json() const;
};

ScalingReport scaling_check(const SampledField& f, const SpaceParams& params, const std::vector<double>& alphas,
                            Exec exec = Exec::parallel);

struct PointwiseReport {
    std::size_t pairs = 0;
    std::size_t violations_part1 = 0;
    std::size_t violations_part2 = 0;
    double worst_slack_part1 = 0.0;  // min over pairs of rhs - lhs
    double worst_slack_part2 = 0.0;

    std::size_t violations() const { return violations_part1 + violations_part2; }
    std::string to_json() const;
};

/// For every grid x and sampled y in B(x, t):
///   I:  each ladder average of |f| over B(y, tau), tau <= t, is at most
///       M(f chi_{B(x, 2t)})(y);
///   II: each ladder average over B(y, tau), tau > t, is at most
///       2^n Mbar(u_t)(x) + 1e-9, u_t the ball average of |f| at radius t and
///       Mbar taken over all grid-centred ladder balls.
PointwiseReport pointwise_maximal_check(const SampledField& f, double t, const RadiusLadder& ladder,
                                        Exec exec = Exec::parallel);

struct IdentityReport {
    std::size_t checks = 0;
    std::size_t failures = 0;
    double worst_duality = 0.0;  // relative error
    double worst_power = 0.0;
    struct Stability {
        std::string weight;
        double p = 0.0;
        double q = 0.0;
        double coarse = 0.0;
        double fine = 0.0;
    };
    std::vector<Stability> stability;
    std::vector<std::string> notes;

    std::string to_json() const;
};

/// Per-ball duality identity Q_{p'}(w^{1-p'}) = Q_p(w)^{p'-1} and power
/// identity apq(w, p, q)^q = Q_{1+q/p'}(w^q) on every ball, for every weight
/// spec and exponent pair with p < q. For power weights the class constants of
/// w^q are additionally estimated at N and 2N.
IdentityReport weight_identity_suite(const Grid& grid, const std::vector<std::string>& w_specs,
                                     const std::vector<double>& p_list, const std::vector<double>& q_list,
                                     const BallFamily& family, Exec exec = Exec::parallel);

struct HolderTriple {
    FunctionSpec f;
    FunctionSpec g;
    double p = 2.0;
    double q = 2.0;
    double t = 1.0;
    std::string w;
    std::string v;

    SpaceParams space(const Grid& grid) const;
    std::string describe() const;
};

/// Seeded (f, g, params) triples; every fourth has q = 1 and every fourth
/// q = infinity. Inner weights are constant; outer weights are random for
/// 1 < q <= infinity and bounded below by 1 for q = 1.
std::vector<HolderTriple> seeded_triples(const Grid& grid, std::size_t count, std::uint64_t seed);

// -----------------------------------------------------------------------------
// Fixtures

struct FixtureRecord {
    std::string suite;
    std::uint64_t config_hash = 0;
    double value = 0.0;
    std::string date;
};

class Fixtures {
public:
    static Fixtures load(const std::string& path);
    void save(const std::string& path) const;

    std::optional<FixtureRecord> find(const std::string& suite, std::uint64_t hash) const;
    void put(FixtureRecord record);
    const std::vector<FixtureRecord>& records() const { return records_; }

private:
    std::vector<FixtureRecord> records_;
};

std::uint64_t config_hash(const std::string& text);

/// Reference resolution for pinned constants.
Grid reference_grid(int dim);
/// Suite id and configuration text of the sweep spread of a case.
std::string sweep_fixture_id(const TheoremCase& c);
std::string sweep_fixture_config(const TheoremCase& c, const Grid& grid, const std::vector<double>& t_grid,
                                 const TestFamily& family);
/// Dilation comparability: f = gaussian:0.5, w = power:0.5, v = 1, p = q = 2, alpha = 2.
std::string scaling_fixture_id();
std::string scaling_fixture_config(const Grid& grid);
ScalingReport reference_scaling(const Grid& grid, Exec exec = Exec::parallel);

inline constexpr double fixture_headroom = 1.2;

// -----------------------------------------------------------------------------
// Verification suites

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<Check> checks;

    bool passed() const;
    std::string to_json() const;
};

struct VerifyOptions {
    std::string fixtures_path;
    std::uint64_t seed = 1;
    Exec exec = Exec::parallel;
};

/// Known ids: grid, weights, spaces, operators, harness, theorems.
const std::vector<std::string>& suite_ids();
SuiteResult run_suite(const std::string& id, const VerifyOptions& options);

/// Computes every pinned constant at reference resolution.
Fixtures pin_fixtures(const std::string& date, Exec exec = Exec::parallel);

std::string format_double(double x);

}  // namespace amalgam
