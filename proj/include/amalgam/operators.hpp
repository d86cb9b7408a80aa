#pragma once

// Discrete realizations of the operators acting on sampled fields: maximal
// functions, the Hardy operator, truncated Calderon-Zygmund convolutions, the
// rough homogeneous singular integral, the Marcinkiewicz integral, the Riesz
// potential, Bochner-Riesz means and their maximal operator, the
// Littlewood-Paley g-function and the intrinsic square function.
//
// Every supremum (over radii, R, or a bump dictionary) is a maximum over a
// finite set and hence a lower bound. All kernels are data-parallel over
// output points; each output sample is a fixed-order serial reduction, so the
// `Exec::serial` and `Exec::parallel` paths agree bitwise.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "amalgam/exec.hpp"
#include "amalgam/grid.hpp"
#include "amalgam/weights.hpp"

namespace amalgam {

// -----------------------------------------------------------------------------
// Maximal functions and the Hardy operator

/// Per-point averages of |f| over B(x, r) for every ladder radius, laid out as
/// result[k * ladder.size() + i] for point k and radius i.
std::vector<double> ladder_averages(const SampledField& f, const RadiusLadder& ladder, Exec exec = Exec::parallel);

/// M f(x) = max over ladder radii of the mean of |f| over B(x, r).
SampledField maximal_centered(const SampledField& f, const RadiusLadder& ladder, Exec exec = Exec::parallel);

/// max over family balls B containing x of the mean of |f| over B.
/// Throws DegenerateBallError if some grid point lies in no family ball.
SampledField maximal_uncentered(const SampledField& f, const BallFamily& family, Exec exec = Exec::parallel);

/// H f(x) = |x|^{-n} times the integral of |f| over {|y| <= |x|}.
SampledField hardy_op(const SampledField& f);

// -----------------------------------------------------------------------------
// Singular integrals

enum class CzKernel { hilbert, riesz1, riesz2 };

/// K(x, y) as a function of x - y: 1/(pi d) in dim 1, d_j / (2 pi |d|^3) in dim 2.
double cz_kernel(CzKernel kernel, Point diff);

/// sum over |x - y| > eps of K(x, y) f(y) h^n. Requires eps >= h.
SampledField cz_apply(const SampledField& f, CzKernel kernel, double eps, Exec exec = Exec::parallel);

/// Omega on the unit sphere: the two points -1, +1 in dim 1, or M equispaced
/// angles 2 pi m / M in dim 2 (evaluated at the nearest node). Construction
/// subtracts the mean so that the cancellation condition holds.
class SphereFunction {
public:
    static SphereFunction from_samples(int dim, std::vector<double> samples, bool enforce_mean_zero = true);

    int dim() const { return dim_; }
    const std::vector<double>& samples() const { return samples_; }
    bool mean_zero_enforced() const { return mean_zero_; }
    /// Mean with respect to the normalized counting measure on the nodes.
    double mean() const;
    /// Omega at direction d / |d| (d != 0).
    double operator()(Point d) const;

private:
    int dim_ = 1;
    std::vector<double> samples_;
    bool mean_zero_ = true;
};

/// Grammar: `sgn` (dim 1), `cos[:k]`, `sin[:k]` (dim 2, angle k theta),
/// `values:a,b,...` (node values; dim 1 order is Omega(-1), Omega(+1)).
SphereFunction parse_sphere_spec(std::string_view spec, int dim, int nodes = 64);

/// Truncated T_Omega f(x) = sum over |y| > eps of Omega(y') |y|^{-n} f(x - y) h^n.
SampledField rough_singular(const SampledField& f, const SphereFunction& omega, double eps,
                            Exec exec = Exec::parallel);

// -----------------------------------------------------------------------------
// Scale quadrature shared by the square functions

/// Levels t_k with log-widths d(ln t) so that int F(t) dt/t ~ sum F(t_k) width_k.
struct ScaleLadder {
    std::vector<double> levels;
    std::vector<double> log_widths;

    /// t_min, 2 t_min, ... up to t_max, each representing an octave.
    static ScaleLadder dyadic(double t_min, double t_max);
    /// per_octave geometric levels per factor 2, each representing its
    /// log-midpoint cell.
    static ScaleLadder geometric(double t_min, double t_max, int per_octave);
    /// Lower and upper edge of the t-range covered by the cells.
    double lower_edge() const;
    double upper_edge() const;
};

/// mu_Omega f(x)^2 = sum_k |F_k(x)|^2 t_k^{-2} width_k, where F_k(x) is the sum
/// over 0 < |x - y| <= t_k of Omega(x - y) |x - y|^{1-n} f(y) h^n (the self
/// cell is excluded).
SampledField marcinkiewicz(const SampledField& f, const SphereFunction& omega, const ScaleLadder& levels,
                           Exec exec = Exec::parallel);

// -----------------------------------------------------------------------------
// Riesz potential

/// pi^{n/2} 2^alpha Gamma(alpha/2) / Gamma((n - alpha)/2).
double riesz_gamma(int dim, double alpha);
/// Exact integral of |u|^{alpha - n} over one grid cell centred at u = 0.
double riesz_self_cell(const Grid& grid, double alpha);

/// (1/gamma) [sum_{y != x} f(y) |x - y|^{alpha - n} h^n + f(x) self_cell].
SampledField riesz_potential(const SampledField& f, double alpha, Exec exec = Exec::parallel);

/// Dim 1 only: I_alpha f at an arbitrary point, f piecewise constant on the
/// cells and the kernel integrated exactly over every cell.
double riesz_potential_at(const SampledField& f, double alpha, double x);

// -----------------------------------------------------------------------------
// Bochner-Riesz

struct MultiplierSpec {
    double delta = 0.5;
    double R = 1.0;
};

/// (1 - |xi|^2/R^2)_+^delta applied through the DFT of the periodized samples,
/// at discrete frequencies xi_k = pi k / L.
SampledField bochner_riesz(const SampledField& f, const MultiplierSpec& spec);

/// Pointwise max over the R ladder of |T_R f|.
SampledField bochner_riesz_maximal(const SampledField& f, double delta, const std::vector<double>& radii);

// -----------------------------------------------------------------------------
// Littlewood-Paley g-function

/// An analytic profile phi with a cutoff radius beyond which it is treated as 0.
struct Profile {
    std::string name;
    int dim = 1;
    double cutoff = 8.0;
    std::function<double(Point)> value;
};

/// (n - |x|^2) e^{-|x|^2/2} / (2 pi)^{n/2}, i.e. the Laplacian of a Gaussian.
Profile laplacian_of_gaussian(int dim);
/// e^{-|x|^2/2} / (2 pi)^{n/2}; not mean zero (rejected by g_function).
Profile gaussian_profile(int dim);

/// Relative mean |int phi| / int |phi| on a fine reference grid.
double profile_relative_mean(const Profile& profile);

/// g(x)^2 = sum_k |phi_{t_k} * f(x)|^2 width_k. Throws ParameterError for a
/// profile that is not mean zero (relative mean above 1e-8).
SampledField g_function(const SampledField& f, const Profile& profile, const ScaleLadder& levels,
                        Exec exec = Exec::parallel);

// -----------------------------------------------------------------------------
// Intrinsic square function

/// Finite subset of C_alpha: each atom is s (beta((x - a)/rho) - beta((x - b)/rho))
/// with beta the standard C-infinity bump, |a| + rho <= 1 and |b| + rho <= 1, so
/// the atom is supported in the unit ball and has mean zero exactly (two
/// translates of one bump). s normalizes the alpha-Hoelder seminorm measured
/// on a reference grid to 1.
class BumpDictionary {
public:
    struct Atom {
        Point a{};
        Point b{};
        double rho = 0.5;
        double scale = 1.0;
    };

    static BumpDictionary make(int dim, int size, double alpha, std::uint64_t seed);
    static BumpDictionary from_atoms(int dim, double alpha, std::vector<Atom> atoms);

    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    std::size_t size() const { return atoms_.size(); }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double value(std::size_t k, Point x) const;
    /// First `count` atoms.
    BumpDictionary prefix(std::size_t count) const;

    /// Reference grid on [-1, 1]^dim used for the Hoelder normalization.
    std::vector<Point> reference_points() const;
    double measured_seminorm(std::size_t k) const;

private:
    int dim_ = 1;
    double alpha_ = 1.0;
    std::vector<Atom> atoms_;
};

/// Dyadic levels t in [h, L/2] and, per level, the offsets with |offset| < t.
struct ConeDiscretization {
    ScaleLadder levels;
    std::vector<BallStencil> apertures;

    static ConeDiscretization make(const Grid& grid, const ScaleLadder& levels);
    static ConeDiscretization dyadic(const Grid& grid);
};

/// S_alpha f(x)^2 = sum_k (width_k / t_k^n) sum_{|y - x| < t_k} A(y, t_k)^2 h^n,
/// A(y, t) = max over atoms of |f * phi_t(y)|.
SampledField intrinsic_square(const SampledField& f, double alpha, const BumpDictionary& dict,
                              const ConeDiscretization& cone, Exec exec = Exec::parallel);

/// A(y, t) for every grid point y, at a single scale t.
SampledField intrinsic_envelope(const SampledField& f, const BumpDictionary& dict, double t,
                                Exec exec = Exec::parallel);

// -----------------------------------------------------------------------------
// Operator specs

/// `M[:ladder=dyadic]`, `Mbar`, `H`, `CZ:hilbert`, `CZ:riesz1|riesz2`,
/// `TOmega:<sphere>`, `mu:<sphere>`, `I:alpha=a`, `BR:delta=d,R=r`,
/// `BRmax:delta=d`, `g`, `S:alpha=a,K=k`, and `id` for the identity.
struct OperatorSpec {
    enum class Kind { identity, maximal, maximal_uncentered, hardy, cz, rough, marcinkiewicz, riesz, bochner_riesz,
                      bochner_riesz_maximal, g, intrinsic };

    Kind kind = Kind::identity;
    std::string text;
    CzKernel kernel = CzKernel::hilbert;
    std::string sphere;     // rough / marcinkiewicz
    double alpha = 0.5;     // riesz / intrinsic
    double delta = 0.5;     // bochner-riesz
    double R = 8.0;         // bochner-riesz
    int atoms = 8;          // intrinsic
    std::uint64_t seed = 1; // intrinsic dictionary

    bool sublinear_only() const;
};

OperatorSpec parse_operator_spec(std::string_view text);

/// Applies the operator with default discretization choices: dyadic ladders
/// from h, eps = h, R ladders 1, 2, 4, ... up to the Nyquist frequency.
SampledField apply_operator(const OperatorSpec& op, const SampledField& f, Exec exec = Exec::parallel);

}  // namespace amalgam
