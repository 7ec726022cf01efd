#pragma once

// Shared domain types, parametric preference models and the numeric
// helpers (bracketed root finding, deterministic grids, dyadic series)
// used by the risk, uncertainty and time-preference modules.

#include "nearrep/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace nearrep {

inline constexpr double kBisectionTol = 1e-10;
inline constexpr double kSupNormSlack = 1e-7;
inline constexpr double kStrictMargin = 1e-12;
inline constexpr double kSimplexSumTol = 1e-12;

// ---------------------------------------------------------------------------
// Choice objects
// ---------------------------------------------------------------------------

/// Probability vector over a finite prize set. Immutable once built.
class Lottery {
public:
    /// Validates and renormalizes. Rejects negative entries and vectors whose
    /// sum is further than 1e-12 from one.
    explicit Lottery(std::vector<double> probs);

    static Lottery degenerate(std::size_t prize_count, std::size_t prize);
    /// lambda * p + (1 - lambda) * q
    static Lottery mix(double lambda, const Lottery& p, const Lottery& q);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const noexcept { return probs_; }

    /// Number of strictly positive entries.
    std::size_t support() const noexcept;
    bool is_degenerate() const noexcept { return support() == 1; }

    friend bool operator==(const Lottery&, const Lottery&) = default;

private:
    struct Trusted {};
    Lottery(std::vector<double> probs, Trusted) : probs_(std::move(probs)) {}

    std::vector<double> probs_;
};

/// State-contingent money payment in R^d_+.
class Act {
public:
    explicit Act(std::vector<double> payoffs);

    static Act constant(double c, std::size_t states);
    static Act unit(std::size_t states, std::size_t state);

    std::size_t size() const noexcept { return payoffs_.size(); }
    double operator[](std::size_t i) const { return payoffs_[i]; }
    const std::vector<double>& payoffs() const noexcept { return payoffs_; }

    double min() const;
    double max() const;
    bool is_constant() const;

    Act scaled(double factor) const;
    /// lambda * x + (1 - lambda) * y
    static Act mix(double lambda, const Act& x, const Act& y);
    static Act sum(const Act& x, const Act& y);

    friend bool operator==(const Act&, const Act&) = default;

private:
    std::vector<double> payoffs_;
};

struct DatedReward {
    double amount;
    double time;
};

// ---------------------------------------------------------------------------
// Risk models (preferences over lotteries)
// ---------------------------------------------------------------------------

/// von Neumann-Morgenstern utility: value is the expectation of the prize
/// utilities.
struct ExpectedUtility {
    std::vector<double> utilities;
    friend bool operator==(const ExpectedUtility&, const ExpectedUtility&) = default;
};

/// Cumulative prospect theory with power value w(x) = x^a and the one-parameter
/// weighting g(p) = p^b / (p^b + (1-p)^b)^(1/b), evaluated in rank-dependent
/// form.
struct Cpt {
    std::vector<double> prizes;
    double value_exponent = 0.54;
    double weighting_exponent = 0.74;
    friend bool operator==(const Cpt&, const Cpt&) = default;
};

/// Piecewise-linear utility tabulated on the simplex lattice {k/N}. Values
/// between lattice points come from the Kuhn triangulation of the cumulative
/// coordinates, so vertex and edge values are reproduced exactly.
class TabulatedUtility {
public:
    TabulatedUtility(std::size_t prize_count, std::size_t resolution,
                     std::vector<double> values);

    /// Evaluates fn at every lattice point, in grid_sample order.
    static TabulatedUtility tabulate(std::size_t prize_count, std::size_t resolution,
                                     const std::function<double(const Lottery&)>& fn);

    std::size_t prize_count() const noexcept { return prize_count_; }
    std::size_t resolution() const noexcept { return resolution_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double operator()(const Lottery& p) const;

    friend bool operator==(const TabulatedUtility& a, const TabulatedUtility& b) {
        return a.prize_count_ == b.prize_count_ && a.resolution_ == b.resolution_ && a.values_ == b.values_;
    }

private:
    double at(std::span<const long> composition) const;
    std::uint64_t key(std::span<const long> composition) const;

    std::size_t prize_count_;
    std::size_t resolution_;
    std::vector<double> values_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

using RiskModel = std::variant<ExpectedUtility, Cpt, TabulatedUtility>;

/// Probability weighting of the CPT specification.
double cpt_weight(double p, double exponent);
double cpt_value(double x, double exponent);

std::size_t prize_count(const RiskModel& model);
/// Model value of a lottery (not normalized).
double evaluate(const RiskModel& model, const Lottery& p);
std::string describe(const RiskModel& model);

// ---------------------------------------------------------------------------
// Act models (preferences over state-contingent payments)
// ---------------------------------------------------------------------------

struct Seu {
    std::vector<double> prior;
    friend bool operator==(const Seu&, const Seu&) = default;
};

/// Maxmin expected utility over the vertices of a prior set.
struct Meu {
    std::vector<std::vector<double>> priors;
    friend bool operator==(const Meu&, const Meu&) = default;
};

enum class AmbiguityKernel { Sqrt1pz2, ZMinusExp };

/// u(x) = sum_k weight_k * f(prior_k . x) with a finitely supported
/// second-order prior.
struct SmoothAmbiguity {
    AmbiguityKernel kernel;
    std::vector<std::vector<double>> priors;
    std::vector<double> weights;
    friend bool operator==(const SmoothAmbiguity&, const SmoothAmbiguity&) = default;
};

/// (sum_i w_i x_i^rho)^(1/rho): homothetic, normalized.
struct Ces {
    std::vector<double> weights;
    double rho;
    friend bool operator==(const Ces&, const Ces&) = default;
};

/// pi . x + amplitude * tanh(x_0 - x_{d-1}). Normalized, with homogeneity
/// deviations bounded by (1 + lambda) * amplitude.
struct TiltedSeu {
    std::vector<double> prior;
    double amplitude;
    friend bool operator==(const TiltedSeu&, const TiltedSeu&) = default;
};

using ActModel = std::variant<Seu, Meu, SmoothAmbiguity, Ces, TiltedSeu>;

double ambiguity_kernel(AmbiguityKernel kernel, double z);
std::size_t state_count(const ActModel& model);
double evaluate(const ActModel& model, const Act& x);
std::string describe(const ActModel& model);
std::string to_string(AmbiguityKernel kernel);

// ---------------------------------------------------------------------------
// Discrete discounting models
// ---------------------------------------------------------------------------

struct Exponential {
    double gamma;
    friend bool operator==(const Exponential&, const Exponential&) = default;
};

/// d(0) = 1, d(t) = beta * delta^t for t >= 1.
struct QuasiHyperbolic {
    double beta;
    double delta;
    friend bool operator==(const QuasiHyperbolic&, const QuasiHyperbolic&) = default;
};

/// d(t) = 1 / (1 + k t)
struct Hyperbolic {
    double k;
    friend bool operator==(const Hyperbolic&, const Hyperbolic&) = default;
};

/// d(t) = gamma^t (1 + amplitude * sin(frequency * t))
struct PerturbedExponential {
    double gamma;
    double amplitude;
    double frequency;
    friend bool operator==(const PerturbedExponential&, const PerturbedExponential&) = default;
};

struct TabulatedDiscount {
    std::vector<double> values;
    friend bool operator==(const TabulatedDiscount&, const TabulatedDiscount&) = default;
};

using TimeModel =
    std::variant<Exponential, QuasiHyperbolic, Hyperbolic, PerturbedExponential, TabulatedDiscount>;

std::string describe(const TimeModel& model);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Measured relaxation parameter with the sampled input attaining it.
struct ViolationReport {
    std::string parameter;
    double value = 0.0;
    /// Flattened witness; witness_layout names its blocks.
    std::vector<double> witness;
    std::string witness_layout;
    std::size_t samples_evaluated = 0;
    std::string note;
    std::map<std::string, double> diagnostics;
};

enum class RepresentationKind {
    Affine,
    Linear,
    Homogeneous,
    QuasiConcave,
    ExponentialDiscount,
    TimeShift,
};

std::string to_string(RepresentationKind kind);

/// Constructed exact benchmark and its measured distance to the model.
struct NearRepresentation {
    RepresentationKind kind = RepresentationKind::Affine;
    std::map<std::string, double> parameters;
    std::vector<double> coefficients;
    double achieved_distance = 0.0;
    double bound = 0.0;
    bool passed = true;
    std::vector<double> witness;
    std::size_t samples = 0;
    std::string note;
};

/// A verifier found a sample point outside the theorem's guarantee.
class BoundViolated : public Error {
public:
    BoundViolated(const std::string& what, NearRepresentation rep)
        : Error(what), rep_(std::move(rep)) {}
    const NearRepresentation& representation() const noexcept { return rep_; }

private:
    NearRepresentation rep_;
};

// ---------------------------------------------------------------------------
// Numerics
// ---------------------------------------------------------------------------

/// Bisection on a bracketing interval. Returns the midpoint of a final
/// bracket of width <= tol (or the last representable bracket).
/// Throws NoBracket when f(lo) and f(hi) have the same strict sign.
double bisect_monotone(const std::function<double(double)>& f, double lo, double hi,
                       double tol = kBisectionTol);

enum class SpaceKind { Simplex, Box, Interval };

/// Grid description. For simplices, `dim` is the number of coordinates and
/// `resolution` the lattice denominator. For boxes and intervals,
/// `resolution` is the number of points per axis on [lower, bound].
struct GridSpec {
    SpaceKind kind = SpaceKind::Simplex;
    std::size_t dim = 2;
    std::size_t resolution = 2;
    double bound = 1.0;
    double lower = 0.0;
    /// Extra uniformly drawn points appended after the lattice.
    std::size_t random_extra = 0;
    std::uint64_t seed = 0;
};

std::vector<std::vector<double>> grid_sample(const GridSpec& spec);
std::vector<Lottery> simplex_lattice(std::size_t prize_count, std::size_t resolution);

struct TailSum {
    double partial_sum = 0.0;
    bool converged = false;
    std::vector<double> terms;
    std::vector<double> partial_sums;
};

/// Sums term(0..n_max). Convergence is classified from the last window of
/// terms: each term must be below noise_floor or shrink by ratio_tol versus
/// its predecessor. This is a heuristic, never a proof of divergence.
TailSum dyadic_tail_sum(const std::function<double(int)>& term, int n_max,
                        double ratio_tol = 0.75, double noise_floor = 1e-12);

}  // namespace nearrep
