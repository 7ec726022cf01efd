#pragma once

// Preferences over state-contingent money. The certainty-equivalent utility
// is compared against three exact benchmarks: the linear limit of the
// doubling sequence, the homogeneous limit of an eta-power sequence, and a
// quasi-concave envelope built from convex hulls of upper contour sets.

#include "nearrep/prefcore.hpp"

#include <optional>
#include <vector>

namespace nearrep::uncertainty {

/// Normalized utility: u(x) = c with x ~ c*1. Computed by bisection on
/// [min x, max x], or read off directly for models already normalized.
class CEUtility {
public:
    explicit CEUtility(ActModel model, double tol = kBisectionTol);

    double operator()(const Act& x) const;

    const ActModel& model() const noexcept { return model_; }
    std::size_t states() const noexcept { return states_; }
    double tol() const noexcept { return tol_; }

private:
    ActModel model_;
    double tol_;
    std::size_t states_;
    bool normalized_;
};

double ce_utility(const ActModel& model, const Act& x, double tol = kBisectionTol);

/// |u((x+y)/2) - u(x)/2 - u(y)/2|
double measure_phi(const CEUtility& u, const Act& x, const Act& y);

/// Largest n with 2^n * max(x) within the numeric range guard.
int doubling_guard(const Act& x, int n_max);
inline constexpr double kRangeGuard = 1e12;

struct ActPair {
    Act x;
    Act y;
};

/// All pairs of the given points plus (2x, 0) for each point x. The latter
/// bound |u(x) - v(x)| through the dyadic series.
std::vector<ActPair> make_theta_pairs(const std::vector<Act>& points);

struct ThetaEstimate {
    ViolationReport report;
    bool converged = true;
    /// Partial sums at the witness pair.
    std::vector<double> partial_sums;
};

/// Max over pairs of sum_i 2^-i phi(2^i x, 2^i y), i <= n_max (range guarded).
ThetaEstimate theta_estimate(const CEUtility& u, const std::vector<ActPair>& pairs, int n_max = 40);

/// Dyadic series for a single pair.
TailSum theta_series(const CEUtility& u, const ActPair& pair, int n_max = 40);

struct LimitResult {
    double value = 0.0;
    int n_used = 0;
    /// Tail estimate sum_{j>=n} 2^-j delta(2^(j+1) x) from measured terms.
    double tail_bound = 0.0;
    std::vector<double> iterates;
};

/// v(x) = lim 2^-n u(2^n x). Stops when consecutive iterates differ by at
/// most tol. Throws NotConverged otherwise.
LimitResult hyers_ulam_limit(const CEUtility& u, const Act& x, double tol = 1e-10, int n_max = 40);

/// v(x) = sum_i p_i x_i
class LinearBenchmark {
public:
    explicit LinearBenchmark(std::vector<double> probabilities);
    double operator()(const Act& x) const;
    const std::vector<double>& probabilities() const noexcept { return p_; }

private:
    std::vector<double> p_;
};

/// p_i = v(e_i). Throws NotAdditive if sum p_i differs from v(1) by more
/// than 1e-6.
LinearBenchmark extract_prior(const CEUtility& u, double tol = 1e-10, int n_max = 40);

/// Checks sup |u - v| <= theta + tol, or <= 2 eps when a uniform cap on phi
/// is supplied instead. Throws BoundViolated.
NearRepresentation verify_aa_bound(const CEUtility& u, const LinearBenchmark& v, double theta_hat,
                                   const std::vector<Act>& points, double tol = kSupNormSlack,
                                   std::optional<double> phi_cap = std::nullopt);

/// The smooth-ambiguity integral against the mean-prior expectation:
/// u(x) = sum_k w_k f(p_k . x), v(x) = pbar . x. Reports sup |u - v| and
/// the pointwise gap to the closed-form defect.
NearRepresentation smooth_ambiguity_bound(const SmoothAmbiguity& model, const std::vector<Act>& points);

/// Closed-form u - v for the smooth model: sum_k w_k h(p_k . x), with
/// h(z) = sqrt(1+z^2) - z or exp(-z).
double smooth_ambiguity_defect(const SmoothAmbiguity& model, const Act& x);

std::vector<double> mean_prior(const SmoothAmbiguity& model);

/// |u(lambda x) - lambda u(x)|
double measure_homog_deviation(const CEUtility& u, const Act& x, double lambda);

struct HomogLimit {
    double value = 0.0;
    int n_used = 0;
    /// sum_j eta^-(j+1) |u(eta^(j+1) x) - eta u(eta^j x)|
    double theta = 0.0;
};

HomogLimit homog_limit(const CEUtility& u, const Act& x, double eta, double tol = 1e-10, int n_max = 60);

/// Checks |u(x) - v(x)| <= 2 theta + tol and |v(a x) - a v(x)| <= tol over
/// the points and scale factors. Throws BoundViolated.
NearRepresentation verify_homog_bound(const CEUtility& u, double eta, const std::vector<Act>& points,
                                      const std::vector<double>& scales, double tol = 1e-6);

// ---------------------------------------------------------------------------
// Uncertainty aversion
// ---------------------------------------------------------------------------

struct ActTriple {
    Act x;
    Act y;
    double lambda;
};

/// All pairs of the points crossed with lambda = k/(lambda_count+1).
std::vector<ActTriple> make_ua_sampler(const std::vector<Act>& points, std::size_t lambda_count);

/// max(0, min(u(x), u(y)) - u(lambda x + (1-lambda) y)). Witness x|y|lambda.
ViolationReport measure_eps_ua(const CEUtility& u, const std::vector<ActTriple>& triples);

struct QuasiConcaveBenchmark {
    std::vector<std::vector<double>> points;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> levels;
    double spacing = 0.0;
    std::size_t dim = 0;
    std::size_t resolution = 0;
    double bound = 0.0;
    /// Two-point mixtures that rebuild each lifted grid point from its hull
    /// certificate. Feeding them to measure_eps_ua makes the bound check
    /// hold on the same sample.
    std::vector<ActTriple> chain_triples;
    std::size_t lp_solves = 0;
};

/// v(x) = max(u(x), largest level c with x in conv{grid z : u(z) >= c}).
/// Box grid on [0, bound]^dim, dim <= 3.
QuasiConcaveBenchmark quasiconcavify(const CEUtility& u, double bound, std::size_t resolution,
                                     std::size_t level_count);

/// Same construction on arbitrary points with given values and levels.
QuasiConcaveBenchmark quasiconcave_envelope(const std::vector<std::vector<double>>& points,
                                            const std::vector<double>& values,
                                            const std::vector<double>& levels);

/// Checks v >= u - tol, sup |u - v| <= dim * eps_ua + spacing + tol, and
/// midpoint quasi-concavity of v on the grid up to spacing. Throws
/// BoundViolated.
NearRepresentation verify_quasiconcave_bound(const QuasiConcaveBenchmark& b, double eps_ua,
                                             double tol = kSupNormSlack);

}  // namespace nearrep::uncertainty
