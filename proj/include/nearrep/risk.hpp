#pragma once

// Expected-utility approximation on the simplex: calibrate a model to the
// segment between its best and worst prizes, build the affine benchmark that
// agrees with it on degenerate lotteries, measure how far the model is from
// reducing compound lotteries or satisfying independence, and check the
// closeness guarantees those measurements imply.

#include "nearrep/prefcore.hpp"

#include <cstdint>
#include <vector>

namespace nearrep::risk {

/// u(p) = alpha such that p is indifferent to alpha*best + (1-alpha)*worst.
/// Construction validates extremality and monotonicity along that segment.
class MixtureUtility {
public:
    explicit MixtureUtility(RiskModel model, double tol = kBisectionTol);

    double operator()(const Lottery& p) const;

    const RiskModel& model() const noexcept { return model_; }
    std::size_t prize_count() const noexcept { return prizes_; }
    std::size_t best() const noexcept { return best_; }
    std::size_t worst() const noexcept { return worst_; }
    double tol() const noexcept { return tol_; }

    /// Model value of the calibration lottery alpha*best + (1-alpha)*worst.
    double segment_value(double alpha) const;
    Lottery segment_point(double alpha) const;

private:
    RiskModel model_;
    double tol_;
    std::size_t prizes_;
    std::size_t best_ = 0;
    std::size_t worst_ = 0;
    double best_value_ = 0.0;
    double worst_value_ = 0.0;
};

double mixture_utility(const RiskModel& model, const Lottery& p, double tol = kBisectionTol);

/// l(p) = sum_i p_i l(delta_i). Fully determined by its values on the
/// degenerate lotteries.
class AffineBenchmark {
public:
    explicit AffineBenchmark(std::vector<double> coefficients);

    double operator()(const Lottery& p) const;
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }

private:
    std::vector<double> coefficients_;
};

AffineBenchmark build_affine_benchmark(const MixtureUtility& u);

// ---------------------------------------------------------------------------
// Reduction of compound lotteries
// ---------------------------------------------------------------------------

struct MixtureTriple {
    Lottery p0;
    Lottery p1;
    double lambda;
};

/// Sample for the compound-lottery meter. Contains, for every lattice point,
/// the chain of two-point mixtures that peels its support off one prize at a
/// time, plus all pairs of a coarser lattice mixed at interior weights.
struct RclSampler {
    std::vector<MixtureTriple> triples;
    std::vector<Lottery> points;
    std::size_t resolution = 0;
};

RclSampler make_rcl_sampler(std::size_t prize_count, std::size_t resolution,
                            std::size_t pair_resolution = 10, std::size_t lambda_resolution = 9);

/// The chain triples alone for one lottery: (delta_i, rest, p_i) recursively.
std::vector<MixtureTriple> support_chain(const Lottery& p);

/// |u(lambda p0 + (1-lambda) p1) - lambda u(p0) - (1-lambda) u(p1)|.
double rcl_defect(const MixtureUtility& u, const MixtureTriple& t);

/// Sample maximum of rcl_defect plus kStrictMargin. Witness layout:
/// p0 | p1 | lambda.
ViolationReport measure_eps_rcl(const MixtureUtility& u, const RclSampler& sampler);

/// Checks |u(p) - l(p)| < (supp(p) - 1) * eps + slack at every point and
/// u = l on degenerate lotteries. Throws BoundViolated on failure.
NearRepresentation verify_thm1(const MixtureUtility& u, const AffineBenchmark& l, double eps_hat,
                               const std::vector<Lottery>& points, double slack = kSupNormSlack);

/// Builds l + amplitude * sin(pi p_best) cos(pi p_mid) on the simplex lattice,
/// where p_mid is the mass on neither extreme prize. Vanishes at every vertex.
TabulatedUtility perturbed_tabulation(const AffineBenchmark& l, std::size_t best, std::size_t worst,
                                      double amplitude, std::size_t resolution);

/// Converse check: a tabulated representation within eps of an affine
/// benchmark must reduce compound lotteries to within 4 eps. Throws
/// HypothesisFailed if the sup-norm premise fails on the lattice.
ViolationReport converse_check_4eps(const TabulatedUtility& u_tab, const AffineBenchmark& l,
                                    double eps, const std::vector<MixtureTriple>& triples);

// ---------------------------------------------------------------------------
// Independence
// ---------------------------------------------------------------------------

struct IndependenceTuple {
    Lottery p;
    Lottery q;
    double alpha;
    Lottery r;
};

/// Indifferent pairs (p, q): q is found by bisection on the segment between a
/// random lottery and the worst (or best) prize. Each pair is crossed with a
/// grid of alpha and a set of mixing lotteries r.
std::vector<IndependenceTuple> make_independence_sampler(const MixtureUtility& u,
                                                         std::size_t pair_count,
                                                         std::size_t alpha_resolution,
                                                         std::size_t mixer_count,
                                                         std::uint64_t seed);

struct AlphaPrime {
    double value = 0.0;
    bool found = false;
};

/// Root of V(a q + (1-a) r) = V(alpha p + (1-alpha) r) nearest to alpha,
/// via an outward bracket scan of width `step` followed by bisection.
AlphaPrime nearest_alpha_prime(const RiskModel& model, const IndependenceTuple& t,
                               double step = 1e-3, double tol = kBisectionTol);

/// max |alpha - alpha'|. A tuple with no root in [0,1] contributes 1.
/// Witness layout: p | q | alpha | r | alpha'.
ViolationReport measure_eps_independence(const MixtureUtility& u,
                                         const std::vector<IndependenceTuple>& tuples);

/// Checks ||u - l||_inf < (d+1)^2 eps + slack on the sample.
NearRepresentation verify_thm2(const MixtureUtility& u, const AffineBenchmark& l, double eps_hat,
                               const std::vector<Lottery>& points, double slack = kSupNormSlack);

// ---------------------------------------------------------------------------
// Allais / common-ratio scenario
// ---------------------------------------------------------------------------

struct AllaisReport {
    double value_exponent = 0.54;
    double weighting_exponent = 0.74;
    double u_a = 0, u_b = 0, u_c = 0, u_d = 0, u_d_prime = 0;
    bool b_over_a = false;
    bool c_over_d = false;
    bool d_prime_over_c = false;
    /// Weight on B (rest on $0) at which the mixture is indifferent to C.
    double lambda_star = 0;
};

AllaisReport allais_report(double value_exponent = 0.54, double weighting_exponent = 0.74);

struct Figure1Row {
    double p;
    double cpt;
    double eu;
    double difference;
};

struct Figure1Data {
    std::vector<Figure1Row> rows;
    double max_abs_deviation = 0;
    double argmax = 0;
};

/// Normalized CPT value of a best-vs-worst lottery against its expected
/// utility p. The maximum is refined by Brent minimization around the best
/// grid point.
Figure1Data figure1_data(std::size_t resolution, double weighting_exponent = 0.74);

}  // namespace nearrep::risk
