#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nearrep/hull.hpp"
#include "nearrep/risk.hpp"

#include <cmath>
#include <random>

using namespace nearrep;
using namespace nearrep::risk;

namespace {

double w(double p, double b = 0.74) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return std::pow(p, b) / std::pow(std::pow(p, b) + std::pow(1.0 - p, b), 1.0 / b);
}

const RiskModel kCpt3 = Cpt{{4000.0, 3000.0, 0.0}, 0.54, 0.74};
const RiskModel kEu = ExpectedUtility{{1.0, 4.0, 2.0}};

}  // namespace

TEST_CASE("mixture utility of expected utility is the normalized expectation") {
    const MixtureUtility u(kEu);
    CHECK(u.best() == 1);
    CHECK(u.worst() == 0);
    std::mt19937_64 rng(11);
    std::exponential_distribution<double> e(1.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> p = {e(rng), e(rng), e(rng)};
        const double s = p[0] + p[1] + p[2];
        for (double& v : p) v /= s;
        const double oracle = (p[0] * 1.0 + p[1] * 4.0 + p[2] * 2.0 - 1.0) / 3.0;
        CHECK(u(Lottery(p)) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("mixture utility hits 0 and 1 at the extreme prizes") {
    const MixtureUtility u(kCpt3);
    CHECK(u(Lottery::degenerate(3, u.best())) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(u(Lottery::degenerate(3, u.worst())) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("two-prize cpt calibrates to the probability of the better prize") {
    // Every two-prize lottery already lies on the calibration segment.
    const MixtureUtility u(Cpt{{10.0, 0.0}, 0.54, 0.74});
    for (int i = 0; i <= 20; ++i) {
        const double p = i / 20.0;
        CHECK(u(Lottery({p, 1.0 - p})) == doctest::Approx(p).epsilon(1e-9));
    }
}

TEST_CASE("support chain reassembles the lottery") {
    const Lottery p({0.2, 0.5, 0.3});
    const auto chain = support_chain(p);
    CHECK(chain.size() == 2);
    const auto& first = chain.front();
    const Lottery rebuilt = Lottery::mix(first.lambda, first.p0, first.p1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(rebuilt[i] == doctest::Approx(p[i]).epsilon(1e-14));
}

TEST_CASE("expected utility reduces compound lotteries exactly") {
    const MixtureUtility u(kEu);
    const auto eps = measure_eps_rcl(u, make_rcl_sampler(3, 20));
    CHECK(eps.value <= 1e-7);
    const auto l = build_affine_benchmark(u);
    const auto rep = verify_thm1(u, l, eps.value, simplex_lattice(3, 20));
    CHECK(rep.achieved_distance <= 1e-7);
}

TEST_CASE("cpt affine bound holds on the lattice") {
    const MixtureUtility u(kCpt3);
    const auto sampler = make_rcl_sampler(3, 30);
    const auto eps = measure_eps_rcl(u, sampler);
    CHECK(eps.value > 1e-3);
    CHECK(eps.witness_layout == "p0|p1|lambda");
    const auto l = build_affine_benchmark(u);
    CHECK(l.coefficients()[u.best()] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(l.coefficients()[u.worst()] == doctest::Approx(0.0).epsilon(1e-10));
    const auto rep = verify_thm1(u, l, eps.value, sampler.points);
    CHECK(rep.passed);
    CHECK(rep.achieved_distance < 2.0 * eps.value + kSupNormSlack);
}

TEST_CASE("an understated epsilon is caught") {
    const MixtureUtility u(kCpt3);
    const auto l = build_affine_benchmark(u);
    CHECK_THROWS_AS(verify_thm1(u, l, 1e-6, simplex_lattice(3, 20)), BoundViolated);
}

TEST_CASE("perturbation vanishes on vertices") {
    const MixtureUtility u(kCpt3);
    const auto l = build_affine_benchmark(u);
    const auto tab = perturbed_tabulation(l, u.best(), u.worst(), 0.05, 20);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(tab(Lottery::degenerate(3, i)) == doctest::Approx(l(Lottery::degenerate(3, i))).epsilon(1e-14));
}

TEST_CASE("converse: near-affine tabulations reduce compound lotteries within 4 eps") {
    const MixtureUtility u(kCpt3);
    const auto l = build_affine_benchmark(u);
    for (double eps : {0.001, 0.01, 0.02}) {
        const auto tab = perturbed_tabulation(l, u.best(), u.worst(), 0.9 * eps, 40);
        const auto sampler = make_rcl_sampler(3, 40, 8, 5);
        const auto r = converse_check_4eps(tab, l, eps, sampler.triples);
        CHECK(r.value < 4.0 * eps);
    }
}

TEST_CASE("converse rejects a tabulation outside the eps tube") {
    const MixtureUtility u(kCpt3);
    const auto l = build_affine_benchmark(u);
    const auto tab = perturbed_tabulation(l, u.best(), u.worst(), 0.05, 20);
    CHECK_THROWS_AS(converse_check_4eps(tab, l, 0.01, make_rcl_sampler(3, 20).triples), HypothesisFailed);
}

TEST_CASE("independence sampler pairs are indifferent") {
    const MixtureUtility u(kCpt3);
    for (const auto& t : make_independence_sampler(u, 5, 3, 2, 9))
        CHECK(evaluate(kCpt3, t.p) == doctest::Approx(evaluate(kCpt3, t.q)).epsilon(1e-8));
}

TEST_CASE("independence: expected utility is exact, cpt is not") {
    const MixtureUtility eu(kEu);
    CHECK(measure_eps_independence(eu, make_independence_sampler(eu, 10, 5, 2, 1)).value <= 1e-7);
    const MixtureUtility cpt(kCpt3);
    const auto eps = measure_eps_independence(cpt, make_independence_sampler(cpt, 10, 5, 2, 1));
    CHECK(eps.value > 1e-4);
    const auto rep = verify_thm2(cpt, build_affine_benchmark(cpt), eps.value, simplex_lattice(3, 30));
    CHECK(rep.passed);
}

TEST_CASE("nearest alpha prime is alpha itself under expected utility") {
    const MixtureUtility eu(kEu);
    for (const auto& t : make_independence_sampler(eu, 4, 3, 2, 5)) {
        const auto a = nearest_alpha_prime(kEu, t);
        REQUIRE(a.found);
        CHECK(a.value == doctest::Approx(t.alpha).epsilon(1e-8));
    }
}

TEST_CASE("allais values against a direct rank-dependent computation") {
    const double v4 = std::pow(4000.0, 0.54), v3 = std::pow(3000.0, 0.54);
    const auto a = allais_report();
    CHECK(a.u_a == doctest::Approx(w(0.8) * v4).epsilon(1e-12));
    CHECK(a.u_b == doctest::Approx(v3).epsilon(1e-12));
    CHECK(a.u_c == doctest::Approx(w(0.2) * v4).epsilon(1e-12));
    CHECK(a.u_d == doctest::Approx(w(0.25) * v3).epsilon(1e-12));
    CHECK(a.u_d_prime == doctest::Approx(w(0.27) * v3).epsilon(1e-12));
    CHECK(a.b_over_a);
    CHECK(a.c_over_d);
    CHECK(a.d_prime_over_c);
    // Independent secant solve of w(l) v3 = u_c.
    double lo = 0.2, hi = 0.3;
    for (int i = 0; i < 60; ++i) {
        const double f_lo = w(lo) * v3 - a.u_c, f_hi = w(hi) * v3 - a.u_c;
        if (f_hi == f_lo) break;
        const double next = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        lo = hi;
        hi = next;
    }
    CHECK(a.lambda_star == doctest::Approx(hi).epsilon(1e-9));
    CHECK(a.lambda_star > 0.25);
    CHECK(a.lambda_star < 0.27);
}

TEST_CASE("figure1 maximum against a dense scan") {
    double best = 0.0;
    for (int i = 0; i <= 1000000; ++i) best = std::max(best, std::abs(w(i / 1e6) - i / 1e6));
    const auto f = figure1_data(10001);
    CHECK(f.max_abs_deviation == doctest::Approx(best).epsilon(1e-9));
    CHECK(f.max_abs_deviation >= best - 1e-15);
    CHECK(f.rows.front().p == 0.0);
    CHECK(f.rows.back().p == 1.0);
    CHECK_THROWS_AS(figure1_data(10), InvalidInput);
}

TEST_CASE("hull membership certificates") {
    const std::vector<std::vector<double>> square = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    const auto in = hull::membership(square, {0.3, 0.6});
    REQUIRE(in.member);
    CHECK(in.indices.size() <= 3);
    double x = 0, y = 0, s = 0;
    for (std::size_t k = 0; k < in.indices.size(); ++k) {
        x += in.weights[k] * square[in.indices[k]][0];
        y += in.weights[k] * square[in.indices[k]][1];
        s += in.weights[k];
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(x == doctest::Approx(0.3));
    CHECK(y == doctest::Approx(0.6));
    CHECK_FALSE(hull::membership(square, {1.2, 0.5}).member);
    CHECK(hull::membership(square, {1.0, 1.0}).member);
}
