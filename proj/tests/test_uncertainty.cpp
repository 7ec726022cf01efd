#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nearrep/uncertainty.hpp"

#include <cmath>
#include <random>

using namespace nearrep;
using namespace nearrep::uncertainty;

namespace {

const SmoothAmbiguity kLoving{AmbiguityKernel::Sqrt1pz2, {{0.3, 0.7}, {0.8, 0.2}}, {0.5, 0.5}};
const SmoothAmbiguity kAverse{AmbiguityKernel::ZMinusExp, {{0.3, 0.7}, {0.8, 0.2}}, {0.5, 0.5}};
const Meu kMeu{{{0.3, 0.7}, {0.7, 0.3}}};

double dot(const std::vector<double>& p, const Act& x) { return p[0] * x[0] + p[1] * x[1]; }

// c - exp(-c) = v by Newton from c = v.
double inv_zme(double v) {
    double c = v;
    for (int i = 0; i < 100; ++i) c -= (c - std::exp(-c) - v) / (1.0 + std::exp(-c));
    return c;
}

std::vector<Act> box(std::size_t n, double bound) {
    std::vector<Act> out;
    for (const auto& g : grid_sample(GridSpec{SpaceKind::Box, 2, n, bound})) out.emplace_back(g);
    return out;
}

}  // namespace

TEST_CASE("certainty equivalents against closed-form inverses") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 10.0);
    const CEUtility lov(kLoving), av(kAverse), meu(kMeu);
    for (int i = 0; i < 50; ++i) {
        const Act x({U(rng), U(rng)});
        const double vl = 0.5 * std::hypot(1.0, dot(kLoving.priors[0], x)) + 0.5 * std::hypot(1.0, dot(kLoving.priors[1], x));
        CHECK(lov(x) == doctest::Approx(std::sqrt(vl * vl - 1.0)).epsilon(1e-8));
        const auto f = [](double z) { return z - std::exp(-z); };
        const double va = 0.5 * f(dot(kAverse.priors[0], x)) + 0.5 * f(dot(kAverse.priors[1], x));
        CHECK(av(x) == doctest::Approx(inv_zme(va)).epsilon(1e-8));
        CHECK(meu(x) == doctest::Approx(std::min(dot(kMeu.priors[0], x), dot(kMeu.priors[1], x))).epsilon(1e-12));
    }
}

TEST_CASE("certainty equivalent of a constant act is the constant") {
    const CEUtility u(kAverse);
    for (double c : {0.0, 0.5, 3.0, 9.0}) CHECK(u(Act::constant(c, 2)) == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("seu: zero theta and exact prior") {
    const CEUtility u(ActModel{Seu{{0.35, 0.65}}});
    const auto pts = box(5, 10.0);
    const auto th = theta_estimate(u, make_theta_pairs(pts));
    CHECK(th.report.value <= 1e-7);
    const auto v = extract_prior(u);
    CHECK(v.probabilities()[0] == doctest::Approx(0.35).epsilon(1e-10));
    CHECK(v.probabilities()[1] == doctest::Approx(0.65).epsilon(1e-10));
    const auto rep = verify_aa_bound(u, v, th.report.value, pts);
    CHECK(rep.achieved_distance <= 1e-7);
}

TEST_CASE("meu partial sums grow linearly") {
    const CEUtility u(kMeu);
    const TailSum s = theta_series(u, ActPair{Act::unit(2, 0), Act::unit(2, 1)}, 20);
    REQUIRE(s.partial_sums.size() == 21);
    for (int n = 0; n <= 20; ++n) CHECK(s.partial_sums[n] == doctest::Approx(0.2 * (n + 1)).epsilon(1e-9));
    CHECK_FALSE(s.converged);
}

TEST_CASE("meu is homothetic but not additive") {
    const CEUtility u(kMeu);
    const Act x({1.0, 3.0});
    const auto lim = hyers_ulam_limit(u, x);
    CHECK(lim.value == doctest::Approx(u(x)).epsilon(1e-9));
    for (double l : {0.5, 2.0, 7.0}) CHECK(measure_homog_deviation(u, x, l) <= 1e-9);
    CHECK_THROWS_AS(extract_prior(u), NotAdditive);
}

TEST_CASE("smooth ambiguity sup defect is one, attained at zero") {
    for (const auto& m : {kLoving, kAverse}) {
        const auto pts = box(50, 10.0);
        const auto rep = smooth_ambiguity_bound(m, pts);
        CHECK(rep.passed);
        CHECK(rep.achieved_distance == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.witness == std::vector<double>{0.0, 0.0});
        CHECK(rep.parameters.at("max_formula_gap") <= 1e-9);
        const auto pbar = mean_prior(m);
        CHECK(pbar[0] == doctest::Approx(0.55));
        CHECK(pbar[1] == doctest::Approx(0.45));
    }
}

TEST_CASE("smooth ambiguity prior extraction recovers the mean prior") {
    for (const auto& m : {kLoving, kAverse}) {
        const auto v = extract_prior(CEUtility(m));
        CHECK(v.probabilities()[0] == doctest::Approx(0.55).epsilon(1e-6));
        CHECK(v.probabilities()[1] == doctest::Approx(0.45).epsilon(1e-6));
    }
}

TEST_CASE("smooth ambiguity CE is within theta of its linear limit") {
    const CEUtility u(kLoving);
    const auto pts = box(6, 10.0);
    const auto th = theta_estimate(u, make_theta_pairs(pts));
    const auto rep = verify_aa_bound(u, extract_prior(u), th.report.value, pts);
    CHECK(rep.achieved_distance <= th.report.value + kSupNormSlack);
}

TEST_CASE("phi is symmetric") {
    const CEUtility u(kLoving);
    const Act x({1.0, 5.0}), y({4.0, 0.5});
    CHECK(measure_phi(u, x, y) == doctest::Approx(measure_phi(u, y, x)).epsilon(1e-12));
}

TEST_CASE("ces is its own homogeneous limit") {
    const CEUtility u(ActModel{Ces{{0.4, 0.6}, 0.5}});
    const auto pts = box(4, 10.0);
    const auto rep = verify_homog_bound(u, 2.0, pts, {0.5, 2.0, 3.7});
    CHECK(rep.achieved_distance <= 1e-7);
}

TEST_CASE("tilted seu: homogeneous benchmark within twice its series") {
    const CEUtility u(ActModel{TiltedSeu{{0.5, 0.5}, 0.2}});
    const auto pts = box(5, 10.0);
    const auto rep = verify_homog_bound(u, 2.0, pts, {0.5, 2.0});
    CHECK(rep.achieved_distance > 1e-4);
    CHECK(rep.achieved_distance <= rep.bound + 1e-6);
}

TEST_CASE("uncertainty aversion meter") {
    const auto pts = box(5, 10.0);
    const auto triples = make_ua_sampler(pts, 3);
    CHECK(triples.size() == pts.size() * (pts.size() - 1) / 2 * 3);
    CHECK(measure_eps_ua(CEUtility(ActModel{Seu{{0.5, 0.5}}}), triples).value <= 1e-7);
    CHECK(measure_eps_ua(CEUtility(kMeu), triples).value <= 1e-7);
    CHECK(measure_eps_ua(CEUtility(kLoving), triples).value > 1e-3);
}

TEST_CASE("quasi-concave envelope of a concave function changes nothing") {
    std::vector<std::vector<double>> pts;
    std::vector<double> vals, levels;
    for (int i = 0; i <= 10; ++i) {
        pts.push_back({i / 10.0});
        vals.push_back(-(i / 10.0 - 0.4) * (i / 10.0 - 0.4));
    }
    for (int k = 0; k <= 40; ++k) levels.push_back(-0.36 + 0.36 * k / 40.0);
    const auto b = quasiconcave_envelope(pts, vals, levels);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(b.v[i] == doctest::Approx(vals[i]));
}

TEST_CASE("quasi-concave envelope fills a valley") {
    const std::vector<std::vector<double>> pts = {{0.0}, {0.5}, {1.0}};
    const std::vector<double> vals = {1.0, 0.0, 1.0};
    const auto b = quasiconcave_envelope(pts, vals, {0.0, 0.5, 1.0});
    CHECK(b.v[1] == doctest::Approx(1.0));
    CHECK(b.v[0] == 1.0);
}

TEST_CASE("quasi-concave benchmark for the ambiguity-loving model") {
    const CEUtility u(kLoving);
    const auto b = quasiconcavify(u, 10.0, 13, 64);
    for (std::size_t i = 0; i < b.u.size(); ++i) CHECK(b.v[i] >= b.u[i] - 1e-12);
    const auto eps = measure_eps_ua(u, b.chain_triples);
    const auto rep = verify_quasiconcave_bound(b, eps.value);
    CHECK(rep.passed);
    CHECK(rep.achieved_distance <= rep.bound);
}

TEST_CASE("ce construction rejects bad priors") {
    CHECK_THROWS_AS(CEUtility(ActModel{Seu{{0.4, 0.4}}}), InvalidInput);
    CHECK_THROWS_AS(CEUtility(ActModel{TiltedSeu{{0.5, 0.5}, 0.9}}), InvalidInput);
}
