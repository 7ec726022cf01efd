#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nearrep/prefcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace nearrep;

namespace {

double weight_oracle(double p, double b) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return std::pow(p, b) / std::pow(std::pow(p, b) + std::pow(1.0 - p, b), 1.0 / b);
}

// Rank-dependent value over prizes sorted best first.
double rdu_oracle(std::vector<std::pair<double, double>> prize_prob, double a, double b) {
    std::sort(prize_prob.begin(), prize_prob.end(), [](auto& l, auto& r) { return l.first > r.first; });
    double cum = 0.0, total = 0.0;
    for (auto [x, p] : prize_prob) {
        total += (weight_oracle(cum + p, b) - weight_oracle(cum, b)) * std::pow(x, a);
        cum += p;
    }
    return total;
}

std::size_t binom(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return static_cast<std::size_t>(std::llround(r));
}

}  // namespace

TEST_CASE("lottery validation") {
    CHECK_THROWS_AS(Lottery({0.5, 0.6}), InvalidInput);
    CHECK_THROWS_AS(Lottery({-0.1, 1.1}), InvalidInput);
    CHECK_THROWS_AS(Lottery({1.0}), InvalidInput);
    const Lottery p({0.2, 0.0, 0.8});
    CHECK(p.support() == 2);
    CHECK(Lottery::degenerate(3, 1).is_degenerate());
    CHECK_THROWS_AS(Lottery::degenerate(3, 3), InvalidInput);
    const Lottery m = Lottery::mix(0.25, Lottery::degenerate(3, 0), p);
    CHECK(m[0] == doctest::Approx(0.25 + 0.75 * 0.2));
    CHECK_THROWS_AS(Lottery::mix(1.5, p, p), InvalidInput);
}

TEST_CASE("act arithmetic") {
    CHECK_THROWS_AS(Act({-1.0, 2.0}), InvalidInput);
    const Act x({1.0, 3.0});
    CHECK(x.min() == 1.0);
    CHECK(x.max() == 3.0);
    CHECK(Act::constant(2.0, 3).is_constant());
    CHECK(Act::sum(x, x) == x.scaled(2.0));
    CHECK(Act::mix(0.5, x, Act({3.0, 1.0})) == Act::constant(2.0, 2));
}

TEST_CASE("cpt weighting matches its closed form") {
    for (double b : {0.5, 0.74, 1.0}) {
        CHECK(cpt_weight(0.0, b) == 0.0);
        CHECK(cpt_weight(1.0, b) == doctest::Approx(1.0).epsilon(1e-14));
        for (int i = 1; i < 100; ++i) {
            const double p = i / 100.0;
            CHECK(cpt_weight(p, b) == doctest::Approx(weight_oracle(p, b)).epsilon(1e-13));
        }
    }
}

TEST_CASE("cpt weighting is increasing for b = 0.74") {
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double w = cpt_weight(i / 1000.0, 0.74);
        CHECK(w > prev);
        prev = w;
    }
}

TEST_CASE("cpt evaluation equals a rank-dependent sum") {
    const Cpt m{{4000.0, 3000.0, 0.0}, 0.54, 0.74};
    std::mt19937_64 rng(7);
    std::gamma_distribution<double> g(1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> p = {g(rng), g(rng), g(rng)};
        const double s = p[0] + p[1] + p[2];
        for (double& v : p) v /= s;
        const double expect = rdu_oracle({{4000.0, p[0]}, {3000.0, p[1]}, {0.0, p[2]}}, 0.54, 0.74);
        CHECK(evaluate(RiskModel{m}, Lottery(p)) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("expected utility evaluation") {
    const RiskModel m = ExpectedUtility{{0.0, 2.0, 5.0}};
    CHECK(evaluate(m, Lottery({0.2, 0.3, 0.5})) == doctest::Approx(3.1));
    CHECK(prize_count(m) == 3);
}

TEST_CASE("act models") {
    const Act x({2.0, 6.0});
    CHECK(evaluate(ActModel{Seu{{0.25, 0.75}}}, x) == doctest::Approx(5.0));
    CHECK(evaluate(ActModel{Meu{{{0.3, 0.7}, {0.7, 0.3}}}}, x) == doctest::Approx(0.7 * 2 + 0.3 * 6));
    const SmoothAmbiguity sa{AmbiguityKernel::Sqrt1pz2, {{0.3, 0.7}, {0.8, 0.2}}, {0.5, 0.5}};
    const double expect = 0.5 * std::sqrt(1 + std::pow(0.6 + 4.2, 2)) + 0.5 * std::sqrt(1 + std::pow(1.6 + 1.2, 2));
    CHECK(evaluate(ActModel{sa}, x) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(ambiguity_kernel(AmbiguityKernel::ZMinusExp, 0.0) == -1.0);
    CHECK_THROWS_AS(evaluate(ActModel{Seu{{0.5, 0.6}}}, x), InvalidInput);
}

TEST_CASE("bisection finds the cube root of two") {
    const double r = bisect_monotone([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 1e-12);
    CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-11));
    CHECK_THROWS_AS(bisect_monotone([](double x) { return x + 1.0; }, 0.0, 1.0), NoBracket);
}

TEST_CASE("simplex lattice: size and sums") {
    for (std::size_t d : {2u, 3u, 4u}) {
        for (std::size_t n : {1u, 5u, 10u}) {
            const auto pts = simplex_lattice(d, n);
            CHECK(pts.size() == binom(n + d - 1, d - 1));
            for (const auto& p : pts) {
                const double s = std::accumulate(p.probs().begin(), p.probs().end(), 0.0);
                CHECK(std::abs(s - 1.0) <= kSimplexSumTol);
            }
        }
    }
}

TEST_CASE("box grid covers both corners") {
    const auto pts = grid_sample(GridSpec{SpaceKind::Box, 2, 5, 4.0});
    CHECK(pts.size() == 25);
    bool lo = false, hi = false;
    for (const auto& p : pts) {
        lo = lo || (p[0] == 0.0 && p[1] == 0.0);
        hi = hi || (p[0] == 4.0 && p[1] == 4.0);
    }
    CHECK(lo);
    CHECK(hi);
}

TEST_CASE("random extras are reproducible by seed") {
    GridSpec spec{SpaceKind::Simplex, 3, 4, 1.0, 0.0, 10, 42};
    CHECK(grid_sample(spec) == grid_sample(spec));
    GridSpec other = spec;
    other.seed = 43;
    CHECK(grid_sample(spec) != grid_sample(other));
}

TEST_CASE("dyadic tail sum") {
    const TailSum geo = dyadic_tail_sum([](int i) { return std::ldexp(1.0, -i); }, 40);
    CHECK(geo.partial_sum == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(geo.converged);
    CHECK(geo.partial_sums.size() == 41);
    const TailSum flat = dyadic_tail_sum([](int) { return 0.1; }, 20);
    CHECK_FALSE(flat.converged);
    CHECK(flat.partial_sum == doctest::Approx(2.1));
}

TEST_CASE("tabulated utility reproduces affine functions") {
    const std::vector<double> c = {0.3, -1.0, 2.0, 0.5};
    auto affine = [&](const Lottery& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * p[i];
        return s;
    };
    const auto tab = TabulatedUtility::tabulate(4, 6, affine);
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(1.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(4);
        double s = 0.0;
        for (double& v : p) s += (v = e(rng));
        for (double& v : p) v /= s;
        const Lottery q(p);
        CHECK(tab(q) == doctest::Approx(affine(q)).epsilon(1e-12));
    }
}

TEST_CASE("tabulated utility rejects a wrong value count") {
    CHECK_THROWS_AS(TabulatedUtility(3, 4, std::vector<double>(3, 0.0)), InvalidInput);
}
