// Acceptance criteria, one line each. Exit status is the number of failures.

#include "nearrep/risk.hpp"
#include "nearrep/timepref.hpp"
#include "nearrep/uncertainty.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

using namespace nearrep;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = budget_s <= 0.0 || secs < budget_s;
    const bool ok = o.ok && in_time;
    if (!ok) ++failures;
    char budget[32] = "none";
    if (budget_s > 0.0) std::snprintf(budget, sizeof budget, "%.0f s", budget_s);
    std::printf("[%s] %2d %-36s %s (%.3f s, budget %s)%s\n", ok ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs,
                budget, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<Act> box(std::size_t dim, std::size_t n, double bound) {
    std::vector<Act> out;
    for (const auto& g : grid_sample(GridSpec{SpaceKind::Box, dim, n, bound})) out.emplace_back(g);
    return out;
}

const RiskModel kCpt3 = Cpt{{4000.0, 3000.0, 0.0}, 0.54, 0.74};

}  // namespace

int main() {
    criterion(1, "Allais/CPT reproduction", 1.0, [] {
        const auto a = risk::allais_report();
        const bool ok = a.b_over_a && a.c_over_d && a.d_prime_over_c && a.lambda_star > 0.25 && a.lambda_star < 0.27;
        return Outcome{ok, fmt("U(A)=%.3f U(B)=%.3f U(C)=%.3f U(D)=%.3f", a.u_a, a.u_b, a.u_c, a.u_d) +
                               fmt(" U(D')=%.3f lambda*=%.6f", a.u_d_prime, a.lambda_star)};
    });

    criterion(2, "Figure 1 max |w(p)-p| <= 0.1", 1.0, [] {
        const auto f = risk::figure1_data(100001);
        return Outcome{f.max_abs_deviation <= 0.1,
                       fmt("max=%.6f at p=%.6f (grid 1e-5 + Brent)", f.max_abs_deviation, f.argmax)};
    });

    criterion(3, "affine bound, CPT 3 prizes, N=101", 30.0, [] {
        const risk::MixtureUtility u(kCpt3);
        const auto sampler = risk::make_rcl_sampler(3, 101);
        const auto eps = risk::measure_eps_rcl(u, sampler);
        const auto l = risk::build_affine_benchmark(u);
        double worst_ratio = 0.0, degenerate_gap = 0.0;
        bool ok = true;
        for (const auto& p : sampler.points) {
            const double gap = std::abs(u(p) - l(p));
            if (p.is_degenerate()) {
                degenerate_gap = std::max(degenerate_gap, gap);
                continue;
            }
            const double allowed = static_cast<double>(p.support() - 1) * eps.value;
            ok = ok && gap < allowed + 1e-7;
            worst_ratio = std::max(worst_ratio, gap / allowed);
        }
        ok = ok && degenerate_gap <= 1e-7 && eps.value > 0.0;
        return Outcome{ok, fmt("eps=%.6g max gap/((supp-1)eps)=%.4f degenerate gap=%.2g points=%.0f", eps.value,
                               worst_ratio, degenerate_gap, static_cast<double>(sampler.points.size()))};
    });

    criterion(4, "converse: defects < 4 eps", 30.0, [] {
        const risk::MixtureUtility u(kCpt3);
        const auto l = risk::build_affine_benchmark(u);
        const auto triples = risk::make_rcl_sampler(3, 40).triples;
        double worst_ratio = 0.0;
        bool ok = true;
        for (double eps : {0.001, 0.005, 0.01, 0.02}) {
            const auto tab = risk::perturbed_tabulation(l, u.best(), u.worst(), 0.9 * eps, 40);
            const auto r = risk::converse_check_4eps(tab, l, eps, triples);
            ok = ok && r.value < 4.0 * eps;
            worst_ratio = std::max(worst_ratio, r.value / eps);
        }
        return Outcome{ok, fmt("max defect/eps=%.4f over eps in {0.001,0.005,0.01,0.02}", worst_ratio)};
    });

    criterion(5, "smooth ambiguity sup|u-v| <= 1", 10.0, [] {
        bool ok = true;
        std::string detail;
        for (AmbiguityKernel k : {AmbiguityKernel::Sqrt1pz2, AmbiguityKernel::ZMinusExp}) {
            const SmoothAmbiguity m{k, {{0.3, 0.7}, {0.8, 0.2}}, {0.5, 0.5}};
            const auto rep = uncertainty::smooth_ambiguity_bound(m, box(2, 50, 10.0));
            const double at_zero = std::abs(uncertainty::smooth_ambiguity_defect(m, Act::constant(0.0, 2)));
            const auto pbar = uncertainty::mean_prior(m);
            const auto v = uncertainty::extract_prior(uncertainty::CEUtility(m));
            const double prior_gap =
                std::max(std::abs(v.probabilities()[0] - pbar[0]), std::abs(v.probabilities()[1] - pbar[1]));
            ok = ok && rep.achieved_distance <= 1.0 && std::abs(at_zero - 1.0) <= 1e-9 &&
                 std::abs(rep.achieved_distance - 1.0) <= 1e-9 && prior_gap <= 1e-6;
            detail += to_string(k) + fmt(": sup=%.12f prior gap=%.2g; ", rep.achieved_distance, prior_gap);
        }
        return Outcome{ok, detail};
    });

    criterion(6, "MEU divergence + homothety", 0.0, [] {
        const uncertainty::CEUtility u(Meu{{{0.3, 0.7}, {0.7, 0.3}}});
        const TailSum s = uncertainty::theta_series(u, {Act::unit(2, 0), Act::unit(2, 1)}, 20);
        double sums_gap = 0.0;
        for (int n = 0; n <= 20; ++n) sums_gap = std::max(sums_gap, std::abs(s.partial_sums[n] - 0.2 * (n + 1)));
        double homog_gap = 0.0;
        for (const Act& x : box(2, 6, 10.0))
            for (int n = 0; n <= 20; ++n)
                homog_gap = std::max(homog_gap, std::abs(std::ldexp(u(x.scaled(std::ldexp(1.0, n))), -n) - u(x)));
        const bool ok = sums_gap <= 1e-9 && !s.converged && homog_gap <= 1e-9;
        return Outcome{ok, fmt("partial-sum gap=%.2g non-convergent=%.0f homothety gap=%.2g", sums_gap,
                               s.converged ? 0.0 : 1.0, homog_gap)};
    });

    criterion(7, "quasi-concave benchmark, d=2, 41^2", 120.0, [] {
        const SmoothAmbiguity m{AmbiguityKernel::Sqrt1pz2, {{0.3, 0.7}, {0.8, 0.2}}, {0.5, 0.5}};
        const uncertainty::CEUtility u(m);
        const auto b = uncertainty::quasiconcavify(u, 10.0, 41, 64);
        auto triples = b.chain_triples;
        for (auto& t : uncertainty::make_ua_sampler(box(2, 9, 10.0), 3)) triples.push_back(std::move(t));
        const auto eps = uncertainty::measure_eps_ua(u, triples);
        const auto rep = uncertainty::verify_quasiconcave_bound(b, eps.value);
        double below = 0.0;
        for (std::size_t i = 0; i < b.u.size(); ++i) below = std::max(below, b.u[i] - b.v[i]);
        const bool ok = rep.passed && below <= 0.0 && rep.achieved_distance <= 2.0 * eps.value + b.spacing + 1e-7;
        return Outcome{ok, fmt("eps_ua=%.6g sup|u-v|=%.6g bound=%.6g spacing=%.3g", eps.value, rep.achieved_distance,
                               2.0 * eps.value + b.spacing, b.spacing)};
    });

    criterion(8, "quasi-hyperbolic tightness", 1.0, [] {
        const timepref::DiscountCurve qh(QuasiHyperbolic{0.9, 0.95}, 200);
        std::vector<double> ts, all;
        for (int t = 1; t <= 50; ++t) ts.push_back(t);
        for (int t = 1; t <= 200; ++t) all.push_back(t);
        const auto th = timepref::theta_series(qh, ts);
        const auto fit = timepref::fit_gamma(qh);
        const auto rep = timepref::verify_exp_bound(qh, fit.gamma, th.report.value, all);
        const double theta_gap = std::abs(th.report.value - std::abs(std::log(0.9)));
        const bool ok = theta_gap <= 1e-9 && std::abs(fit.gamma - 0.95) <= 1e-6 &&
                        std::abs(rep.achieved_distance - th.report.value) <= 1e-9;
        return Outcome{ok, fmt("theta=%.12f gamma=%.12f sup=%.12f", th.report.value, fit.gamma, rep.achieved_distance)};
    });

    criterion(9, "exact recovery recipe", 1.0, [] {
        const auto a = timepref::exact_recovery(timepref::DiscountCurve(Exponential{0.9}, 200), 0.0);
        const auto b = timepref::exact_recovery(timepref::DiscountCurve(Exponential{0.5}, 200), 0.1);
        const bool ok = a.parameters.at("tau") == 14 && std::abs(a.parameters.at("gamma") - 0.9) <= 1e-9 &&
                        a.achieved_distance <= 1e-9 && b.parameters.at("tau") == 2 &&
                        std::abs(b.parameters.at("gamma") - 0.5) <= 1e-9 && b.achieved_distance <= 1e-9;
        return Outcome{ok, fmt("0.9: tau=%.0f gamma=%.12f; 0.5: tau=%.0f gamma=%.12f", a.parameters.at("tau"),
                               a.parameters.at("gamma"), b.parameters.at("tau"), b.parameters.at("gamma"))};
    });

    criterion(10, "time-shift representation", 10.0, [] {
        auto run = [](const timepref::ContinuousTimeModel& model) {
            const timepref::GammaCurve c(model, -3.0);
            std::vector<timepref::LevelDelay> ld;
            std::vector<timepref::LevelTimeDelay> ltd;
            std::vector<timepref::LevelTime> lt;
            for (int i = 0; i <= 12; ++i) {
                const double x = -3.0 + 0.25 * i;
                for (int j = 0; j <= 10; ++j) ld.push_back({x, static_cast<double>(j)});
                for (int j = 0; j <= 25; ++j) {
                    const double t = 2.0 * j;
                    lt.push_back({x, t});
                    for (double d : {0.01, 1.0, 10.0}) ltd.push_back({x, t, d});
                }
            }
            const auto eps = timepref::measure_eps_stationarity(c, ld);
            const auto lam = timepref::measure_lambda_lipschitz(model, ltd);
            return std::make_tuple(eps.value, lam.value, timepref::verify_exp3_bound(c, eps.value, lam.value, lt));
        };
        const auto [e1, l1, r1] = run(timepref::log_hyperbolic(0.0, 0.1));
        const auto [e2, l2, r2] = run(timepref::linear_delay(0.0, 1.0));
        const bool ok = r1.achieved_distance <= l1 * e1 + 1e-6 && r2.achieved_distance <= 1e-7;
        return Outcome{ok, fmt("log-hyperbolic: sup=%.6g <= %.6g; linear: sup=%.2g", r1.achieved_distance, l1 * e1,
                               r2.achieved_distance)};
    });

    criterion(11, "oracle equivalence on exact models", 0.0, [] {
        double worst = 0.0;
        auto track = [&](double v) { worst = std::max(worst, std::abs(v)); };
        // Expected utility
        const RiskModel eu = ExpectedUtility{{0.0, 0.3, 1.0}};
        const risk::MixtureUtility ue(eu);
        track(risk::measure_eps_rcl(ue, risk::make_rcl_sampler(3, 30)).value);
        track(risk::measure_eps_independence(ue, risk::make_independence_sampler(ue, 10, 5, 2, 3)).value);
        const auto l = risk::build_affine_benchmark(ue);
        for (const auto& p : simplex_lattice(3, 20)) track(l(p) - evaluate(eu, p));
        // Subjective expected utility
        const uncertainty::CEUtility us(Seu{{0.35, 0.65}});
        const auto pts = box(2, 6, 10.0);
        track(uncertainty::theta_estimate(us, uncertainty::make_theta_pairs(pts)).report.value);
        track(uncertainty::measure_eps_ua(us, uncertainty::make_ua_sampler(pts, 3)).value);
        const auto v = uncertainty::extract_prior(us);
        track(v.probabilities()[0] - 0.35);
        track(v.probabilities()[1] - 0.65);
        for (const Act& x : pts) {
            track(uncertainty::measure_homog_deviation(us, x, 2.5));
            track(uncertainty::homog_limit(us, x, 2.0).value - us(x));
        }
        const auto qc = uncertainty::quasiconcavify(us, 10.0, 9, 4096);
        for (std::size_t i = 0; i < qc.u.size(); ++i) track(qc.v[i] - qc.u[i]);
        // Exponential discounting
        const timepref::DiscountCurve ex(Exponential{0.9}, 200);
        std::vector<double> ts;
        std::vector<timepref::DelayPair> pairs;
        for (int t = 1; t <= 50; ++t) ts.push_back(t);
        for (int s = 1; s <= 20; ++s)
            for (int t = 1; t <= 20; ++t) pairs.push_back({double(s), double(t)});
        track(timepref::theta_series(ex, ts).report.value);
        track(timepref::measure_W_axiom(ex, 1.0, pairs).value);
        track(timepref::fit_gamma(ex).gamma - 0.9);
        return Outcome{worst <= 1e-7, fmt("max meter/benchmark residual=%.3g", worst)};
    });

    std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
