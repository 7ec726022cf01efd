#include "nearrep/risk.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace nearrep::risk {

namespace {

void append(std::vector<double>& out, const std::vector<double>& block) {
    out.insert(out.end(), block.begin(), block.end());
}

Lottery random_lottery(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) sum += (x = expo(rng));
    for (double& x : v) x /= sum;
    return Lottery(std::move(v));
}

/// Memoizes u over repeated lotteries within one sweep.
class CachedUtility {
public:
    explicit CachedUtility(const MixtureUtility& u) : u_(u) {}
    double operator()(const Lottery& p) {
        auto [it, inserted] = cache_.try_emplace(p.probs(), 0.0);
        if (inserted) it->second = u_(p);
        return it->second;
    }

private:
    const MixtureUtility& u_;
    std::map<std::vector<double>, double> cache_;
};

}  // namespace

// ---------------------------------------------------------------------------
// MixtureUtility
// ---------------------------------------------------------------------------

MixtureUtility::MixtureUtility(RiskModel model, double tol)
    : model_(std::move(model)), tol_(tol), prizes_(nearrep::prize_count(model_)) {
    if (prizes_ < 2) throw InvalidInput("risk model needs at least two prizes");
    std::vector<double> values(prizes_);
    for (std::size_t i = 0; i < prizes_; ++i) values[i] = evaluate(model_, Lottery::degenerate(prizes_, i));
    best_ = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    worst_ = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    best_value_ = values[best_];
    worst_value_ = values[worst_];
    if (!(best_value_ > worst_value_))
        throw HypothesisFailed("extremality: best and worst prizes are indifferent");

    // Monotonicity along the calibration segment.
    constexpr int kChecks = 1000;
    double prev = worst_value_;
    for (int k = 1; k <= kChecks; ++k) {
        const double v = segment_value(static_cast<double>(k) / kChecks);
        if (!(v > prev)) {
            std::ostringstream msg;
            msg << "monotonicity: value along best/worst segment not increasing at alpha=" << k << "/"
                << kChecks;
            throw HypothesisFailed(msg.str());
        }
        prev = v;
    }

    if (const auto* tab = std::get_if<TabulatedUtility>(&model_)) {
        for (double v : tab->values())
            if (v > best_value_ + kStrictMargin || v < worst_value_ - kStrictMargin)
                throw HypothesisFailed("extremality: tabulated value outside the best/worst range");
    }
}

Lottery MixtureUtility::segment_point(double alpha) const {
    std::vector<double> probs(prizes_, 0.0);
    probs[best_] = alpha;
    probs[worst_] = 1.0 - alpha;
    return Lottery(std::move(probs));
}

double MixtureUtility::segment_value(double alpha) const { return evaluate(model_, segment_point(alpha)); }

double MixtureUtility::operator()(const Lottery& p) const {
    if (p.is_degenerate()) {
        if (p[best_] == 1.0) return 1.0;
        if (p[worst_] == 1.0) return 0.0;
    }
    const double target = evaluate(model_, p);
    try {
        return bisect_monotone([&](double a) { return segment_value(a) - target; }, 0.0, 1.0, tol_);
    } catch (const NoBracket& e) {
        throw NoBracket(std::string("extremality violated: lottery outside best/worst range; ") + e.what());
    }
}

double mixture_utility(const RiskModel& model, const Lottery& p, double tol) {
    return MixtureUtility(model, tol)(p);
}

AffineBenchmark::AffineBenchmark(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
    if (coefficients_.size() < 2) throw InvalidInput("affine benchmark needs at least two coefficients");
}

double AffineBenchmark::operator()(const Lottery& p) const {
    if (p.size() != coefficients_.size()) throw InvalidInput("affine benchmark: lottery size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * coefficients_[i];
    return total;
}

AffineBenchmark build_affine_benchmark(const MixtureUtility& u) {
    std::vector<double> coeffs(u.prize_count());
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = u(Lottery::degenerate(coeffs.size(), i));
    return AffineBenchmark(std::move(coeffs));
}

// ---------------------------------------------------------------------------
// Reduction of compound lotteries
// ---------------------------------------------------------------------------

std::vector<MixtureTriple> support_chain(const Lottery& p) {
    std::vector<MixtureTriple> out;
    std::vector<double> cur = p.probs();
    while (true) {
        std::vector<std::size_t> supp;
        for (std::size_t i = 0; i < cur.size(); ++i)
            if (cur[i] > 0.0) supp.push_back(i);
        if (supp.size() < 2) break;
        const std::size_t head = supp.front();
        const double weight = cur[head];
        std::vector<double> rest(cur.size(), 0.0);
        double rest_sum = 0.0;
        for (std::size_t i : supp)
            if (i != head) rest_sum += cur[i];
        for (std::size_t i : supp)
            if (i != head) rest[i] = cur[i] / rest_sum;
        Lottery rest_lottery(std::move(rest));
        out.push_back({Lottery::degenerate(cur.size(), head), rest_lottery, weight});
        cur = rest_lottery.probs();
    }
    return out;
}

RclSampler make_rcl_sampler(std::size_t prize_count, std::size_t resolution, std::size_t pair_resolution,
                            std::size_t lambda_resolution) {
    RclSampler s;
    s.resolution = resolution;
    s.points = simplex_lattice(prize_count, resolution);
    for (const Lottery& p : s.points)
        for (auto& t : support_chain(p)) s.triples.push_back(std::move(t));
    if (pair_resolution > 0 && lambda_resolution > 0) {
        const auto coarse = simplex_lattice(prize_count, pair_resolution);
        for (std::size_t i = 0; i < coarse.size(); ++i)
            for (std::size_t j = i + 1; j < coarse.size(); ++j)
                for (std::size_t k = 1; k <= lambda_resolution; ++k)
                    s.triples.push_back({coarse[i], coarse[j],
                                         static_cast<double>(k) / static_cast<double>(lambda_resolution + 1)});
    }
    return s;
}

double rcl_defect(const MixtureUtility& u, const MixtureTriple& t) {
    const Lottery mix = Lottery::mix(t.lambda, t.p0, t.p1);
    return std::abs(u(mix) - t.lambda * u(t.p0) - (1.0 - t.lambda) * u(t.p1));
}

ViolationReport measure_eps_rcl(const MixtureUtility& u, const RclSampler& sampler) {
    ViolationReport rep;
    rep.parameter = "eps_rcl";
    rep.witness_layout = "p0|p1|lambda";
    rep.note = "sample maximum over the supplied triples plus a 1e-12 strictness margin";
    CachedUtility cu(u);
    double worst = -1.0;
    const MixtureTriple* arg = nullptr;
    for (const auto& t : sampler.triples) {
        const Lottery mix = Lottery::mix(t.lambda, t.p0, t.p1);
        const double d = std::abs(cu(mix) - t.lambda * cu(t.p0) - (1.0 - t.lambda) * cu(t.p1));
        if (d > worst) {
            worst = d;
            arg = &t;
        }
        ++rep.samples_evaluated;
    }
    rep.value = std::max(worst, 0.0) + kStrictMargin;
    if (arg) {
        append(rep.witness, arg->p0.probs());
        append(rep.witness, arg->p1.probs());
        rep.witness.push_back(arg->lambda);
    }
    rep.diagnostics["grid_resolution"] = static_cast<double>(sampler.resolution);
    rep.diagnostics["bisection_tol"] = u.tol();
    return rep;
}

NearRepresentation verify_thm1(const MixtureUtility& u, const AffineBenchmark& l, double eps_hat,
                               const std::vector<Lottery>& points, double slack) {
    NearRepresentation rep;
    rep.kind = RepresentationKind::Affine;
    rep.coefficients = l.coefficients();
    rep.parameters["eps_hat"] = eps_hat;
    rep.bound = static_cast<double>(u.prize_count() - 1) * eps_hat;
    rep.note = "per-point bound (supp(p)-1)*eps; u = l on degenerate lotteries";
    std::size_t failures = 0;
    for (const Lottery& p : points) {
        const double dist = std::abs(u(p) - l(p));
        const std::size_t supp = p.support();
        const double allowed = supp <= 1 ? slack : static_cast<double>(supp - 1) * eps_hat + slack;
        const bool ok = supp <= 1 ? dist <= allowed : dist < allowed;
        if (dist > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, dist);
            if (failures == 0) rep.witness = p.probs();
        }
        if (!ok) {
            if (failures == 0) rep.witness = p.probs();
            ++failures;
        }
        ++rep.samples;
    }
    rep.parameters["failures"] = static_cast<double>(failures);
    if (failures > 0) {
        rep.passed = false;
        throw BoundViolated("affine benchmark bound violated at " + std::to_string(failures) +
                                " sample points; rerun the meter on a finer grid",
                            rep);
    }
    return rep;
}

TabulatedUtility perturbed_tabulation(const AffineBenchmark& l, std::size_t best, std::size_t worst,
                                      double amplitude, std::size_t resolution) {
    const std::size_t n = l.coefficients().size();
    return TabulatedUtility::tabulate(n, resolution, [&](const Lottery& p) {
        const double mid = std::max(0.0, 1.0 - p[best] - p[worst]);
        return l(p) + amplitude * std::sin(std::numbers::pi * p[best]) * std::cos(std::numbers::pi * mid);
    });
}

ViolationReport converse_check_4eps(const TabulatedUtility& u_tab, const AffineBenchmark& l, double eps,
                                    const std::vector<MixtureTriple>& triples) {
    if (!(eps > 0.0)) throw InvalidInput("converse check needs eps > 0");
    const auto lattice = simplex_lattice(u_tab.prize_count(), u_tab.resolution());
    double sup = 0.0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const double v = u_tab.values()[i];
        const double dist = std::abs(v - l(lattice[i]));
        sup = std::max(sup, dist);
        if (lattice[i].is_degenerate() && dist > kStrictMargin)
            throw HypothesisFailed("converse: tabulated utility differs from benchmark at a vertex");
        if (v < -kStrictMargin || v > 1.0 + kStrictMargin)
            throw HypothesisFailed("converse: tabulated utility leaves [0,1]");
    }
    if (!(sup < eps)) {
        std::ostringstream msg;
        msg << "converse: sup |u - l| = " << sup << " is not below eps = " << eps;
        throw HypothesisFailed(msg.str());
    }

    const MixtureUtility u(RiskModel{u_tab});
    ViolationReport rep;
    rep.parameter = "rcl_defect_converse";
    rep.witness_layout = "p0|p1|lambda";
    CachedUtility cu(u);
    double worst = 0.0;
    const MixtureTriple* arg = nullptr;
    for (const auto& t : triples) {
        const Lottery mix = Lottery::mix(t.lambda, t.p0, t.p1);
        const double d = std::abs(cu(mix) - t.lambda * cu(t.p0) - (1.0 - t.lambda) * cu(t.p1));
        if (d > worst || !arg) {
            worst = std::max(worst, d);
            arg = &t;
        }
        ++rep.samples_evaluated;
    }
    rep.value = worst;
    if (arg) {
        append(rep.witness, arg->p0.probs());
        append(rep.witness, arg->p1.probs());
        rep.witness.push_back(arg->lambda);
    }
    rep.diagnostics["eps"] = eps;
    rep.diagnostics["sup_u_minus_l"] = sup;
    rep.diagnostics["defect_over_eps"] = worst / eps;
    rep.diagnostics["guarantee"] = 4.0 * eps;
    rep.note = worst < 4.0 * eps ? "defect below 4*eps" : "defect NOT below 4*eps";
    return rep;
}

// ---------------------------------------------------------------------------
// Independence
// ---------------------------------------------------------------------------

std::vector<IndependenceTuple> make_independence_sampler(const MixtureUtility& u, std::size_t pair_count,
                                                         std::size_t alpha_resolution,
                                                         std::size_t mixer_count, std::uint64_t seed) {
    const std::size_t n = u.prize_count();
    const RiskModel& model = u.model();
    std::mt19937_64 rng(seed);
    const Lottery best = Lottery::degenerate(n, u.best());
    const Lottery worst = Lottery::degenerate(n, u.worst());

    std::vector<std::pair<Lottery, Lottery>> pairs;
    for (std::size_t k = 0; k < pair_count; ++k) {
        Lottery p = random_lottery(n, rng);
        Lottery z = random_lottery(n, rng);
        const double target = evaluate(model, p);
        const bool z_above = evaluate(model, z) >= target;
        const Lottery& hi = z_above ? z : best;
        const Lottery& lo = z_above ? worst : z;
        const double t = bisect_monotone(
            [&](double s) { return evaluate(model, Lottery::mix(s, hi, lo)) - target; }, 0.0, 1.0, u.tol());
        pairs.emplace_back(std::move(p), Lottery::mix(t, hi, lo));
    }

    std::vector<Lottery> mixers;
    for (std::size_t i = 0; i < n; ++i) mixers.push_back(Lottery::degenerate(n, i));
    for (std::size_t k = 0; k < mixer_count; ++k) mixers.push_back(random_lottery(n, rng));

    std::vector<IndependenceTuple> out;
    for (const auto& [p, q] : pairs)
        for (std::size_t a = 1; a <= alpha_resolution; ++a)
            for (const Lottery& r : mixers)
                out.push_back({p, q, static_cast<double>(a) / static_cast<double>(alpha_resolution + 1), r});
    return out;
}

AlphaPrime nearest_alpha_prime(const RiskModel& model, const IndependenceTuple& t, double step, double tol) {
    const double target = evaluate(model, Lottery::mix(t.alpha, t.p, t.r));
    auto h = [&](double a) { return evaluate(model, Lottery::mix(a, t.q, t.r)) - target; };
    const double h0 = h(t.alpha);
    if (h0 == 0.0) return {t.alpha, true};

    auto solve = [&](double a, double ha, double b, double hb) -> double {
        if (ha == 0.0) return a;
        if (hb == 0.0) return b;
        return bisect_monotone(h, std::min(a, b), std::max(a, b), tol);
    };

    double r_prev = t.alpha, hr_prev = h0;
    double l_prev = t.alpha, hl_prev = h0;
    bool right_open = t.alpha < 1.0;
    bool left_open = t.alpha > 0.0;
    for (int k = 1; right_open || left_open; ++k) {
        std::optional<double> right, left;
        if (right_open) {
            const double r = std::min(1.0, t.alpha + k * step);
            const double hr = h(r);
            if (hr == 0.0 || (hr > 0.0) != (hr_prev > 0.0)) right = solve(r_prev, hr_prev, r, hr);
            r_prev = r;
            hr_prev = hr;
            right_open = r < 1.0;
        }
        if (left_open) {
            const double l = std::max(0.0, t.alpha - k * step);
            const double hl = h(l);
            if (hl == 0.0 || (hl > 0.0) != (hl_prev > 0.0)) left = solve(l, hl, l_prev, hl_prev);
            l_prev = l;
            hl_prev = hl;
            left_open = l > 0.0;
        }
        if (right && left)
            return {std::abs(*right - t.alpha) <= std::abs(*left - t.alpha) ? *right : *left, true};
        if (right) return {*right, true};
        if (left) return {*left, true};
    }
    return {};
}

ViolationReport measure_eps_independence(const MixtureUtility& u, const std::vector<IndependenceTuple>& tuples) {
    ViolationReport rep;
    rep.parameter = "eps_independence";
    rep.witness_layout = "p|q|alpha|r|alpha_prime";
    std::size_t no_root = 0;
    double worst = -1.0;
    const IndependenceTuple* arg = nullptr;
    double arg_prime = 0.0;
    for (const auto& t : tuples) {
        const AlphaPrime ap = nearest_alpha_prime(u.model(), t, 1e-3, u.tol());
        const double d = ap.found ? std::abs(t.alpha - ap.value) : 1.0;
        if (!ap.found) ++no_root;
        if (d > worst) {
            worst = d;
            arg = &t;
            arg_prime = ap.found ? ap.value : std::numeric_limits<double>::quiet_NaN();
        }
        ++rep.samples_evaluated;
    }
    rep.value = std::max(worst, 0.0);
    if (arg) {
        append(rep.witness, arg->p.probs());
        append(rep.witness, arg->q.probs());
        rep.witness.push_back(arg->alpha);
        append(rep.witness, arg->r.probs());
        rep.witness.push_back(arg_prime);
    }
    rep.diagnostics["no_root_tuples"] = static_cast<double>(no_root);
    rep.note = no_root ? "some tuples admit no restoring alpha'; the relaxed axiom fails for every eps < 1"
                       : "nearest restoring alpha' found for every tuple";
    return rep;
}

NearRepresentation verify_thm2(const MixtureUtility& u, const AffineBenchmark& l, double eps_hat,
                               const std::vector<Lottery>& points, double slack) {
    NearRepresentation rep;
    rep.kind = RepresentationKind::Affine;
    rep.coefficients = l.coefficients();
    const double n = static_cast<double>(u.prize_count());
    rep.parameters["eps_hat"] = eps_hat;
    rep.bound = n * n * eps_hat;
    rep.note = "uniform bound (d+1)^2 * eps";
    std::size_t failures = 0;
    for (const Lottery& p : points) {
        const double dist = std::abs(u(p) - l(p));
        const bool ok = p.is_degenerate() ? dist <= slack : dist < rep.bound + slack;
        if (dist > rep.achieved_distance && failures == 0) rep.witness = p.probs();
        rep.achieved_distance = std::max(rep.achieved_distance, dist);
        if (!ok) {
            if (failures == 0) rep.witness = p.probs();
            ++failures;
        }
        ++rep.samples;
    }
    rep.parameters["failures"] = static_cast<double>(failures);
    if (failures > 0) {
        rep.passed = false;
        throw BoundViolated("independence bound violated at " + std::to_string(failures) + " sample points", rep);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Allais / Figure 1
// ---------------------------------------------------------------------------

AllaisReport allais_report(double value_exponent, double weighting_exponent) {
    const RiskModel model = Cpt{{4000.0, 3000.0, 0.0}, value_exponent, weighting_exponent};
    auto value = [&](double p4000, double p3000) {
        return evaluate(model, Lottery({p4000, p3000, 1.0 - p4000 - p3000}));
    };
    AllaisReport r;
    r.value_exponent = value_exponent;
    r.weighting_exponent = weighting_exponent;
    r.u_a = value(0.8, 0.0);
    r.u_b = value(0.0, 1.0);
    r.u_c = value(0.2, 0.0);
    r.u_d = value(0.0, 0.25);
    r.u_d_prime = value(0.0, 0.27);
    r.b_over_a = r.u_b > r.u_a;
    r.c_over_d = r.u_c > r.u_d;
    r.d_prime_over_c = r.u_d_prime > r.u_c;
    r.lambda_star = bisect_monotone([&](double l) { return value(0.0, l) - r.u_c; }, 0.0, 1.0, kBisectionTol);
    return r;
}

Figure1Data figure1_data(std::size_t resolution, double weighting_exponent) {
    if (resolution < 1001) throw InvalidInput("figure1_data needs resolution >= 1001");
    Figure1Data out;
    out.rows.reserve(resolution);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < resolution; ++i) {
        const double p = i + 1 == resolution ? 1.0 : static_cast<double>(i) / static_cast<double>(resolution - 1);
        const double w = cpt_weight(p, weighting_exponent);
        out.rows.push_back({p, w, p, w - p});
        if (std::abs(w - p) > std::abs(out.rows[arg].difference)) arg = i;
    }
    out.argmax = out.rows[arg].p;
    out.max_abs_deviation = std::abs(out.rows[arg].difference);
    if (arg > 0 && arg + 1 < resolution) {
        auto neg_dev = [&](double p) { return -std::abs(cpt_weight(p, weighting_exponent) - p); };
        const auto [p_star, f_star] = boost::math::tools::brent_find_minima(
            neg_dev, out.rows[arg - 1].p, out.rows[arg + 1].p, std::numeric_limits<double>::digits / 2);
        if (-f_star > out.max_abs_deviation) {
            out.max_abs_deviation = -f_star;
            out.argmax = p_star;
        }
    }
    return out;
}

}  // namespace nearrep::risk
