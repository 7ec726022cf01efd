#include "nearrep/uncertainty.hpp"

#include "nearrep/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace nearrep::uncertainty {

namespace {

Act scaled_pow2(const Act& x, int n) {
    std::vector<double> v(x.payoffs());
    for (double& c : v) c = std::ldexp(c, n);
    return Act(std::move(v));
}

void append(std::vector<double>& out, const std::vector<double>& block) {
    out.insert(out.end(), block.begin(), block.end());
}

class CachedUtility {
public:
    explicit CachedUtility(const CEUtility& u) : u_(u) {}
    double operator()(const Act& x) {
        auto [it, inserted] = cache_.try_emplace(x.payoffs(), 0.0);
        if (inserted) it->second = u_(x);
        return it->second;
    }

private:
    const CEUtility& u_;
    std::map<std::vector<double>, double> cache_;
};

int guard_for(double scale, double base, int n_max) {
    if (!(scale > 0.0)) return n_max;
    const int n = static_cast<int>(std::floor(std::log(kRangeGuard / scale) / std::log(base)));
    return std::clamp(n, 0, n_max);
}

}  // namespace

// ---------------------------------------------------------------------------
// Certainty-equivalent utility
// ---------------------------------------------------------------------------

CEUtility::CEUtility(ActModel model, double tol)
    : model_(std::move(model)), tol_(tol), states_(state_count(model_)) {
    if (states_ == 0) throw InvalidInput("act model has no states");
    if (!(tol_ > 0.0)) throw InvalidInput("tolerance must be positive");
    // Validates parameters through a first evaluation.
    evaluate(model_, Act::constant(0.0, states_));
    if (const auto* t = std::get_if<TiltedSeu>(&model_)) {
        if (t->amplitude < 0.0 || t->amplitude >= std::min(t->prior.front(), t->prior.back()))
            throw InvalidInput("tilted seu: amplitude must lie in [0, min(prior_0, prior_last))");
    }
    normalized_ = !std::holds_alternative<SmoothAmbiguity>(model_);
}

double CEUtility::operator()(const Act& x) const {
    if (x.size() != states_) throw InvalidInput("act size does not match model");
    if (x.is_constant()) return x[0];
    if (normalized_) return evaluate(model_, x);
    const double target = evaluate(model_, x);
    const double lo = x.min();
    const double hi = x.max();
    const double tol = std::min(tol_, 1e-12 * std::max(1.0, hi));
    try {
        return bisect_monotone(
            [&](double c) { return evaluate(model_, Act::constant(c, states_)) - target; }, lo, hi, tol);
    } catch (const NoBracket& e) {
        throw NoBracket(std::string("monotonicity violated: certainty equivalent outside [min x, max x]; ") +
                        e.what());
    }
}

double ce_utility(const ActModel& model, const Act& x, double tol) { return CEUtility(model, tol)(x); }

double measure_phi(const CEUtility& u, const Act& x, const Act& y) {
    return std::abs(u(Act::mix(0.5, x, y)) - 0.5 * u(x) - 0.5 * u(y));
}

int doubling_guard(const Act& x, int n_max) { return guard_for(x.max(), 2.0, n_max); }

// ---------------------------------------------------------------------------
// Doubling limit
// ---------------------------------------------------------------------------

std::vector<ActPair> make_theta_pairs(const std::vector<Act>& points) {
    std::vector<ActPair> out;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) out.push_back({points[i], points[j]});
    for (const Act& x : points) out.push_back({x.scaled(2.0), Act::constant(0.0, x.size())});
    return out;
}

TailSum theta_series(const CEUtility& u, const ActPair& pair, int n_max) {
    const int n = std::min(doubling_guard(pair.x, n_max), doubling_guard(pair.y, n_max));
    return dyadic_tail_sum(
        [&](int i) { return std::ldexp(measure_phi(u, scaled_pow2(pair.x, i), scaled_pow2(pair.y, i)), -i); },
        n);
}

ThetaEstimate theta_estimate(const CEUtility& u, const std::vector<ActPair>& pairs, int n_max) {
    ThetaEstimate out;
    out.report.parameter = "theta";
    out.report.witness_layout = "x|y";
    out.report.note = "sample maximum of the dyadic phi series; convergence flag is a ratio-test heuristic";
    std::size_t divergent = 0;
    double best = -1.0;
    for (const auto& pair : pairs) {
        TailSum s = theta_series(u, pair, n_max);
        if (!s.converged) ++divergent;
        if (s.partial_sum > best) {
            best = s.partial_sum;
            out.report.witness.clear();
            append(out.report.witness, pair.x.payoffs());
            append(out.report.witness, pair.y.payoffs());
            out.partial_sums = std::move(s.partial_sums);
        }
        ++out.report.samples_evaluated;
    }
    out.report.value = std::max(best, 0.0);
    out.converged = divergent == 0;
    out.report.diagnostics["n_max"] = n_max;
    out.report.diagnostics["nonconvergent_pairs"] = static_cast<double>(divergent);
    out.report.diagnostics["converged"] = out.converged ? 1.0 : 0.0;
    return out;
}

LimitResult hyers_ulam_limit(const CEUtility& u, const Act& x, double tol, int n_max) {
    const int guard = doubling_guard(x, n_max);
    LimitResult out;
    out.iterates.push_back(u(x));
    int stop = -1;
    for (int n = 0; n < guard; ++n) {
        out.iterates.push_back(std::ldexp(u(scaled_pow2(x, n + 1)), -(n + 1)));
        if (std::abs(out.iterates[n + 1] - out.iterates[n]) <= tol) {
            stop = n;
            break;
        }
    }
    if (stop < 0) throw NotConverged("doubling sequence did not meet its Cauchy criterion", guard);
    out.n_used = stop;
    out.value = out.iterates[stop];
    const Act zero = Act::constant(0.0, x.size());
    for (int j = stop; j < guard; ++j)
        out.tail_bound += std::ldexp(measure_phi(u, scaled_pow2(x, j + 1), zero), -j);
    return out;
}

LinearBenchmark::LinearBenchmark(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    if (p_.empty()) throw InvalidInput("linear benchmark needs at least one state");
}

double LinearBenchmark::operator()(const Act& x) const {
    if (x.size() != p_.size()) throw InvalidInput("linear benchmark: act size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) total += p_[i] * x[i];
    return total;
}

LinearBenchmark extract_prior(const CEUtility& u, double tol, int n_max) {
    const std::size_t d = u.states();
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = hyers_ulam_limit(u, Act::unit(d, i), tol, n_max).value;
    const double v_one = hyers_ulam_limit(u, Act::constant(1.0, d), tol, n_max).value;
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(sum - v_one) > 1e-6 || std::abs(v_one - 1.0) > 1e-6)
        throw NotAdditive("doubling limit is not additive: sum of v(e_i) differs from v(1)", sum, v_one);
    return LinearBenchmark(std::move(p));
}

NearRepresentation verify_aa_bound(const CEUtility& u, const LinearBenchmark& v, double theta_hat,
                                   const std::vector<Act>& points, double tol, std::optional<double> phi_cap) {
    NearRepresentation rep;
    rep.kind = RepresentationKind::Linear;
    rep.coefficients = v.probabilities();
    rep.bound = phi_cap ? 2.0 * *phi_cap : theta_hat;
    rep.parameters[phi_cap ? "phi_cap" : "theta_hat"] = phi_cap ? *phi_cap : theta_hat;
    rep.note = phi_cap ? "uniform phi cap: sup |u - v| <= 2 eps" : "sup |u - v| <= theta";
    for (const Act& x : points) {
        const double dist = std::abs(u(x) - v(x));
        if (dist > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, dist);
            rep.witness = x.payoffs();
        }
        ++rep.samples;
    }
    if (rep.achieved_distance > rep.bound + tol) {
        rep.passed = false;
        throw BoundViolated("linear benchmark bound violated; measure theta on a finer sample", rep);
    }
    return rep;
}

std::vector<double> mean_prior(const SmoothAmbiguity& model) {
    if (model.priors.empty() || model.priors.size() != model.weights.size())
        throw InvalidInput("smooth ambiguity: priors and weights must match");
    std::vector<double> pbar(model.priors.front().size(), 0.0);
    for (std::size_t k = 0; k < model.priors.size(); ++k)
        for (std::size_t i = 0; i < pbar.size(); ++i) pbar[i] += model.weights[k] * model.priors[k][i];
    return pbar;
}

double smooth_ambiguity_defect(const SmoothAmbiguity& model, const Act& x) {
    double total = 0.0;
    for (std::size_t k = 0; k < model.priors.size(); ++k) {
        double z = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) z += model.priors[k][i] * x[i];
        const double h = model.kernel == AmbiguityKernel::Sqrt1pz2 ? 1.0 / (std::hypot(1.0, z) + z) : std::exp(-z);
        total += model.weights[k] * h;
    }
    return model.kernel == AmbiguityKernel::Sqrt1pz2 ? total : -total;
}

NearRepresentation smooth_ambiguity_bound(const SmoothAmbiguity& model, const std::vector<Act>& points) {
    const LinearBenchmark v(mean_prior(model));
    const ActModel m = model;
    NearRepresentation rep;
    rep.kind = RepresentationKind::Linear;
    rep.coefficients = v.probabilities();
    rep.bound = 1.0;
    rep.note = "raw integral against mean-prior expectation, kernel " + to_string(model.kernel);
    double formula_gap = 0.0;
    for (const Act& x : points) {
        const double diff = evaluate(m, x) - v(x);
        formula_gap = std::max(formula_gap, std::abs(diff - smooth_ambiguity_defect(model, x)));
        if (std::abs(diff) > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, std::abs(diff));
            rep.witness = x.payoffs();
        }
        ++rep.samples;
    }
    rep.parameters["max_formula_gap"] = formula_gap;
    rep.passed = rep.achieved_distance <= rep.bound + kStrictMargin;
    return rep;
}

// ---------------------------------------------------------------------------
// Approximate homogeneity
// ---------------------------------------------------------------------------

double measure_homog_deviation(const CEUtility& u, const Act& x, double lambda) {
    if (!(lambda > 0.0)) throw InvalidInput("homogeneity: lambda must be positive");
    return std::abs(u(x.scaled(lambda)) - lambda * u(x));
}

HomogLimit homog_limit(const CEUtility& u, const Act& x, double eta, double tol, int n_max) {
    if (!(eta > 1.0)) throw InvalidInput("homogeneity limit needs eta > 1");
    const int guard = guard_for(x.max(), eta, n_max);
    std::vector<double> values;  // u(eta^j x)
    for (int j = 0; j <= guard; ++j) values.push_back(u(x.scaled(std::pow(eta, j))));
    HomogLimit out;
    for (int j = 0; j < guard; ++j)
        out.theta += std::abs(values[j + 1] - eta * values[j]) / std::pow(eta, j + 1);
    int stop = -1;
    for (int n = 0; n < guard; ++n) {
        const double a = values[n] / std::pow(eta, n);
        const double b = values[n + 1] / std::pow(eta, n + 1);
        if (std::abs(b - a) <= tol) {
            stop = n;
            break;
        }
    }
    if (stop < 0) throw NotConverged("eta-power sequence did not meet its Cauchy criterion", guard);
    out.n_used = stop;
    out.value = values[stop] / std::pow(eta, stop);
    return out;
}

NearRepresentation verify_homog_bound(const CEUtility& u, double eta, const std::vector<Act>& points,
                                      const std::vector<double>& scales, double tol) {
    NearRepresentation rep;
    rep.kind = RepresentationKind::Homogeneous;
    rep.parameters["eta"] = eta;
    rep.note = "sup |u - v| <= 2 theta and v positively homogeneous on the sample";
    double theta = 0.0;
    double homog_defect = 0.0;
    std::vector<std::pair<Act, double>> dists;
    for (const Act& x : points) {
        const HomogLimit hl = homog_limit(u, x, eta);
        theta = std::max(theta, hl.theta);
        const double dist = std::abs(u(x) - hl.value);
        if (dist > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, dist);
            rep.witness = x.payoffs();
        }
        for (double a : scales) {
            const HomogLimit ha = homog_limit(u, x.scaled(a), eta);
            homog_defect = std::max(homog_defect, std::abs(ha.value - a * hl.value));
        }
        ++rep.samples;
    }
    rep.parameters["theta_hat"] = theta;
    rep.parameters["homogeneity_defect"] = homog_defect;
    rep.bound = 2.0 * theta;
    if (rep.achieved_distance > rep.bound + tol || homog_defect > tol) {
        rep.passed = false;
        throw BoundViolated("homogeneous benchmark check failed", rep);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Uncertainty aversion
// ---------------------------------------------------------------------------

std::vector<ActTriple> make_ua_sampler(const std::vector<Act>& points, std::size_t lambda_count) {
    std::vector<ActTriple> out;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            for (std::size_t k = 1; k <= lambda_count; ++k)
                out.push_back({points[i], points[j], static_cast<double>(k) / static_cast<double>(lambda_count + 1)});
    return out;
}

ViolationReport measure_eps_ua(const CEUtility& u, const std::vector<ActTriple>& triples) {
    ViolationReport rep;
    rep.parameter = "eps_ua";
    rep.witness_layout = "x|y|lambda";
    CachedUtility cu(u);
    double worst = -1.0;
    for (const auto& t : triples) {
        const double d = std::max(0.0, std::min(cu(t.x), cu(t.y)) - cu(Act::mix(t.lambda, t.x, t.y)));
        if (d > worst) {
            worst = d;
            rep.witness.clear();
            append(rep.witness, t.x.payoffs());
            append(rep.witness, t.y.payoffs());
            rep.witness.push_back(t.lambda);
        }
        ++rep.samples_evaluated;
    }
    rep.value = std::max(worst, 0.0);
    return rep;
}

QuasiConcaveBenchmark quasiconcave_envelope(const std::vector<std::vector<double>>& points,
                                            const std::vector<double>& values,
                                            const std::vector<double>& levels) {
    if (points.size() != values.size()) throw InvalidInput("envelope: points and values differ in size");
    if (points.empty()) throw InvalidInput("envelope: no points");
    if (!std::is_sorted(levels.begin(), levels.end())) throw InvalidInput("envelope: levels must be ascending");
    QuasiConcaveBenchmark b;
    b.points = points;
    b.u = values;
    b.v = values;
    b.levels = levels;
    b.dim = points.front().size();
    for (std::size_t k = 1; k < levels.size(); ++k) b.spacing = std::max(b.spacing, levels[k] - levels[k - 1]);

    // Points sorted by value, descending: each upper contour set is a prefix.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto c) { return values[a] > values[c]; });
    std::vector<std::vector<double>> sorted;
    std::vector<double> sorted_values;
    for (auto i : order) {
        sorted.push_back(points[i]);
        sorted_values.push_back(values[i]);
    }
    auto contour_size = [&](double c) {
        return static_cast<std::size_t>(
            std::partition_point(sorted_values.begin(), sorted_values.end(), [c](double v) { return v >= c; }) -
            sorted_values.begin());
    };
    auto test = [&](std::size_t i, std::size_t k) {
        const std::size_t n = contour_size(levels[k]);
        ++b.lp_solves;
        if (n == 0) return hull::Certificate{};
        return hull::membership(std::span<const std::vector<double>>(sorted.data(), n), points[i]);
    };

    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t lo = static_cast<std::size_t>(
            std::upper_bound(levels.begin(), levels.end(), values[i]) - levels.begin());
        std::size_t hi = levels.size();
        // Highest k in [lo, hi) whose contour hull contains the point.
        std::optional<std::size_t> found;
        hull::Certificate cert;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            hull::Certificate c = test(i, mid);
            if (c.member) {
                found = mid;
                cert = std::move(c);
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if (!found) continue;
        b.v[i] = std::max(values[i], levels[*found]);
        if (cert.indices.size() < 2) continue;
        Act y(sorted[cert.indices[0]]);
        double mass = cert.weights[0];
        for (std::size_t k = 1; k < cert.indices.size(); ++k) {
            const Act z(sorted[cert.indices[k]]);
            const double lambda = cert.weights[k] / (mass + cert.weights[k]);
            b.chain_triples.push_back({z, y, lambda});
            y = Act::mix(lambda, z, y);
            mass += cert.weights[k];
        }
    }
    return b;
}

QuasiConcaveBenchmark quasiconcavify(const CEUtility& u, double bound, std::size_t resolution,
                                     std::size_t level_count) {
    const std::size_t d = u.states();
    if (d > 3) throw InvalidInput("quasi-concave envelope is limited to at most 3 states");
    if (!(bound > 0.0)) throw InvalidInput("box bound must be positive");
    if (resolution < 2 || level_count < 2) throw InvalidInput("need at least 2 grid points and 2 levels");
    GridSpec spec;
    spec.kind = SpaceKind::Box;
    spec.dim = d;
    spec.resolution = resolution;
    spec.bound = bound;
    const auto points = grid_sample(spec);
    std::vector<double> values;
    values.reserve(points.size());
    for (const auto& p : points) values.push_back(u(Act(p)));
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    std::vector<double> levels;
    if (*hi_it > *lo_it) {
        for (std::size_t k = 0; k < level_count; ++k)
            levels.push_back(*lo_it + (*hi_it - *lo_it) * static_cast<double>(k) / static_cast<double>(level_count - 1));
    } else {
        levels.push_back(*lo_it);
    }
    QuasiConcaveBenchmark b = quasiconcave_envelope(points, values, levels);
    b.resolution = resolution;
    b.bound = bound;
    return b;
}

NearRepresentation verify_quasiconcave_bound(const QuasiConcaveBenchmark& b, double eps_ua, double tol) {
    NearRepresentation rep;
    rep.kind = RepresentationKind::QuasiConcave;
    rep.bound = static_cast<double>(b.dim) * eps_ua + b.spacing;
    rep.parameters["eps_ua"] = eps_ua;
    rep.parameters["level_spacing"] = b.spacing;
    rep.note = "v >= u, sup |u - v| <= d * eps_ua + level spacing, midpoint quasi-concavity on the grid";
    std::size_t below = 0;
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        const double dist = std::abs(b.v[i] - b.u[i]);
        if (b.v[i] < b.u[i] - tol) ++below;
        if (dist > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, dist);
            rep.witness = b.points[i];
        }
        ++rep.samples;
    }

    // Midpoints of grid pairs with matching index parity land on the grid.
    std::size_t qc_pairs = 0;
    std::size_t qc_violations = 0;
    double qc_shortfall = 0.0;
    if (b.resolution >= 2 && b.points.size() == static_cast<std::size_t>(std::pow(b.resolution, b.dim))) {
        const std::size_t r = b.resolution;
        auto decode = [&](std::size_t idx) {
            std::vector<std::size_t> c(b.dim);
            for (std::size_t k = b.dim; k-- > 0;) {
                c[k] = idx % r;
                idx /= r;
            }
            return c;
        };
        for (std::size_t i = 0; i < b.points.size(); ++i) {
            const auto ci = decode(i);
            for (std::size_t j = i + 1; j < b.points.size(); ++j) {
                const auto cj = decode(j);
                std::size_t mid = 0;
                bool on_grid = true;
                for (std::size_t k = 0; k < b.dim && on_grid; ++k) {
                    if ((ci[k] + cj[k]) % 2 != 0) on_grid = false;
                    mid = mid * r + (ci[k] + cj[k]) / 2;
                }
                if (!on_grid) continue;
                ++qc_pairs;
                const double shortfall = std::min(b.v[i], b.v[j]) - b.v[mid];
                qc_shortfall = std::max(qc_shortfall, shortfall);
                if (shortfall > b.spacing + tol) ++qc_violations;
            }
        }
    }
    rep.parameters["below_u"] = static_cast<double>(below);
    rep.parameters["qc_pairs"] = static_cast<double>(qc_pairs);
    rep.parameters["qc_violations"] = static_cast<double>(qc_violations);
    rep.parameters["qc_max_shortfall"] = qc_shortfall;
    if (below > 0 || qc_violations > 0 || rep.achieved_distance > rep.bound + tol) {
        rep.passed = false;
        throw BoundViolated("quasi-concave benchmark check failed", rep);
    }
    return rep;
}

}  // namespace nearrep::uncertainty
