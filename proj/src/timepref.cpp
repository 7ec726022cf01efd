#include "nearrep/timepref.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nearrep::timepref {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool in_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

DiscountCurve::DiscountCurve(TimeModel model, std::size_t horizon) : model_(std::move(model)), horizon_(horizon) {
    std::visit(Overloaded{
                   [](const Exponential& m) {
                       if (!in_unit(m.gamma)) throw InvalidInput("exponential: gamma must lie in (0,1)");
                   },
                   [](const QuasiHyperbolic& m) {
                       if (!(m.beta > 0.0 && m.beta <= 1.0) || !in_unit(m.delta))
                           throw InvalidInput("quasi-hyperbolic: need beta in (0,1] and delta in (0,1)");
                   },
                   [](const Hyperbolic& m) {
                       if (!(m.k > 0.0)) throw InvalidInput("hyperbolic: k must be positive");
                   },
                   [](const PerturbedExponential& m) {
                       if (!in_unit(m.gamma) || !(std::abs(m.amplitude) < 1.0) || !std::isfinite(m.frequency))
                           throw InvalidInput("perturbed exponential: need gamma in (0,1) and |amplitude| < 1");
                   },
                   [&](const TabulatedDiscount& m) {
                       if (m.values.size() < 2) throw InvalidInput("tabulated discount: need at least two values");
                       if (std::abs(m.values[0] - 1.0) > kSimplexSumTol)
                           throw InvalidInput("tabulated discount: d(0) must equal 1");
                       for (double v : m.values)
                           if (!(v > 0.0) || !std::isfinite(v))
                               throw InvalidInput("tabulated discount: values must be positive");
                       horizon_ = m.values.size() - 1;
                   },
               },
               model_);
    if (horizon_ < 1) throw InvalidInput("discount curve horizon must be at least 1");
}

bool DiscountCurve::closed_form() const noexcept { return !std::holds_alternative<TabulatedDiscount>(model_); }

double DiscountCurve::log_d(double t) const {
    if (!(t >= 0.0)) throw InvalidInput("discount curve: negative delay");
    return std::visit(Overloaded{
                          [&](const Exponential& m) { return t * std::log(m.gamma); },
                          [&](const QuasiHyperbolic& m) {
                              return t == 0.0 ? 0.0 : std::log(m.beta) + t * std::log(m.delta);
                          },
                          [&](const Hyperbolic& m) { return -std::log1p(m.k * t); },
                          [&](const PerturbedExponential& m) {
                              return t * std::log(m.gamma) + std::log1p(m.amplitude * std::sin(m.frequency * t));
                          },
                          [&](const TabulatedDiscount& m) {
                              if (t != std::floor(t) || t > static_cast<double>(horizon_))
                                  throw InvalidInput("tabulated discount: delay must be an integer within the horizon");
                              return std::log(m.values[static_cast<std::size_t>(t)]);
                          },
                      },
                      model_);
}

double DiscountCurve::d(double t) const {
    if (const auto* tab = std::get_if<TabulatedDiscount>(&model_)) {
        log_d(t);  // validates t
        return tab->values[static_cast<std::size_t>(t)];
    }
    return std::exp(log_d(t));
}

bool DiscountCurve::strictly_decreasing() const {
    for (std::size_t t = 1; t <= horizon_; ++t)
        if (!(d(static_cast<double>(t)) < d(static_cast<double>(t - 1)))) return false;
    return true;
}

double psi(const DiscountCurve& curve, double s, double t) {
    // Grouping g(s) + g(t) first keeps psi exactly symmetric.
    return std::abs(curve.log_d(s + t) - (curve.log_d(s) + curve.log_d(t)));
}

ThetaSeries theta_series(const DiscountCurve& curve, const std::vector<double>& ts, int n_max) {
    ThetaSeries out;
    out.report.parameter = "theta";
    out.report.witness_layout = "t";
    out.report.note = "diagonal dyadic series of psi; convergence flag is a ratio-test heuristic";
    double best = -1.0;
    std::size_t skipped = 0;
    for (double t : ts) {
        int n = n_max;
        if (!curve.closed_form()) {
            if (t <= 0.0) {
                n = 0;
            } else {
                n = -1;
                while (n + 1 <= n_max && std::ldexp(t, n + 2) <= static_cast<double>(curve.horizon())) ++n;
            }
            if (n < 0) {
                ++skipped;
                continue;
            }
        }
        auto term = [&](int i) {
            const double s = std::ldexp(t, i);
            return std::ldexp(psi(curve, s, s), -(i + 1));
        };
        TailSum sum = dyadic_tail_sum(term, n);
        if (!sum.converged) out.converged = false;
        if (sum.partial_sum > best) {
            best = sum.partial_sum;
            out.report.witness = {t};
            out.partial_sums = sum.partial_sums;
            out.limit_diagnostic = 2.0 * sum.terms.back();
        }
        ++out.report.samples_evaluated;
    }
    out.report.value = std::max(best, 0.0);
    out.report.diagnostics["n_max"] = n_max;
    out.report.diagnostics["skipped_t"] = static_cast<double>(skipped);
    out.report.diagnostics["converged"] = out.converged ? 1.0 : 0.0;
    out.report.diagnostics["limit_diagnostic"] = out.limit_diagnostic;
    return out;
}

GammaFit fit_gamma(const DiscountCurve& curve, int n_max, double tol) {
    int n_limit = n_max;
    if (!curve.closed_form()) {
        n_limit = 0;
        while (n_limit + 1 <= n_max && std::ldexp(1.0, n_limit + 1) <= static_cast<double>(curve.horizon())) ++n_limit;
    }
    GammaFit out;
    out.iterates.push_back(curve.log_d(1.0));
    for (int n = 0; n < n_limit; ++n) {
        out.iterates.push_back(std::ldexp(curve.log_d(std::ldexp(1.0, n + 1)), -(n + 1)));
        if (std::abs(out.iterates[n + 1] - out.iterates[n]) <= tol) {
            out.n_used = n + 1;
            out.gamma = std::exp(out.iterates[n + 1]);
            out.degenerate = std::abs(out.gamma - 1.0) <= 1e-9;
            return out;
        }
    }
    throw NotConverged("2^-n log d(2^n) did not meet its Cauchy criterion", n_limit);
}

NearRepresentation verify_exp_bound(const DiscountCurve& curve, double gamma, double theta_hat,
                                    const std::vector<double>& ts, double tol) {
    if (!(gamma > 0.0)) throw InvalidInput("exponential bound: gamma must be positive");
    NearRepresentation rep;
    rep.kind = RepresentationKind::ExponentialDiscount;
    rep.coefficients = {gamma};
    rep.parameters["gamma"] = gamma;
    rep.parameters["theta_hat"] = theta_hat;
    rep.bound = theta_hat;
    rep.note = "sup |log d(t) - t log gamma| <= theta";
    const double lg = std::log(gamma);
    for (double t : ts) {
        const double dist = std::abs(curve.log_d(t) - t * lg);
        if (dist > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, dist);
            rep.witness = {t};
        }
        ++rep.samples;
    }
    if (rep.achieved_distance > rep.bound + tol) {
        rep.passed = false;
        throw BoundViolated("exponential discount bound violated", rep);
    }
    return rep;
}

double w_value(const DiscountCurve& curve, double anchor, double s, double t) {
    if (!(anchor > 0.0)) throw InvalidInput("W axiom: anchor reward must be positive");
    const double y = anchor * curve.d(t) / curve.d(t + s);
    const double z = anchor / curve.d(s);
    return std::abs((z / y - 1.0) / curve.d(s + t));
}

ViolationReport measure_W_axiom(const DiscountCurve& curve, double anchor, const std::vector<DelayPair>& pairs) {
    if (!curve.strictly_decreasing()) throw HypothesisFailed("W axiom: discount curve is not strictly decreasing");
    ViolationReport rep;
    rep.parameter = "theta_w";
    rep.witness_layout = "s|t";
    rep.note = "|W| equals |f(s)f(t) - f(s+t)| with f = 1/d; anchor-independent";
    double best = -1.0;
    for (const auto& p : pairs) {
        const double w = w_value(curve, anchor, p.s, p.t);
        if (w > best) {
            best = w;
            rep.witness = {p.s, p.t};
        }
        ++rep.samples_evaluated;
    }
    rep.value = std::max(best, 0.0);
    rep.diagnostics["anchor"] = anchor;
    return rep;
}

NearRepresentation exact_recovery(const DiscountCurve& curve, double theta_w) {
    if (!curve.strictly_decreasing()) throw HypothesisFailed("exact recovery: discount curve is not strictly decreasing");
    const double threshold = theta_w > 0.0 ? std::min(0.25, 1.0 / (4.0 * theta_w)) : 0.25;
    std::size_t tau = 0;
    for (std::size_t t = 1; t <= curve.horizon(); ++t)
        if (curve.d(static_cast<double>(t)) <= threshold) {
            tau = t;
            break;
        }
    if (tau == 0) {
        std::ostringstream msg;
        msg << "no delay up to " << curve.horizon() << " has d <= " << threshold;
        throw NoSuchTau(msg.str());
    }
    const double gamma = std::pow(curve.d(static_cast<double>(tau)), 1.0 / static_cast<double>(tau));
    NearRepresentation rep;
    rep.kind = RepresentationKind::ExponentialDiscount;
    rep.coefficients = {gamma};
    rep.parameters["tau"] = static_cast<double>(tau);
    rep.parameters["gamma"] = gamma;
    rep.parameters["threshold"] = threshold;
    rep.parameters["theta_w"] = theta_w;
    for (std::size_t t = 0; t <= curve.horizon(); ++t) {
        const double td = static_cast<double>(t);
        const double dist = std::abs(curve.d(td) - std::pow(gamma, td));
        if (dist > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, dist);
            rep.witness = {td};
        }
        ++rep.samples;
    }
    rep.bound = 0.0;
    rep.passed = rep.achieved_distance <= 1e-9;
    rep.note = rep.passed ? "curve is exponential on the horizon"
                          : "curve departs from the recovered exponential; the axiom fails on this horizon";
    return rep;
}

// ---------------------------------------------------------------------------
// Continuous time
// ---------------------------------------------------------------------------

ContinuousTimeModel linear_delay(double x_bar, double b) {
    if (!(b > 0.0)) throw InvalidInput("linear delay: b must be positive");
    std::ostringstream name;
    name << "x - t/" << b;
    return {name.str(), x_bar, [b](double x, double t) { return x - t / b; }};
}

ContinuousTimeModel log_hyperbolic(double x_bar, double k) {
    if (!(k > 0.0)) throw InvalidInput("log hyperbolic: k must be positive");
    std::ostringstream name;
    name << "x - log(1 + " << k << " t)";
    return {name.str(), x_bar, [k](double x, double t) { return x - std::log1p(k * t); }};
}

GammaCurve::GammaCurve(ContinuousTimeModel model, double x_min, std::size_t grid_points, double tol)
    : model_(std::move(model)), tol_(tol), t_max_(1.0) {
    if (!model_.u) throw InvalidInput("continuous model has no evaluator");
    if (!(x_min < model_.x_bar)) throw InvalidInput("continuous model: x_min must lie below x_bar");
    if (grid_points < 2) throw InvalidInput("continuous model: need at least two grid points");
    int doublings = 0;
    while (!(g(t_max_) < x_min - 1.0)) {
        if (++doublings > 200) throw NoBracket("u(x_bar, t) stays above the sampled levels: depreciation fails");
        t_max_ *= 2.0;
    }
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double t = t_max_ * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        t_grid_.push_back(t);
        g_grid_.push_back(g(t));
        if (i > 0 && !(g_grid_[i] < g_grid_[i - 1]))
            throw HypothesisFailed("continuous model: u(x_bar, t) is not strictly decreasing in t");
    }
    if (g_grid_.front() != model_.x_bar)
        throw HypothesisFailed("continuous model: u(x_bar, 0) differs from x_bar");
}

double GammaCurve::gamma(double x) const {
    if (x > model_.x_bar) throw InvalidInput("gamma: level above x_bar");
    if (x == model_.x_bar) return 0.0;
    double hi = t_max_;
    for (int k = 0; g(hi) > x; ++k) {
        if (k > 200) throw NoBracket("gamma: horizon too short for the requested level");
        hi *= 2.0;
    }
    return bisect_monotone([&](double t) { return g(t) - x; }, 0.0, hi, tol_);
}

GammaCurve continuous_gamma_curve(const ContinuousTimeModel& model, double x_min, std::size_t grid_points,
                                  double tol) {
    return GammaCurve(model, x_min, grid_points, tol);
}

ViolationReport measure_eps_stationarity(const GammaCurve& curve, const std::vector<LevelDelay>& samples) {
    const auto& m = curve.model();
    ViolationReport rep;
    rep.parameter = "eps_stationarity";
    rep.witness_layout = "x|delta|delta_prime";
    double best = -1.0;
    for (const auto& s : samples) {
        if (s.delta < 0.0) throw InvalidInput("stationarity: negative delay");
        const double t = curve.gamma(s.x);
        const double delta_prime = s.delta == 0.0 ? 0.0 : curve.gamma(m.u(s.x, s.delta)) - t;
        const double dev = std::abs(delta_prime - s.delta);
        if (dev > best) {
            best = dev;
            rep.witness = {s.x, s.delta, delta_prime};
        }
        ++rep.samples_evaluated;
    }
    rep.value = std::max(best, 0.0);
    return rep;
}

ViolationReport measure_lambda_lipschitz(const ContinuousTimeModel& model,
                                         const std::vector<LevelTimeDelay>& samples) {
    ViolationReport rep;
    rep.parameter = "lambda";
    rep.witness_layout = "x|t|delta";
    double best = -1.0;
    for (const auto& s : samples) {
        if (!(s.delta > 0.0)) continue;
        const double ratio = std::abs(model.u(s.x, s.t + s.delta) - model.u(s.x, s.t)) / s.delta;
        if (ratio > best) {
            best = ratio;
            rep.witness = {s.x, s.t, s.delta};
        }
        ++rep.samples_evaluated;
    }
    rep.value = std::max(best, 0.0);
    return rep;
}

NearRepresentation verify_exp3_bound(const GammaCurve& curve, double eps_hat, double lambda_hat,
                                     const std::vector<LevelTime>& samples, double tol) {
    const auto& m = curve.model();
    NearRepresentation rep;
    rep.kind = RepresentationKind::TimeShift;
    rep.parameters["eps_hat"] = eps_hat;
    rep.parameters["lambda_hat"] = lambda_hat;
    rep.parameters["t_max"] = curve.t_max();
    rep.bound = lambda_hat * eps_hat;
    rep.note = "sup |u(x,t) - g(t + gamma(x))| <= lambda * eps";
    double x_min = m.x_bar;
    for (const auto& s : samples) {
        const double dist = std::abs(m.u(s.x, s.t) - curve.g(s.t + curve.gamma(s.x)));
        x_min = std::min(x_min, s.x);
        if (dist > rep.achieved_distance || rep.samples == 0) {
            rep.achieved_distance = std::max(rep.achieved_distance, dist);
            rep.witness = {s.x, s.t};
        }
        ++rep.samples;
    }
    const double gamma_top = curve.gamma(m.x_bar);
    const double norm_gap = std::abs(m.u(m.x_bar, 0.0) - m.x_bar);
    const bool depreciates = curve.g(curve.t_max()) < x_min;
    rep.parameters["gamma_at_x_bar"] = gamma_top;
    rep.parameters["normalization_gap"] = norm_gap;
    rep.parameters["depreciates"] = depreciates ? 1.0 : 0.0;
    if (rep.achieved_distance > rep.bound + tol || gamma_top != 0.0 || norm_gap > tol || !depreciates) {
        rep.passed = false;
        throw BoundViolated("time-shift representation check failed", rep);
    }
    return rep;
}

double rank_concordance(const std::vector<double>& a, const std::vector<double>& b, double tie_tol) {
    if (a.size() != b.size()) throw InvalidInput("rank concordance: size mismatch");
    std::size_t pairs = 0, agree = 0;
    auto sign = [tie_tol](double v) { return (v > tie_tol) - (v < -tie_tol); };
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            ++pairs;
            if (sign(a[i] - a[j]) == sign(b[i] - b[j])) ++agree;
        }
    return pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);
}

}  // namespace nearrep::timepref
