#include "nearrep/prefcore.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace nearrep {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_prior(const std::vector<double>& prior, const char* what) {
    if (prior.empty()) throw InvalidInput(std::string(what) + ": empty prior");
    double sum = 0.0;
    for (double p : prior) {
        if (!(p >= 0.0)) throw InvalidInput(std::string(what) + ": negative prior entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput(std::string(what) + ": prior must sum to 1");
}

std::string join(const std::vector<double>& v) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << ')';
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Lottery / Act
// ---------------------------------------------------------------------------

Lottery::Lottery(std::vector<double> probs) {
    if (probs.size() < 2) throw InvalidInput("lottery needs at least two prizes");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("lottery entries must be finite and >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexSumTol) {
        std::ostringstream msg;
        msg << "lottery probabilities sum to " << sum << ", not 1";
        throw InvalidInput(msg.str());
    }
    if (sum != 1.0)
        for (double& p : probs) p /= sum;
    probs_ = std::move(probs);
}

Lottery Lottery::degenerate(std::size_t prize_count, std::size_t prize) {
    if (prize >= prize_count) throw InvalidInput("degenerate lottery: prize index out of range");
    std::vector<double> probs(prize_count, 0.0);
    probs[prize] = 1.0;
    return Lottery(std::move(probs), Trusted{});
}

Lottery Lottery::mix(double lambda, const Lottery& p, const Lottery& q) {
    if (p.size() != q.size()) throw InvalidInput("mixing lotteries of different sizes");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("mixture weight outside [0,1]");
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda * p[i] + (1.0 - lambda) * q[i];
    return Lottery(std::move(out));
}

std::size_t Lottery::support() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
}

Act::Act(std::vector<double> payoffs) : payoffs_(std::move(payoffs)) {
    if (payoffs_.empty()) throw InvalidInput("act needs at least one state");
    for (double x : payoffs_)
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("act payoffs must be finite and >= 0");
}

Act Act::constant(double c, std::size_t states) { return Act(std::vector<double>(states, c)); }

Act Act::unit(std::size_t states, std::size_t state) {
    std::vector<double> v(states, 0.0);
    v.at(state) = 1.0;
    return Act(std::move(v));
}

double Act::min() const { return *std::min_element(payoffs_.begin(), payoffs_.end()); }
double Act::max() const { return *std::max_element(payoffs_.begin(), payoffs_.end()); }

bool Act::is_constant() const {
    return std::all_of(payoffs_.begin(), payoffs_.end(),
                       [&](double x) { return x == payoffs_.front(); });
}

Act Act::scaled(double factor) const {
    std::vector<double> v(payoffs_);
    for (double& x : v) x *= factor;
    return Act(std::move(v));
}

Act Act::mix(double lambda, const Act& x, const Act& y) {
    if (x.size() != y.size()) throw InvalidInput("mixing acts of different sizes");
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = lambda * x[i] + (1.0 - lambda) * y[i];
    return Act(std::move(v));
}

Act Act::sum(const Act& x, const Act& y) {
    if (x.size() != y.size()) throw InvalidInput("adding acts of different sizes");
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] + y[i];
    return Act(std::move(v));
}

// ---------------------------------------------------------------------------
// TabulatedUtility
// ---------------------------------------------------------------------------

TabulatedUtility::TabulatedUtility(std::size_t prize_count, std::size_t resolution,
                                   std::vector<double> values)
    : prize_count_(prize_count), resolution_(resolution), values_(std::move(values)) {
    if (prize_count_ < 2) throw InvalidInput("tabulated utility needs at least two prizes");
    if (resolution_ < 1) throw InvalidInput("tabulated utility needs resolution >= 1");
    if (std::pow(static_cast<double>(resolution_ + 1), static_cast<double>(prize_count_)) > 9e18)
        throw InvalidInput("tabulated utility lattice too large");
    auto lattice = simplex_lattice(prize_count_, resolution_);
    if (lattice.size() != values_.size())
        throw InvalidInput("tabulated utility: expected " + std::to_string(lattice.size()) +
                           " values, got " + std::to_string(values_.size()));
    std::vector<long> comp(prize_count_);
    for (std::size_t idx = 0; idx < lattice.size(); ++idx) {
        for (std::size_t i = 0; i < prize_count_; ++i)
            comp[i] = std::lround(lattice[idx][i] * static_cast<double>(resolution_));
        index_.emplace(key(comp), idx);
    }
}

TabulatedUtility TabulatedUtility::tabulate(std::size_t prize_count, std::size_t resolution,
                                            const std::function<double(const Lottery&)>& fn) {
    std::vector<double> values;
    for (const Lottery& p : simplex_lattice(prize_count, resolution)) values.push_back(fn(p));
    return TabulatedUtility(prize_count, resolution, std::move(values));
}

std::uint64_t TabulatedUtility::key(std::span<const long> composition) const {
    std::uint64_t k = 0;
    for (auto it = composition.rbegin(); it != composition.rend(); ++it)
        k = k * (resolution_ + 1) + static_cast<std::uint64_t>(*it);
    return k;
}

double TabulatedUtility::at(std::span<const long> composition) const {
    auto it = index_.find(key(composition));
    if (it == index_.end()) throw InvalidInput("tabulated utility: point outside lattice");
    return values_[it->second];
}

double TabulatedUtility::operator()(const Lottery& p) const {
    if (p.size() != prize_count_) throw InvalidInput("tabulated utility: lottery size mismatch");
    const std::size_t d = prize_count_ - 1;
    const double n = static_cast<double>(resolution_);
    const long top = static_cast<long>(resolution_);

    // Cumulative coordinates 0 <= s_0 <= ... <= s_{d-1} <= N.
    std::vector<double> s(d);
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        acc += p[j] * n;
        double v = std::clamp(acc, j ? s[j - 1] : 0.0, n);
        if (std::abs(v - std::round(v)) < 1e-9) v = std::round(v);
        s[j] = v;
    }

    std::vector<long> vertex(d);
    std::vector<double> frac(d);
    for (std::size_t j = 0; j < d; ++j) {
        long b = std::min(static_cast<long>(std::floor(s[j])), top);
        vertex[j] = b;
        frac[j] = s[j] - static_cast<double>(b);
    }
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return a > b;
    });

    std::vector<long> comp(prize_count_);
    auto value_at = [&](const std::vector<long>& cum) {
        comp[0] = cum[0];
        for (std::size_t j = 1; j < d; ++j) comp[j] = cum[j] - cum[j - 1];
        comp[d] = top - cum[d - 1];
        return at(comp);
    };

    double result = 0.0;
    double w0 = 1.0 - (d ? frac[order[0]] : 0.0);
    if (w0 > 0.0) result += w0 * value_at(vertex);
    for (std::size_t m = 0; m < d; ++m) {
        vertex[order[m]] += 1;
        double w = frac[order[m]] - (m + 1 < d ? frac[order[m + 1]] : 0.0);
        if (w > 0.0) result += w * value_at(vertex);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Risk models
// ---------------------------------------------------------------------------

double cpt_weight(double p, double exponent) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const double a = std::pow(p, exponent);
    const double b = std::pow(1.0 - p, exponent);
    return a * std::pow(a + b, -1.0 / exponent);
}

double cpt_value(double x, double exponent) { return std::pow(x, exponent); }

std::size_t prize_count(const RiskModel& model) {
    return std::visit(Overloaded{
                          [](const ExpectedUtility& m) { return m.utilities.size(); },
                          [](const Cpt& m) { return m.prizes.size(); },
                          [](const TabulatedUtility& m) { return m.prize_count(); },
                      },
                      model);
}

double evaluate(const RiskModel& model, const Lottery& p) {
    if (p.size() != prize_count(model)) throw InvalidInput("lottery size does not match model");
    return std::visit(
        Overloaded{
            [&](const ExpectedUtility& m) { return dot(p.probs(), m.utilities); },
            [&](const Cpt& m) {
                const std::size_t n = m.prizes.size();
                std::vector<std::size_t> rank(n);
                std::iota(rank.begin(), rank.end(), std::size_t{0});
                std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
                    return m.prizes[a] > m.prizes[b];
                });
                std::vector<std::size_t> positive;
                for (std::size_t i : rank)
                    if (p[i] > 0.0) positive.push_back(i);
                double total = 0.0;
                double cum = 0.0;
                double prev_weight = 0.0;
                for (std::size_t r = 0; r < positive.size(); ++r) {
                    const std::size_t i = positive[r];
                    cum += p[i];
                    const double weight =
                        r + 1 == positive.size() ? 1.0 : cpt_weight(cum, m.weighting_exponent);
                    total += (weight - prev_weight) * cpt_value(m.prizes[i], m.value_exponent);
                    prev_weight = weight;
                }
                return total;
            },
            [&](const TabulatedUtility& m) { return m(p); },
        },
        model);
}

std::string describe(const RiskModel& model) {
    return std::visit(Overloaded{
                          [](const ExpectedUtility& m) { return "expected-utility" + join(m.utilities); },
                          [](const Cpt& m) {
                              std::ostringstream out;
                              out << "cpt(a=" << m.value_exponent << ",b=" << m.weighting_exponent
                                  << ")" << join(m.prizes);
                              return out.str();
                          },
                          [](const TabulatedUtility& m) {
                              return "tabulated(n=" + std::to_string(m.prize_count()) +
                                     ",N=" + std::to_string(m.resolution()) + ")";
                          },
                      },
                      model);
}

// ---------------------------------------------------------------------------
// Act models
// ---------------------------------------------------------------------------

double ambiguity_kernel(AmbiguityKernel kernel, double z) {
    switch (kernel) {
        case AmbiguityKernel::Sqrt1pz2: return std::hypot(1.0, z);
        case AmbiguityKernel::ZMinusExp: return z - std::exp(-z);
    }
    return 0.0;
}

std::string to_string(AmbiguityKernel kernel) {
    return kernel == AmbiguityKernel::Sqrt1pz2 ? "sqrt1pz2" : "z_minus_exp";
}

std::size_t state_count(const ActModel& model) {
    return std::visit(Overloaded{
                          [](const Seu& m) { return m.prior.size(); },
                          [](const Meu& m) { return m.priors.empty() ? 0 : m.priors.front().size(); },
                          [](const SmoothAmbiguity& m) { return m.priors.empty() ? 0 : m.priors.front().size(); },
                          [](const Ces& m) { return m.weights.size(); },
                          [](const TiltedSeu& m) { return m.prior.size(); },
                      },
                      model);
}

double evaluate(const ActModel& model, const Act& x) {
    if (x.size() != state_count(model)) throw InvalidInput("act size does not match model");
    return std::visit(
        Overloaded{
            [&](const Seu& m) {
                check_prior(m.prior, "seu");
                return dot(m.prior, x.payoffs());
            },
            [&](const Meu& m) {
                if (m.priors.empty()) throw InvalidInput("meu: empty prior set");
                double best = std::numeric_limits<double>::infinity();
                for (const auto& prior : m.priors) {
                    check_prior(prior, "meu");
                    best = std::min(best, dot(prior, x.payoffs()));
                }
                return best;
            },
            [&](const SmoothAmbiguity& m) {
                if (m.priors.empty() || m.priors.size() != m.weights.size())
                    throw InvalidInput("smooth ambiguity: priors and weights must match");
                check_prior(m.weights, "smooth ambiguity weights");
                double total = 0.0;
                for (std::size_t k = 0; k < m.priors.size(); ++k) {
                    check_prior(m.priors[k], "smooth ambiguity");
                    total += m.weights[k] * ambiguity_kernel(m.kernel, dot(m.priors[k], x.payoffs()));
                }
                return total;
            },
            [&](const Ces& m) {
                check_prior(m.weights, "ces");
                if (m.rho == 0.0 || m.rho > 1.0) throw InvalidInput("ces: rho must be nonzero and <= 1");
                if (m.rho < 0.0 && x.min() == 0.0) return 0.0;
                double total = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) total += m.weights[i] * std::pow(x[i], m.rho);
                return std::pow(total, 1.0 / m.rho);
            },
            [&](const TiltedSeu& m) {
                check_prior(m.prior, "tilted seu");
                return dot(m.prior, x.payoffs()) + m.amplitude * std::tanh(x[0] - x[x.size() - 1]);
            },
        },
        model);
}

std::string describe(const ActModel& model) {
    return std::visit(Overloaded{
                          [](const Seu& m) { return "seu" + join(m.prior); },
                          [](const Meu& m) {
                              std::string out = "meu{";
                              for (const auto& p : m.priors) out += join(p);
                              return out + "}";
                          },
                          [](const SmoothAmbiguity& m) {
                              std::string out = "smooth-" + to_string(m.kernel) + "{";
                              for (std::size_t k = 0; k < m.priors.size(); ++k)
                                  out += std::to_string(m.weights[k]) + "*" + join(m.priors[k]);
                              return out + "}";
                          },
                          [](const Ces& m) { return "ces(rho=" + std::to_string(m.rho) + ")" + join(m.weights); },
                          [](const TiltedSeu& m) {
                              return "tilted-seu(amp=" + std::to_string(m.amplitude) + ")" + join(m.prior);
                          },
                      },
                      model);
}

std::string describe(const TimeModel& model) {
    std::ostringstream out;
    std::visit(Overloaded{
                   [&](const Exponential& m) { out << "exponential(gamma=" << m.gamma << ")"; },
                   [&](const QuasiHyperbolic& m) {
                       out << "quasi-hyperbolic(beta=" << m.beta << ",delta=" << m.delta << ")";
                   },
                   [&](const Hyperbolic& m) { out << "hyperbolic(k=" << m.k << ")"; },
                   [&](const PerturbedExponential& m) {
                       out << "perturbed-exponential(gamma=" << m.gamma << ",amp=" << m.amplitude
                           << ",freq=" << m.frequency << ")";
                   },
                   [&](const TabulatedDiscount& m) { out << "tabulated(T=" << m.values.size() - 1 << ")"; },
               },
               model);
    return out.str();
}

std::string to_string(RepresentationKind kind) {
    switch (kind) {
        case RepresentationKind::Affine: return "affine";
        case RepresentationKind::Linear: return "linear";
        case RepresentationKind::Homogeneous: return "homogeneous";
        case RepresentationKind::QuasiConcave: return "quasiconcave";
        case RepresentationKind::ExponentialDiscount: return "exponential-discount";
        case RepresentationKind::TimeShift: return "time-shift";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Numerics
// ---------------------------------------------------------------------------

double bisect_monotone(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw InvalidInput("bisection tolerance must be positive");
    if (!(lo <= hi)) throw InvalidInput("bisection bracket is reversed");
    const double flo = f(lo);
    if (flo == 0.0) return lo;
    const double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream msg;
        msg << "no sign change on [" << lo << ", " << hi << "]: f(lo)=" << flo << ", f(hi)=" << fhi;
        throw NoBracket(msg.str());
    }
    std::uintmax_t max_iter = 200;
    auto done = [tol](double a, double b) {
        // Stop at the requested width or once the bracket cannot shrink.
        const double mid = a + (b - a) / 2;
        return std::abs(b - a) <= tol || mid <= a || mid >= b;
    };
    auto bracket = boost::math::tools::bisect(f, lo, hi, done, max_iter);
    return bracket.first + (bracket.second - bracket.first) / 2;
}

std::vector<Lottery> simplex_lattice(std::size_t prize_count, std::size_t resolution) {
    if (prize_count < 2) throw InvalidInput("simplex needs at least two coordinates");
    if (resolution < 1) throw InvalidInput("simplex lattice needs resolution >= 1");
    std::vector<Lottery> out;
    std::vector<long> comp(prize_count, 0);
    const long n = static_cast<long>(resolution);
    const double denom = static_cast<double>(resolution);
    // Lexicographic over compositions of N into prize_count parts.
    std::function<void(std::size_t, long)> rec = [&](std::size_t i, long remaining) {
        if (i + 1 == prize_count) {
            comp[i] = remaining;
            std::vector<double> probs(prize_count);
            for (std::size_t j = 0; j < prize_count; ++j) probs[j] = static_cast<double>(comp[j]) / denom;
            out.emplace_back(std::move(probs));
            return;
        }
        for (long k = 0; k <= remaining; ++k) {
            comp[i] = k;
            rec(i + 1, remaining - k);
        }
    };
    rec(0, n);
    return out;
}

std::vector<std::vector<double>> grid_sample(const GridSpec& spec) {
    if (spec.resolution < 2) throw InvalidInput("grid resolution must be >= 2");
    if (spec.dim < 1) throw InvalidInput("grid dimension must be >= 1");
    std::vector<std::vector<double>> out;
    std::mt19937_64 rng(spec.seed);
    switch (spec.kind) {
        case SpaceKind::Simplex: {
            for (const Lottery& p : simplex_lattice(spec.dim, spec.resolution)) out.push_back(p.probs());
            std::exponential_distribution<double> expo(1.0);
            for (std::size_t r = 0; r < spec.random_extra; ++r) {
                std::vector<double> v(spec.dim);
                double sum = 0.0;
                for (double& x : v) sum += (x = expo(rng));
                for (double& x : v) x /= sum;
                out.push_back(Lottery(std::move(v)).probs());
            }
            break;
        }
        case SpaceKind::Box:
        case SpaceKind::Interval: {
            const std::size_t dim = spec.kind == SpaceKind::Interval ? 1 : spec.dim;
            if (!(spec.bound > spec.lower)) throw InvalidInput("grid bound must exceed lower");
            const double step = (spec.bound - spec.lower) / static_cast<double>(spec.resolution - 1);
            std::size_t total = 1;
            for (std::size_t j = 0; j < dim; ++j) total *= spec.resolution;
            for (std::size_t flat = 0; flat < total; ++flat) {
                std::vector<double> v(dim);
                std::size_t rest = flat;
                for (std::size_t j = dim; j-- > 0;) {
                    const std::size_t k = rest % spec.resolution;
                    rest /= spec.resolution;
                    v[j] = k + 1 == spec.resolution ? spec.bound
                                                    : spec.lower + step * static_cast<double>(k);
                }
                out.push_back(std::move(v));
            }
            std::uniform_real_distribution<double> unif(spec.lower, spec.bound);
            for (std::size_t r = 0; r < spec.random_extra; ++r) {
                std::vector<double> v(dim);
                for (double& x : v) x = unif(rng);
                out.push_back(std::move(v));
            }
            break;
        }
    }
    return out;
}

TailSum dyadic_tail_sum(const std::function<double(int)>& term, int n_max, double ratio_tol,
                        double noise_floor) {
    if (n_max < 0) throw InvalidInput("dyadic_tail_sum: n_max must be >= 0");
    TailSum out;
    for (int i = 0; i <= n_max; ++i) {
        const double t = term(i);
        if (t < 0.0) throw InvalidInput("dyadic_tail_sum: negative term");
        out.terms.push_back(t);
        out.partial_sum += t;
        out.partial_sums.push_back(out.partial_sum);
    }
    const std::size_t n = out.terms.size();
    const std::size_t window = std::min<std::size_t>(4, n > 1 ? n - 1 : 0);
    out.converged = true;
    if (window == 0) {
        out.converged = out.terms.back() <= noise_floor;
        return out;
    }
    for (std::size_t i = n - window; i < n; ++i) {
        const double cur = out.terms[i];
        const double prev = out.terms[i - 1];
        if (cur <= noise_floor) continue;
        if (cur > ratio_tol * prev) {
            out.converged = false;
            break;
        }
    }
    return out;
}

}  // namespace nearrep
