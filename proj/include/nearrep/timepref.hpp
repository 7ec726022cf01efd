#pragma once

// Dated rewards. Discrete discount curves are compared with the nearest
// exponential curve; continuous-time utilities are compared with the
// time-shift representation g(t + gamma(x)).

#include "nearrep/prefcore.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nearrep::timepref {

class DiscountCurve {
public:
    /// Closed-form models may be evaluated past the horizon; tabulated ones
    /// may not. The horizon of a tabulated curve is its last index.
    DiscountCurve(TimeModel model, std::size_t horizon);

    double d(double t) const;
    /// log d(t), in closed form where available.
    double log_d(double t) const;

    const TimeModel& model() const noexcept { return model_; }
    std::size_t horizon() const noexcept { return horizon_; }
    bool closed_form() const noexcept;
    /// d strictly decreasing on 0..horizon.
    bool strictly_decreasing() const;

private:
    TimeModel model_;
    std::size_t horizon_;
};

/// |g(s+t) - g(s) - g(t)| with g = log d. The anchor X cancels for any
/// discount-factor preference, so it is not a parameter.
double psi(const DiscountCurve& curve, double s, double t);

struct ThetaSeries {
    ViolationReport report;
    bool converged = true;
    std::vector<double> partial_sums;
    /// 2^-n psi(2^n t, 2^n t) at the last term; should vanish.
    double limit_diagnostic = 0.0;
};

/// Max over t of sum_i 2^-(i+1) psi(2^i t, 2^i t), i <= n_max. Tabulated
/// curves stop where 2^(i+1) t leaves the horizon.
ThetaSeries theta_series(const DiscountCurve& curve, const std::vector<double>& ts, int n_max = 40);

struct GammaFit {
    double gamma = 0.0;
    int n_used = 0;
    /// gamma numerically 1: the exponential benchmark is constant.
    bool degenerate = false;
    std::vector<double> iterates;
};

/// exp(lim 2^-n log d(2^n)). Throws NotConverged.
GammaFit fit_gamma(const DiscountCurve& curve, int n_max = 60, double tol = 1e-12);

/// max over ts of |log d(t) - t log gamma| <= theta + tol. Throws BoundViolated.
NearRepresentation verify_exp_bound(const DiscountCurve& curve, double gamma, double theta_hat,
                                    const std::vector<double>& ts, double tol = 1e-9);

struct DelayPair {
    double s;
    double t;
};

/// |W| from the axiom chain (X,t)~(Y,t+s), (X,0)~(Z,s), (Z/Y-1,0)~(W,s+t).
double w_value(const DiscountCurve& curve, double anchor, double s, double t);

/// max |W| over the pairs. Requires a strictly decreasing curve.
ViolationReport measure_W_axiom(const DiscountCurve& curve, double anchor, const std::vector<DelayPair>& pairs);

/// Minimal tau with d(tau) <= min(1/4, 1/(4 theta)); gamma = d(tau)^(1/tau);
/// reports sup_t |d(t) - gamma^t| on 0..horizon. Throws NoSuchTau.
NearRepresentation exact_recovery(const DiscountCurve& curve, double theta_w);

// ---------------------------------------------------------------------------
// Continuous time
// ---------------------------------------------------------------------------

/// u(x, t) on (-inf, x_bar] x [0, inf), with x the log of the reward.
struct ContinuousTimeModel {
    std::string name;
    double x_bar = 0.0;
    std::function<double(double, double)> u;
};

/// u = x - t / b
ContinuousTimeModel linear_delay(double x_bar, double b);
/// u = x - log(1 + k t)
ContinuousTimeModel log_hyperbolic(double x_bar, double k);

/// g(t) = u(x_bar, t) and its inverse gamma. Tabulated on a t-grid whose
/// end satisfies g(t_max) < x_min - 1.
class GammaCurve {
public:
    GammaCurve(ContinuousTimeModel model, double x_min, std::size_t grid_points = 201,
               double tol = kBisectionTol);

    double g(double t) const { return model_.u(model_.x_bar, t); }
    /// Delay t with g(t) = x. gamma(x_bar) = 0.
    double gamma(double x) const;

    const ContinuousTimeModel& model() const noexcept { return model_; }
    double t_max() const noexcept { return t_max_; }
    const std::vector<double>& t_grid() const noexcept { return t_grid_; }
    const std::vector<double>& g_grid() const noexcept { return g_grid_; }

private:
    ContinuousTimeModel model_;
    double tol_;
    double t_max_;
    std::vector<double> t_grid_;
    std::vector<double> g_grid_;
};

GammaCurve continuous_gamma_curve(const ContinuousTimeModel& model, double x_min,
                                  std::size_t grid_points = 201, double tol = kBisectionTol);

struct LevelDelay {
    double x;
    double delta;
};

/// Delta' with (x_bar, gamma(x) + Delta') ~ (x, Delta); eps = max |Delta - Delta'|.
ViolationReport measure_eps_stationarity(const GammaCurve& curve, const std::vector<LevelDelay>& samples);

struct LevelTimeDelay {
    double x;
    double t;
    double delta;
};

/// max |u(x, t + Delta) - u(x, t)| / Delta over samples with Delta > 0.
ViolationReport measure_lambda_lipschitz(const ContinuousTimeModel& model,
                                         const std::vector<LevelTimeDelay>& samples);

struct LevelTime {
    double x;
    double t;
};

/// sup |u(x,t) - g(t + gamma(x))| <= lambda * eps + tol, plus gamma(x_bar) = 0,
/// u(x_bar, 0) = x_bar and g falling below every sampled level on the
/// horizon. Throws BoundViolated.
NearRepresentation verify_exp3_bound(const GammaCurve& curve, double eps_hat, double lambda_hat,
                                     const std::vector<LevelTime>& samples, double tol = 1e-6);

/// Fraction of pairs (i, j) ordered the same way by a and b. Differences
/// within tie_tol count as ties; ties agree only with ties.
double rank_concordance(const std::vector<double>& a, const std::vector<double>& b, double tie_tol = 0.0);

}  // namespace nearrep::timepref
