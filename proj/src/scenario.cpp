#include "nearrep/scenario.hpp"

#include "nearrep/risk.hpp"
#include "nearrep/timepref.hpp"
#include "nearrep/uncertainty.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace nearrep::scenario {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------------------
// JSON output with 17-significant-digit floats
// ---------------------------------------------------------------------------

void emit(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += inner + json(it.key()).dump() + ": ";
                emit(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            if (flat) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    emit(j[i], out, indent + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                emit(j[i], out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            std::string s = csv::format_double(v);
            // Keep floats recognizable as floats when read back.
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
            out += s;
            return;
        }
        default:
            out += j.dump();
    }
}

std::string to_text(const json& j) {
    std::string out;
    emit(j, out, 0);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Strict schema reader
// ---------------------------------------------------------------------------

class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& field, const std::string& what) {
        throw ScenarioError("field '" + field + "': " + what);
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) fail(at(key), "required field is missing");
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(at(key), "expected a finite number");
        return d;
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::uint64_t count(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
            fail(at(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }
    std::size_t count(const std::string& key, std::size_t fallback) {
        return has(key) ? static_cast<std::size_t>(count(key)) : fallback;
    }
    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        return v.get<int>();
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

    std::vector<double> vec(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail(at(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<std::vector<double>> matrix(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail(at(key), "expected a nonempty array of arrays");
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string f = at(key) + "[" + std::to_string(i) + "]";
            if (!v[i].is_array()) fail(f, "expected an array of numbers");
            std::vector<double> row;
            for (std::size_t k = 0; k < v[i].size(); ++k) {
                if (!v[i][k].is_number()) fail(f + "[" + std::to_string(k) + "]", "expected a number");
                row.push_back(v[i][k].get<double>());
            }
            out.push_back(std::move(row));
        }
        return out;
    }

    /// Rejects keys that no accessor consumed.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(at(it.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Domain parse_domain(const std::string& s) {
    if (s == "risk") return Domain::Risk;
    if (s == "uncertainty") return Domain::Uncertainty;
    if (s == "time-discrete") return Domain::TimeDiscrete;
    if (s == "time-continuous") return Domain::TimeContinuous;
    Fields::fail("domain", "expected one of risk, uncertainty, time-discrete, time-continuous; got '" + s + "'");
}

AmbiguityKernel parse_kernel(const std::string& s, const std::string& field) {
    if (s == "sqrt1pz2") return AmbiguityKernel::Sqrt1pz2;
    if (s == "z_minus_exp") return AmbiguityKernel::ZMinusExp;
    Fields::fail(field, "expected sqrt1pz2 or z_minus_exp; got '" + s + "'");
}

ModelSpec parse_model(Domain domain, Fields& f) {
    const std::string type = f.text("type");
    auto unknown = [&](const char* allowed) -> ModelSpec {
        Fields::fail(f.at("type"), std::string("expected one of ") + allowed + "; got '" + type + "'");
    };
    switch (domain) {
        case Domain::Risk:
            if (type == "cpt") {
                Cpt m;
                m.prizes = f.vec("prizes");
                m.value_exponent = f.number("value_exponent", m.value_exponent);
                m.weighting_exponent = f.number("weighting_exponent", m.weighting_exponent);
                return RiskModel{m};
            }
            if (type == "expected_utility") return RiskModel{ExpectedUtility{f.vec("utilities")}};
            return unknown("cpt, expected_utility");
        case Domain::Uncertainty:
            if (type == "seu") return ActModel{Seu{f.vec("prior")}};
            if (type == "meu") return ActModel{Meu{f.matrix("priors")}};
            if (type == "smooth_ambiguity") {
                SmoothAmbiguity m;
                m.kernel = parse_kernel(f.text("kernel"), f.at("kernel"));
                m.priors = f.matrix("priors");
                m.weights = f.vec("weights");
                return ActModel{m};
            }
            if (type == "ces") {
                Ces m;
                m.weights = f.vec("weights");
                m.rho = f.number("rho");
                return ActModel{m};
            }
            if (type == "tilted_seu") {
                TiltedSeu m;
                m.prior = f.vec("prior");
                m.amplitude = f.number("amplitude");
                return ActModel{m};
            }
            return unknown("seu, meu, smooth_ambiguity, ces, tilted_seu");
        case Domain::TimeDiscrete:
            if (type == "exponential") return TimeModel{Exponential{f.number("gamma")}};
            if (type == "quasi_hyperbolic") {
                QuasiHyperbolic m;
                m.beta = f.number("beta");
                m.delta = f.number("delta");
                return TimeModel{m};
            }
            if (type == "hyperbolic") return TimeModel{Hyperbolic{f.number("k")}};
            if (type == "perturbed_exponential") {
                PerturbedExponential m;
                m.gamma = f.number("gamma");
                m.amplitude = f.number("amplitude");
                m.frequency = f.number("frequency");
                return TimeModel{m};
            }
            if (type == "tabulated") return TimeModel{TabulatedDiscount{f.vec("values")}};
            return unknown("exponential, quasi_hyperbolic, hyperbolic, perturbed_exponential, tabulated");
        case Domain::TimeContinuous:
            if (type == "linear" || type == "log_hyperbolic") {
                ContinuousSpec c;
                c.type = type;
                c.x_bar = f.number("x_bar", 0.0);
                c.parameter = f.number(type == "linear" ? "b" : "k");
                return c;
            }
            return unknown("linear, log_hyperbolic");
    }
    return {};
}

SamplerSpec parse_sampler(Domain domain, Fields& f) {
    switch (domain) {
        case Domain::Risk: {
            RiskSampler s;
            s.resolution = f.count("resolution", s.resolution);
            s.pair_resolution = f.count("pair_resolution", s.pair_resolution);
            s.lambda_resolution = f.count("lambda_resolution", s.lambda_resolution);
            s.independence_pairs = f.count("independence_pairs", s.independence_pairs);
            s.independence_alphas = f.count("independence_alphas", s.independence_alphas);
            s.independence_mixers = f.count("independence_mixers", s.independence_mixers);
            s.converse_resolution = f.count("converse_resolution", s.converse_resolution);
            s.converse_eps = f.number("converse_eps", s.converse_eps);
            if (s.resolution < 1) Fields::fail(f.at("resolution"), "must be at least 1");
            if (!(s.converse_eps > 0.0)) Fields::fail(f.at("converse_eps"), "must be positive");
            return s;
        }
        case Domain::Uncertainty: {
            UncertaintySampler s;
            s.box_bound = f.number("box_bound", s.box_bound);
            s.box_resolution = f.count("box_resolution", s.box_resolution);
            s.theta_resolution = f.count("theta_resolution", s.theta_resolution);
            s.n_max = f.integer("n_max", s.n_max);
            s.eta = f.number("eta", s.eta);
            s.qc_resolution = f.count("qc_resolution", s.qc_resolution);
            s.qc_levels = f.count("qc_levels", s.qc_levels);
            s.ua_resolution = f.count("ua_resolution", s.ua_resolution);
            s.ua_lambdas = f.count("ua_lambdas", s.ua_lambdas);
            if (!(s.box_bound > 0.0)) Fields::fail(f.at("box_bound"), "must be positive");
            if (s.box_resolution < 2) Fields::fail(f.at("box_resolution"), "must be at least 2");
            if (s.theta_resolution < 2) Fields::fail(f.at("theta_resolution"), "must be at least 2");
            if (s.n_max < 1) Fields::fail(f.at("n_max"), "must be at least 1");
            if (s.eta != 0.0 && !(s.eta > 1.0)) Fields::fail(f.at("eta"), "must be 0 (disabled) or above 1");
            return s;
        }
        case Domain::TimeDiscrete: {
            DiscreteSampler s;
            s.horizon = f.count("horizon", s.horizon);
            s.t_max = f.count("t_max", s.t_max);
            s.n_max = f.integer("n_max", s.n_max);
            s.anchor = f.number("anchor", s.anchor);
            s.pair_max = f.count("pair_max", s.pair_max);
            if (s.horizon < 1) Fields::fail(f.at("horizon"), "must be at least 1");
            if (s.t_max < 1) Fields::fail(f.at("t_max"), "must be at least 1");
            if (!(s.anchor > 0.0)) Fields::fail(f.at("anchor"), "must be positive");
            return s;
        }
        case Domain::TimeContinuous: {
            ContinuousSampler s;
            s.x_min = f.number("x_min", s.x_min);
            s.x_points = f.count("x_points", s.x_points);
            s.t_max = f.number("t_max", s.t_max);
            s.t_points = f.count("t_points", s.t_points);
            s.delta_max = f.number("delta_max", s.delta_max);
            s.delta_points = f.count("delta_points", s.delta_points);
            if (s.x_points < 2 || s.t_points < 2 || s.delta_points < 2)
                Fields::fail(f.at("x_points"), "point counts must be at least 2");
            if (!(s.t_max > 0.0) || !(s.delta_max > 0.0)) Fields::fail(f.at("t_max"), "ranges must be positive");
            return s;
        }
    }
    return {};
}

json model_json(const ModelSpec& m) {
    return std::visit(
        Overloaded{
            [](const RiskModel& r) -> json {
                return std::visit(Overloaded{
                                      [](const Cpt& c) -> json {
                                          return {{"type", "cpt"},
                                                  {"prizes", c.prizes},
                                                  {"value_exponent", c.value_exponent},
                                                  {"weighting_exponent", c.weighting_exponent}};
                                      },
                                      [](const ExpectedUtility& e) -> json {
                                          return {{"type", "expected_utility"}, {"utilities", e.utilities}};
                                      },
                                      [](const TabulatedUtility&) -> json {
                                          throw InvalidInput("tabulated utilities are not scenario models");
                                      },
                                  },
                                  r);
            },
            [](const ActModel& a) -> json {
                return std::visit(Overloaded{
                                      [](const Seu& m) -> json { return {{"type", "seu"}, {"prior", m.prior}}; },
                                      [](const Meu& m) -> json { return {{"type", "meu"}, {"priors", m.priors}}; },
                                      [](const SmoothAmbiguity& m) -> json {
                                          return {{"type", "smooth_ambiguity"},
                                                  {"kernel", to_string(m.kernel)},
                                                  {"priors", m.priors},
                                                  {"weights", m.weights}};
                                      },
                                      [](const Ces& m) -> json {
                                          return {{"type", "ces"}, {"weights", m.weights}, {"rho", m.rho}};
                                      },
                                      [](const TiltedSeu& m) -> json {
                                          return {{"type", "tilted_seu"}, {"prior", m.prior}, {"amplitude", m.amplitude}};
                                      },
                                  },
                                  a);
            },
            [](const TimeModel& t) -> json {
                return std::visit(Overloaded{
                                      [](const Exponential& m) -> json {
                                          return {{"type", "exponential"}, {"gamma", m.gamma}};
                                      },
                                      [](const QuasiHyperbolic& m) -> json {
                                          return {{"type", "quasi_hyperbolic"}, {"beta", m.beta}, {"delta", m.delta}};
                                      },
                                      [](const Hyperbolic& m) -> json { return {{"type", "hyperbolic"}, {"k", m.k}}; },
                                      [](const PerturbedExponential& m) -> json {
                                          return {{"type", "perturbed_exponential"},
                                                  {"gamma", m.gamma},
                                                  {"amplitude", m.amplitude},
                                                  {"frequency", m.frequency}};
                                      },
                                      [](const TabulatedDiscount& m) -> json {
                                          return {{"type", "tabulated"}, {"values", m.values}};
                                      },
                                  },
                                  t);
            },
            [](const ContinuousSpec& c) -> json {
                return {{"type", c.type}, {"x_bar", c.x_bar}, {c.type == "linear" ? "b" : "k", c.parameter}};
            },
        },
        m);
}

json sampler_json(const SamplerSpec& s, std::uint64_t seed) {
    json j = std::visit(Overloaded{
                            [](const RiskSampler& r) -> json {
                                return {{"resolution", r.resolution},
                                        {"pair_resolution", r.pair_resolution},
                                        {"lambda_resolution", r.lambda_resolution},
                                        {"independence_pairs", r.independence_pairs},
                                        {"independence_alphas", r.independence_alphas},
                                        {"independence_mixers", r.independence_mixers},
                                        {"converse_resolution", r.converse_resolution},
                                        {"converse_eps", r.converse_eps}};
                            },
                            [](const UncertaintySampler& u) -> json {
                                return {{"box_bound", u.box_bound},         {"box_resolution", u.box_resolution},
                                        {"theta_resolution", u.theta_resolution}, {"n_max", u.n_max},
                                        {"eta", u.eta},                     {"qc_resolution", u.qc_resolution},
                                        {"qc_levels", u.qc_levels},         {"ua_resolution", u.ua_resolution},
                                        {"ua_lambdas", u.ua_lambdas}};
                            },
                            [](const DiscreteSampler& d) -> json {
                                return {{"horizon", d.horizon}, {"t_max", d.t_max},   {"n_max", d.n_max},
                                        {"anchor", d.anchor},   {"pair_max", d.pair_max}};
                            },
                            [](const ContinuousSampler& c) -> json {
                                return {{"x_min", c.x_min},         {"x_points", c.x_points},
                                        {"t_max", c.t_max},         {"t_points", c.t_points},
                                        {"delta_max", c.delta_max}, {"delta_points", c.delta_points}};
                            },
                        },
                        s);
    j["seed"] = seed;
    return j;
}

json scenario_json(const Scenario& s) {
    json j = {{"version", s.version},
              {"name", s.name},
              {"domain", to_string(s.domain)},
              {"model", model_json(s.model)},
              {"sampler", sampler_json(s.sampler, s.seed)},
              {"tolerances", {{"sup_slack", s.tolerances.sup_slack}, {"bisection", s.tolerances.bisection}}}};
    if (!s.output_dir.empty()) j["output_dir"] = s.output_dir;
    return j;
}

json to_json(const ViolationReport& r) {
    return {{"parameter", r.parameter},       {"value", r.value},
            {"witness", r.witness},           {"witness_layout", r.witness_layout},
            {"samples_evaluated", r.samples_evaluated}, {"note", r.note},
            {"diagnostics", r.diagnostics}};
}

json to_json(const NearRepresentation& r) {
    return {{"kind", to_string(r.kind)},
            {"parameters", r.parameters},
            {"coefficients", r.coefficients},
            {"achieved_distance", r.achieved_distance},
            {"bound", r.bound},
            {"passed", r.passed},
            {"witness", r.witness},
            {"samples", r.samples},
            {"note", r.note}};
}

std::string build_report(const Scenario* s, const RunResult& r) {
    json j;
    j["name"] = r.name;
    if (s) j["scenario"] = scenario_json(*s);
    j["measurements"] = json::array();
    for (const auto& m : r.measurements) j["measurements"].push_back(to_json(m));
    j["representations"] = json::array();
    for (const auto& m : r.representations) j["representations"].push_back(to_json(m));
    j["verdicts"] = json::array();
    for (const auto& v : r.verdicts)
        j["verdicts"].push_back({{"name", v.name}, {"status", to_string(v.status)}, {"detail", v.detail}});
    j["summary"] = r.summary;
    j["tables"] = json::array();
    for (const auto& t : r.tables) j["tables"].push_back(r.name + "-" + t.name + ".csv");
    j["all_passed"] = r.all_passed();
    j["wall_clock_seconds"] = r.seconds;
    return to_text(j);
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

std::vector<Act> box_acts(std::size_t dim, std::size_t resolution, double bound) {
    GridSpec g;
    g.kind = SpaceKind::Box;
    g.dim = dim;
    g.resolution = resolution;
    g.bound = bound;
    std::vector<Act> out;
    for (auto& p : grid_sample(g)) out.emplace_back(std::move(p));
    return out;
}

Verdict pass(std::string name, std::string detail = {}) { return {std::move(name), VerdictStatus::Pass, std::move(detail)}; }
Verdict fail(std::string name, std::string detail) { return {std::move(name), VerdictStatus::Fail, std::move(detail)}; }
Verdict na(std::string name, std::string detail) {
    return {std::move(name), VerdictStatus::NotApplicable, std::move(detail)};
}

std::string fmt(double v) { return csv::format_double(v); }

void run_risk(const Scenario& s, const RiskSampler& smp, RunResult& r) {
    const RiskModel& model = std::get<RiskModel>(s.model);
    const double slack = s.tolerances.sup_slack;
    const risk::MixtureUtility u(model, s.tolerances.bisection);
    const risk::AffineBenchmark l = risk::build_affine_benchmark(u);
    const std::size_t n = u.prize_count();

    const auto sampler = risk::make_rcl_sampler(n, smp.resolution, smp.pair_resolution, smp.lambda_resolution);
    const ViolationReport eps = risk::measure_eps_rcl(u, sampler);
    r.measurements.push_back(eps);
    try {
        r.representations.push_back(risk::verify_thm1(u, l, eps.value, sampler.points, slack));
        r.verdicts.push_back(pass("affine_rcl_bound", "|u - l| < (supp - 1) eps at every lattice point"));
    } catch (const BoundViolated& e) {
        r.representations.push_back(e.representation());
        r.verdicts.push_back(fail("affine_rcl_bound", e.what()));
    }

    csv::Table table;
    for (std::size_t i = 0; i < n; ++i) table.header.push_back("p" + std::to_string(i));
    for (const char* h : {"support", "u", "l", "abs_diff", "bound"}) table.header.emplace_back(h);
    for (const Lottery& p : sampler.points) {
        std::vector<double> row = p.probs();
        const double uv = u(p);
        const double lv = l(p);
        row.push_back(static_cast<double>(p.support()));
        row.push_back(uv);
        row.push_back(lv);
        row.push_back(std::abs(uv - lv));
        row.push_back(static_cast<double>(p.support() - 1) * eps.value);
        table.rows.push_back(std::move(row));
    }
    r.tables.push_back({"u-vs-l", std::move(table)});

    if (smp.independence_pairs > 0 && smp.independence_alphas > 0) {
        const auto tuples = risk::make_independence_sampler(u, smp.independence_pairs, smp.independence_alphas,
                                                            smp.independence_mixers, s.seed);
        const ViolationReport e2 = risk::measure_eps_independence(u, tuples);
        r.measurements.push_back(e2);
        try {
            r.representations.push_back(risk::verify_thm2(u, l, e2.value, sampler.points, slack));
            r.verdicts.push_back(pass("affine_independence_bound", "|u - l| < (d+1)^2 eps on the lattice"));
        } catch (const BoundViolated& e) {
            r.representations.push_back(e.representation());
            r.verdicts.push_back(fail("affine_independence_bound", e.what()));
        }
    }

    if (smp.converse_resolution > 0) {
        const double ce = smp.converse_eps;
        const TabulatedUtility tab = risk::perturbed_tabulation(l, u.best(), u.worst(), 0.9 * ce, smp.converse_resolution);
        const auto triples =
            risk::make_rcl_sampler(n, smp.converse_resolution, smp.pair_resolution, smp.lambda_resolution).triples;
        try {
            const ViolationReport c = risk::converse_check_4eps(tab, l, ce, triples);
            r.measurements.push_back(c);
            if (c.value < 4.0 * ce)
                r.verdicts.push_back(pass("converse_4eps", "max defect / eps = " + fmt(c.value / ce)));
            else
                r.verdicts.push_back(fail("converse_4eps", "max defect / eps = " + fmt(c.value / ce)));
        } catch (const HypothesisFailed& e) {
            r.verdicts.push_back(na("converse_4eps", e.what()));
        }
    }
}

void run_uncertainty(const Scenario& s, const UncertaintySampler& smp, RunResult& r) {
    const ActModel& model = std::get<ActModel>(s.model);
    const uncertainty::CEUtility u(model, s.tolerances.bisection);
    const std::size_t d = u.states();
    const double slack = s.tolerances.sup_slack;
    const auto points = box_acts(d, smp.box_resolution, smp.box_bound);
    const auto theta_points = box_acts(d, smp.theta_resolution, smp.box_bound);

    const auto theta = uncertainty::theta_estimate(u, uncertainty::make_theta_pairs(theta_points), smp.n_max);
    r.measurements.push_back(theta.report);
    csv::Table partial{{"n", "partial_sum"}, {}};
    for (std::size_t i = 0; i < theta.partial_sums.size(); ++i)
        partial.rows.push_back({static_cast<double>(i), theta.partial_sums[i]});
    r.tables.push_back({"theta-partial-sums", std::move(partial)});

    // Homothetic models: the doubling sequence is constant, so u is its own limit.
    double homog_dev = 0.0;
    for (const Act& x : theta_points)
        for (double a : {0.5, 2.0, 3.0}) homog_dev = std::max(homog_dev, uncertainty::measure_homog_deviation(u, x, a));
    r.summary["homothety_defect"] = homog_dev;
    if (homog_dev <= 1e-9) {
        double exact = 0.0;
        for (const Act& x : theta_points) {
            const int guard = std::min(20, uncertainty::doubling_guard(x, 20));
            for (int n = 1; n <= guard; ++n)
                exact = std::max(exact, std::abs(std::ldexp(u(x.scaled(std::ldexp(1.0, n))), -n) - u(x)));
        }
        r.summary["homothetic_exactness_defect"] = exact;
        r.verdicts.push_back(exact <= 1e-9 ? pass("homothetic_exactness", "u = v: 2^-n u(2^n x) = u(x)")
                                           : fail("homothetic_exactness", "defect " + fmt(exact)));
    }

    std::optional<uncertainty::LinearBenchmark> benchmark;
    std::string prior_issue;
    try {
        benchmark = uncertainty::extract_prior(u);
    } catch (const NotAdditive& e) {
        prior_issue = std::string(e.what()) + " (sum " + fmt(e.sum()) + ", v(1) " + fmt(e.total()) + ")";
    } catch (const NotConverged& e) {
        prior_issue = e.what();
    }
    if (!theta.converged) {
        r.verdicts.push_back(na("linear_theta_bound", "theta series classified non-convergent" +
                                                          (prior_issue.empty() ? std::string() : "; " + prior_issue)));
    } else if (!benchmark) {
        r.verdicts.push_back(na("linear_theta_bound", prior_issue));
    } else {
        try {
            r.representations.push_back(uncertainty::verify_aa_bound(u, *benchmark, theta.report.value, theta_points, slack));
            r.verdicts.push_back(pass("linear_theta_bound", "sup |u - v| <= theta on the theta sample"));
        } catch (const BoundViolated& e) {
            r.representations.push_back(e.representation());
            r.verdicts.push_back(fail("linear_theta_bound", e.what()));
        }
        csv::Table t;
        for (std::size_t i = 0; i < d; ++i) t.header.push_back("x" + std::to_string(i));
        for (const char* h : {"u", "v", "abs_diff", "bound"}) t.header.emplace_back(h);
        for (const Act& x : points) {
            std::vector<double> row = x.payoffs();
            const double uv = u(x), vv = (*benchmark)(x);
            row.insert(row.end(), {uv, vv, std::abs(uv - vv), theta.report.value});
            t.rows.push_back(std::move(row));
        }
        r.tables.push_back({"defect", std::move(t)});
    }

    if (const auto* smooth = std::get_if<SmoothAmbiguity>(&model)) {
        NearRepresentation rep = uncertainty::smooth_ambiguity_bound(*smooth, points);
        r.representations.push_back(rep);
        r.verdicts.push_back(rep.passed ? pass("smooth_ambiguity_bound", "sup |u - v| = " + fmt(rep.achieved_distance))
                                        : fail("smooth_ambiguity_bound", "sup |u - v| = " + fmt(rep.achieved_distance)));
    }

    if (smp.eta > 1.0) {
        try {
            r.representations.push_back(uncertainty::verify_homog_bound(u, smp.eta, theta_points, {0.5, 2.0, 3.7}));
            r.verdicts.push_back(pass("homogeneous_bound", "sup |u - v| <= 2 theta, v homogeneous"));
        } catch (const BoundViolated& e) {
            r.representations.push_back(e.representation());
            r.verdicts.push_back(fail("homogeneous_bound", e.what()));
        } catch (const NotConverged& e) {
            r.verdicts.push_back(na("homogeneous_bound", e.what()));
        }
    }

    if (smp.qc_resolution >= 2) {
        if (d > 3) {
            r.verdicts.push_back(na("quasiconcave_bound", "envelope limited to at most 3 states"));
            return;
        }
        const auto qb = uncertainty::quasiconcavify(u, smp.box_bound, smp.qc_resolution, smp.qc_levels);
        auto triples = uncertainty::make_ua_sampler(box_acts(d, smp.ua_resolution, smp.box_bound), smp.ua_lambdas);
        triples.insert(triples.end(), qb.chain_triples.begin(), qb.chain_triples.end());
        const ViolationReport eua = uncertainty::measure_eps_ua(u, triples);
        r.measurements.push_back(eua);
        try {
            r.representations.push_back(uncertainty::verify_quasiconcave_bound(qb, eua.value, slack));
            r.verdicts.push_back(pass("quasiconcave_bound", "v >= u, sup |u - v| <= d eps_ua + spacing"));
        } catch (const BoundViolated& e) {
            r.representations.push_back(e.representation());
            r.verdicts.push_back(fail("quasiconcave_bound", e.what()));
        }
        csv::Table t;
        for (std::size_t i = 0; i < d; ++i) t.header.push_back("x" + std::to_string(i));
        for (const char* h : {"u", "v", "v_minus_u"}) t.header.emplace_back(h);
        for (std::size_t i = 0; i < qb.points.size(); ++i) {
            std::vector<double> row = qb.points[i];
            row.insert(row.end(), {qb.u[i], qb.v[i], qb.v[i] - qb.u[i]});
            t.rows.push_back(std::move(row));
        }
        r.tables.push_back({"quasiconcave", std::move(t)});
    }
}

void run_discrete(const Scenario& s, const DiscreteSampler& smp, RunResult& r) {
    const timepref::DiscountCurve curve(std::get<TimeModel>(s.model), smp.horizon);
    const std::size_t t_max = std::min(smp.t_max, curve.horizon());
    std::vector<double> ts;
    for (std::size_t t = 1; t <= t_max; ++t) ts.push_back(static_cast<double>(t));

    const auto theta = timepref::theta_series(curve, ts, smp.n_max);
    r.measurements.push_back(theta.report);
    std::optional<timepref::GammaFit> fit;
    try {
        fit = timepref::fit_gamma(curve);
        r.summary["gamma"] = fit->gamma;
        r.summary["gamma_degenerate"] = fit->degenerate ? 1.0 : 0.0;
    } catch (const NotConverged& e) {
        r.verdicts.push_back(na("exponential_theta_bound", e.what()));
    }
    if (fit) {
        std::vector<double> range{0.0};
        range.insert(range.end(), ts.begin(), ts.end());
        if (!theta.converged) {
            r.verdicts.push_back(na("exponential_theta_bound", "theta series classified non-convergent"));
        } else {
            try {
                r.representations.push_back(timepref::verify_exp_bound(curve, fit->gamma, theta.report.value, range));
                r.verdicts.push_back(pass("exponential_theta_bound",
                                          fit->degenerate ? "bound holds; gamma = 1 is a degenerate benchmark"
                                                          : "sup |log d(t) - t log gamma| <= theta"));
            } catch (const BoundViolated& e) {
                r.representations.push_back(e.representation());
                r.verdicts.push_back(fail("exponential_theta_bound", e.what()));
            }
        }
        csv::Table t{{"t", "d", "gamma_pow_t", "log_defect", "theta"}, {}};
        for (double tv : range) {
            const double gt = std::pow(fit->gamma, tv);
            t.rows.push_back({tv, curve.d(tv), gt, std::abs(curve.log_d(tv) - tv * std::log(fit->gamma)),
                              theta.report.value});
        }
        r.tables.push_back({"discount", std::move(t)});
    }

    if (!curve.strictly_decreasing()) {
        r.verdicts.push_back(na("exact_exponential", "discount curve is not strictly decreasing"));
        return;
    }
    std::vector<timepref::DelayPair> all, half;
    const std::size_t pm = curve.closed_form() ? smp.pair_max : std::min(smp.pair_max, curve.horizon() / 2);
    for (std::size_t a = 0; a <= pm; ++a)
        for (std::size_t b = a; b <= pm; ++b) {
            all.push_back({static_cast<double>(a), static_cast<double>(b)});
            if (a + b <= pm) half.push_back({static_cast<double>(a), static_cast<double>(b)});
        }
    const ViolationReport w_full = timepref::measure_W_axiom(curve, smp.anchor, all);
    const ViolationReport w_half = timepref::measure_W_axiom(curve, smp.anchor, half);
    r.measurements.push_back(w_full);
    r.summary["theta_w_half_range"] = w_half.value;
    // Floating-point noise in W scales like 1/d(s+t); 1e-5 absorbs it.
    const bool bounded = w_full.value <= 1.5 * w_half.value + 1e-5;
    try {
        NearRepresentation rec = timepref::exact_recovery(curve, w_full.value);
        r.representations.push_back(rec);
        if (!bounded)
            r.verdicts.push_back(na("exact_exponential", "theta_w grows with the sampled delays; recovered gamma " +
                                                             fmt(rec.parameters["gamma"]) + " with defect " +
                                                             fmt(rec.achieved_distance)));
        else if (rec.passed)
            r.verdicts.push_back(pass("exact_exponential", "d(t) = gamma^t with gamma " + fmt(rec.parameters["gamma"])));
        else
            r.verdicts.push_back(fail("exact_exponential", "bounded theta_w but defect " + fmt(rec.achieved_distance)));
    } catch (const NoSuchTau& e) {
        r.verdicts.push_back(na("exact_exponential", e.what()));
    }
}

void run_continuous(const Scenario& s, const ContinuousSampler& smp, RunResult& r) {
    const auto& spec = std::get<ContinuousSpec>(s.model);
    const timepref::ContinuousTimeModel model = spec.type == "linear"
                                                    ? timepref::linear_delay(spec.x_bar, spec.parameter)
                                                    : timepref::log_hyperbolic(spec.x_bar, spec.parameter);
    if (!(smp.x_min < spec.x_bar)) throw InvalidInput("sampler.x_min must lie below model.x_bar");
    const timepref::GammaCurve curve(model, smp.x_min, 201, s.tolerances.bisection);
    const auto xs = linspace(smp.x_min, spec.x_bar, smp.x_points);
    const auto ts = linspace(0.0, smp.t_max, smp.t_points);
    const auto deltas = linspace(0.0, smp.delta_max, smp.delta_points);

    std::vector<timepref::LevelDelay> ld;
    std::vector<timepref::LevelTimeDelay> ltd;
    std::vector<timepref::LevelTime> lt;
    for (double x : xs) {
        for (double dl : deltas) ld.push_back({x, dl});
        for (double t : ts) {
            lt.push_back({x, t});
            for (double dl : deltas)
                if (dl > 0.0) ltd.push_back({x, t, dl});
        }
    }
    const ViolationReport eps = timepref::measure_eps_stationarity(curve, ld);
    const ViolationReport lam = timepref::measure_lambda_lipschitz(model, ltd);
    r.measurements.push_back(eps);
    r.measurements.push_back(lam);
    constexpr double kSlack = 1e-6;
    double defect = 0.0;
    try {
        NearRepresentation rep = timepref::verify_exp3_bound(curve, eps.value, lam.value, lt, kSlack);
        defect = rep.achieved_distance;
        r.representations.push_back(rep);
        r.verdicts.push_back(pass("time_shift_bound", "sup |u - g(t + gamma(x))| <= lambda eps"));
    } catch (const BoundViolated& e) {
        defect = e.representation().achieved_distance;
        r.representations.push_back(e.representation());
        r.verdicts.push_back(fail("time_shift_bound", e.what()));
    }
    if (eps.value <= s.tolerances.sup_slack)
        r.verdicts.push_back(defect <= s.tolerances.sup_slack
                                 ? pass("zero_eps_exactness", "exactly stationary: defect " + fmt(defect))
                                 : fail("zero_eps_exactness", "defect " + fmt(defect) + " with eps ~ 0"));

    csv::Table t{{"x", "t", "u", "h", "defect", "bound"}, {}};
    std::vector<double> hs, vs;
    for (const auto& p : lt) {
        const double uv = model.u(p.x, p.t);
        const double hv = curve.g(p.t + curve.gamma(p.x));
        t.rows.push_back({p.x, p.t, uv, hv, std::abs(uv - hv), lam.value * eps.value});
        hs.push_back(hv);
        vs.push_back(p.x - p.t / spec.parameter);  // log of X e^(-t/b)
    }
    r.tables.push_back({"continuous", std::move(t)});
    if (spec.type == "linear") {
        const double conc = timepref::rank_concordance(hs, vs, 1e-8);
        r.summary["rank_concordance"] = conc;
        r.verdicts.push_back(conc == 1.0 ? pass("ordinal_exponential", "ranks agree with X exp(-t/b)")
                                         : fail("ordinal_exponential", "concordance " + fmt(conc)));
    }
}

void finalize(RunResult& r, const Scenario* s, std::chrono::steady_clock::time_point start) {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.report = build_report(s, r);
}

Scenario apply_overrides(Scenario s, const RunOptions& opts) {
    if (opts.tol) s.tolerances.sup_slack = *opts.tol;
    if (opts.seed) s.seed = *opts.seed;
    if (opts.grid) {
        std::visit(Overloaded{
                       [&](RiskSampler& r) { r.resolution = *opts.grid; },
                       [&](UncertaintySampler& u) { u.box_resolution = *opts.grid; },
                       [&](DiscreteSampler& d) { d.t_max = *opts.grid; },
                       [&](ContinuousSampler& c) { c.t_points = *opts.grid; },
                   },
                   s.sampler);
    }
    return s;
}

}  // namespace

std::string to_string(Domain d) {
    switch (d) {
        case Domain::Risk: return "risk";
        case Domain::Uncertainty: return "uncertainty";
        case Domain::TimeDiscrete: return "time-discrete";
        case Domain::TimeContinuous: return "time-continuous";
    }
    return "?";
}

std::string to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::Pass: return "pass";
        case VerdictStatus::Fail: return "fail";
        case VerdictStatus::NotApplicable: return "not-applicable";
    }
    return "?";
}

Scenario parse(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        std::string what = e.what();
        throw ScenarioError(source + ":" + std::to_string(line) + ": syntax error: " + what);
    }
    try {
        Fields top(doc, "");
        Scenario s;
        const json& version = top.raw("version");
        if (!version.is_number_integer() || version.get<long long>() != 1)
            Fields::fail("version", "unsupported version (expected 1)");
        s.version = 1;
        s.name = top.text("name");
        static const std::regex name_re("[A-Za-z0-9][A-Za-z0-9._-]*");
        if (!std::regex_match(s.name, name_re))
            Fields::fail("name", "must be a nonempty file-name-safe identifier");
        s.domain = parse_domain(top.text("domain"));
        {
            Fields m(top.raw("model"), "model");
            s.model = parse_model(s.domain, m);
            m.finish();
        }
        {
            static const json empty = json::object();
            Fields sm(top.has("sampler") ? top.raw("sampler") : empty, "sampler");
            s.sampler = parse_sampler(s.domain, sm);
            if (sm.has("seed")) s.seed = sm.count("seed");
            sm.finish();
        }
        if (top.has("tolerances")) {
            Fields t(top.raw("tolerances"), "tolerances");
            s.tolerances.sup_slack = t.number("sup_slack", s.tolerances.sup_slack);
            s.tolerances.bisection = t.number("bisection", s.tolerances.bisection);
            if (!(s.tolerances.sup_slack >= 0.0)) Fields::fail("tolerances.sup_slack", "must be nonnegative");
            if (!(s.tolerances.bisection > 0.0)) Fields::fail("tolerances.bisection", "must be positive");
            t.finish();
        }
        s.output_dir = top.text("output_dir", "");
        top.finish();
        return s;
    } catch (const ScenarioError& e) {
        throw ScenarioError(source + ": " + e.what());
    }
}

Scenario load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ScenarioError(path.string() + ": cannot open file");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse(buf.str(), path.string());
}

std::string dump(const Scenario& s) { return to_text(scenario_json(s)); }

bool RunResult::all_passed() const {
    return std::none_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == VerdictStatus::Fail; });
}

int RunResult::exit_code() const { return all_passed() ? 0 : 2; }

RunResult run(const Scenario& input, const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const Scenario s = apply_overrides(input, opts);
    RunResult r;
    r.name = s.name;
    std::visit(Overloaded{
                   [&](const RiskSampler& smp) { run_risk(s, smp, r); },
                   [&](const UncertaintySampler& smp) { run_uncertainty(s, smp, r); },
                   [&](const DiscreteSampler& smp) { run_discrete(s, smp, r); },
                   [&](const ContinuousSampler& smp) { run_continuous(s, smp, r); },
               },
               s.sampler);
    finalize(r, &s, start);
    return r;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / (r.name + "-report.json"), std::ios::binary);
        if (!f) throw Error("cannot write report into " + dir.string());
        f << r.report;
    }
    for (const auto& t : r.tables) csv::write(dir / (r.name + "-" + t.name + ".csv"), t.table);
}

std::vector<std::string> builtin_names() { return {"allais", "figure1", "smooth-bound", "quasi-hyperbolic"}; }

std::vector<RunResult> run_builtin(const std::string& name, const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    if (name == "allais") {
        const risk::AllaisReport a = risk::allais_report();
        RunResult r;
        r.name = "allais";
        r.summary = {{"value_exponent", a.value_exponent}, {"weighting_exponent", a.weighting_exponent},
                     {"u_a", a.u_a},                       {"u_b", a.u_b},
                     {"u_c", a.u_c},                       {"u_d", a.u_d},
                     {"u_d_prime", a.u_d_prime},           {"lambda_star", a.lambda_star}};
        const bool pattern = a.b_over_a && a.c_over_d && a.d_prime_over_c;
        r.verdicts.push_back(pattern ? pass("allais_pattern", "U(B) > U(A), U(C) > U(D), U(D') > U(C)")
                                     : fail("allais_pattern", "choice pattern not reproduced"));
        const bool bracket = a.lambda_star > 0.25 && a.lambda_star < 0.27;
        r.verdicts.push_back(bracket ? pass("indifference_threshold", "lambda* = " + fmt(a.lambda_star))
                                     : fail("indifference_threshold", "lambda* = " + fmt(a.lambda_star)));
        csv::Table t{{"value_exponent", "weighting_exponent", "u_a", "u_b", "u_c", "u_d", "u_d_prime", "lambda_star"},
                     {{a.value_exponent, a.weighting_exponent, a.u_a, a.u_b, a.u_c, a.u_d, a.u_d_prime, a.lambda_star}}};
        r.tables.push_back({"values", std::move(t)});
        finalize(r, nullptr, start);
        return {r};
    }
    if (name == "figure1") {
        const risk::Figure1Data f = risk::figure1_data(100001);
        RunResult r;
        r.name = "figure1";
        r.summary = {{"max_abs_deviation", f.max_abs_deviation}, {"argmax", f.argmax}};
        const std::string detail = "max |g(p) - p| = " + fmt(f.max_abs_deviation) + " at p = " + fmt(f.argmax);
        r.verdicts.push_back(f.max_abs_deviation <= 0.1 ? pass("figure1_max_deviation", detail)
                                                        : fail("figure1_max_deviation", detail + " exceeds 0.1"));
        csv::Table t{{"p", "cpt", "eu", "difference"}, {}};
        for (const auto& row : f.rows) t.rows.push_back({row.p, row.cpt, row.eu, row.difference});
        r.tables.push_back({"curve", std::move(t)});
        finalize(r, nullptr, start);
        return {r};
    }
    if (name == "smooth-bound") {
        std::vector<RunResult> out;
        for (AmbiguityKernel k : {AmbiguityKernel::Sqrt1pz2, AmbiguityKernel::ZMinusExp}) {
            Scenario s;
            s.name = "smooth-bound-" + to_string(k);
            s.domain = Domain::Uncertainty;
            s.model = ActModel{SmoothAmbiguity{k, {{0.3, 0.7}, {0.8, 0.2}}, {0.5, 0.5}}};
            UncertaintySampler smp;
            smp.box_resolution = 50;
            s.sampler = smp;
            out.push_back(run(s, opts));
        }
        return out;
    }
    if (name == "quasi-hyperbolic") {
        Scenario s;
        s.name = "quasi-hyperbolic";
        s.domain = Domain::TimeDiscrete;
        s.model = TimeModel{QuasiHyperbolic{0.9, 0.95}};
        s.sampler = DiscreteSampler{};
        return {run(s, opts)};
    }
    std::string list;
    for (const auto& n : builtin_names()) list += (list.empty() ? "" : ", ") + n;
    throw ScenarioError("unknown builtin '" + name + "'; available: " + list);
}

}  // namespace nearrep::scenario
