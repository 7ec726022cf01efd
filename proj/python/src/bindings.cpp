#include "nearrep/hull.hpp"
#include "nearrep/risk.hpp"
#include "nearrep/scenario.hpp"
#include "nearrep/timepref.hpp"
#include "nearrep/uncertainty.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nearrep;

namespace {

py::dict to_dict(const ViolationReport& r) {
    py::dict d;
    d["parameter"] = r.parameter;
    d["value"] = r.value;
    d["witness"] = r.witness;
    d["witness_layout"] = r.witness_layout;
    d["samples_evaluated"] = r.samples_evaluated;
    d["note"] = r.note;
    d["diagnostics"] = r.diagnostics;
    return d;
}

py::dict to_dict(const NearRepresentation& r) {
    py::dict d;
    d["kind"] = to_string(r.kind);
    d["parameters"] = r.parameters;
    d["coefficients"] = r.coefficients;
    d["achieved_distance"] = r.achieved_distance;
    d["bound"] = r.bound;
    d["passed"] = r.passed;
    d["witness"] = r.witness;
    d["samples"] = r.samples;
    d["note"] = r.note;
    return d;
}

py::dict to_dict(const scenario::RunResult& r) {
    py::dict d;
    d["name"] = r.name;
    py::list verdicts;
    for (const auto& v : r.verdicts) {
        py::dict e;
        e["name"] = v.name;
        e["status"] = scenario::to_string(v.status);
        e["detail"] = v.detail;
        verdicts.append(e);
    }
    d["verdicts"] = verdicts;
    py::list ms, rs;
    for (const auto& m : r.measurements) ms.append(to_dict(m));
    for (const auto& n : r.representations) rs.append(to_dict(n));
    d["measurements"] = ms;
    d["representations"] = rs;
    d["summary"] = r.summary;
    d["exit_code"] = r.exit_code();
    d["report"] = r.report;
    return d;
}

// Bad input maps to ValueError, a violated bound to ArithmeticError.
void translate(std::exception_ptr p) {
    try {
        if (p) std::rethrow_exception(p);
    } catch (const InvalidInput& e) {
        PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const BoundViolated& e) {
        PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
}

}  // namespace

PYBIND11_MODULE(_nearrep, m) {
    m.doc() = "Near-representations of preference models";
    py::register_exception_translator(&translate);
    static py::exception<Error> base(m, "NearrepError");
    py::register_exception<NotConverged>(m, "NotConverged", base.ptr());
    py::register_exception<NotAdditive>(m, "NotAdditive", base.ptr());
    py::register_exception<NoSuchTau>(m, "NoSuchTau", base.ptr());
    py::register_exception<HypothesisFailed>(m, "HypothesisFailed", base.ptr());
    py::register_exception<NoBracket>(m, "NoBracket", base.ptr());

    // Models
    py::class_<ExpectedUtility>(m, "ExpectedUtility")
        .def(py::init([](std::vector<double> u) { return ExpectedUtility{std::move(u)}; }), py::arg("utilities"))
        .def_readwrite("utilities", &ExpectedUtility::utilities);
    py::class_<Cpt>(m, "Cpt")
        .def(py::init([](std::vector<double> prizes, double a, double b) { return Cpt{std::move(prizes), a, b}; }),
             py::arg("prizes"), py::arg("value_exponent") = 0.54, py::arg("weighting_exponent") = 0.74)
        .def_readwrite("prizes", &Cpt::prizes)
        .def_readwrite("value_exponent", &Cpt::value_exponent)
        .def_readwrite("weighting_exponent", &Cpt::weighting_exponent);

    py::enum_<AmbiguityKernel>(m, "AmbiguityKernel")
        .value("SQRT1PZ2", AmbiguityKernel::Sqrt1pz2)
        .value("Z_MINUS_EXP", AmbiguityKernel::ZMinusExp);
    py::class_<Seu>(m, "Seu")
        .def(py::init([](std::vector<double> p) { return Seu{std::move(p)}; }), py::arg("prior"))
        .def_readwrite("prior", &Seu::prior);
    py::class_<Meu>(m, "Meu")
        .def(py::init([](std::vector<std::vector<double>> p) { return Meu{std::move(p)}; }), py::arg("priors"))
        .def_readwrite("priors", &Meu::priors);
    py::class_<SmoothAmbiguity>(m, "SmoothAmbiguity")
        .def(py::init([](AmbiguityKernel k, std::vector<std::vector<double>> p, std::vector<double> w) {
                 return SmoothAmbiguity{k, std::move(p), std::move(w)};
             }),
             py::arg("kernel"), py::arg("priors"), py::arg("weights"))
        .def_readwrite("priors", &SmoothAmbiguity::priors)
        .def_readwrite("weights", &SmoothAmbiguity::weights);
    py::class_<Ces>(m, "Ces")
        .def(py::init([](std::vector<double> w, double rho) { return Ces{std::move(w), rho}; }), py::arg("weights"),
             py::arg("rho"));
    py::class_<TiltedSeu>(m, "TiltedSeu")
        .def(py::init([](std::vector<double> p, double a) { return TiltedSeu{std::move(p), a}; }), py::arg("prior"),
             py::arg("amplitude"));

    py::class_<Exponential>(m, "Exponential").def(py::init([](double g) { return Exponential{g}; }), py::arg("gamma"));
    py::class_<QuasiHyperbolic>(m, "QuasiHyperbolic")
        .def(py::init([](double b, double d) { return QuasiHyperbolic{b, d}; }), py::arg("beta"), py::arg("delta"));
    py::class_<Hyperbolic>(m, "Hyperbolic").def(py::init([](double k) { return Hyperbolic{k}; }), py::arg("k"));
    py::class_<PerturbedExponential>(m, "PerturbedExponential")
        .def(py::init([](double g, double a, double f) { return PerturbedExponential{g, a, f}; }), py::arg("gamma"),
             py::arg("amplitude"), py::arg("frequency"));
    py::class_<TabulatedDiscount>(m, "TabulatedDiscount")
        .def(py::init([](std::vector<double> v) { return TabulatedDiscount{std::move(v)}; }), py::arg("values"));

    // Risk
    m.def("cpt_weight", &cpt_weight, py::arg("p"), py::arg("exponent"));
    m.def(
        "mixture_utility",
        [](const RiskModel& model, std::vector<double> p) { return risk::mixture_utility(model, Lottery(std::move(p))); },
        py::arg("model"), py::arg("lottery"));
    m.def(
        "risk_bound",
        [](const RiskModel& model, std::size_t resolution) {
            risk::MixtureUtility u(model);
            const auto l = risk::build_affine_benchmark(u);
            const auto sampler = risk::make_rcl_sampler(u.prize_count(), resolution);
            const auto eps = risk::measure_eps_rcl(u, sampler);
            py::dict d;
            d["eps_rcl"] = to_dict(eps);
            d["coefficients"] = l.coefficients();
            d["representation"] = to_dict(risk::verify_thm1(u, l, eps.value, sampler.points));
            return d;
        },
        py::arg("model"), py::arg("resolution") = 101,
        "Measure the compound-lottery defect, build the affine benchmark and check the bound.");
    m.def("allais_report", [] {
        const auto a = risk::allais_report();
        py::dict d;
        d["u_a"] = a.u_a;
        d["u_b"] = a.u_b;
        d["u_c"] = a.u_c;
        d["u_d"] = a.u_d;
        d["u_d_prime"] = a.u_d_prime;
        d["b_over_a"] = a.b_over_a;
        d["c_over_d"] = a.c_over_d;
        d["d_prime_over_c"] = a.d_prime_over_c;
        d["lambda_star"] = a.lambda_star;
        return d;
    });
    m.def(
        "figure1",
        [](std::size_t resolution) {
            const auto f = risk::figure1_data(resolution);
            py::dict d;
            d["max_abs_deviation"] = f.max_abs_deviation;
            d["argmax"] = f.argmax;
            std::vector<double> p, c;
            for (const auto& r : f.rows) {
                p.push_back(r.p);
                c.push_back(r.cpt);
            }
            d["p"] = p;
            d["cpt"] = c;
            return d;
        },
        py::arg("resolution") = 100001);

    // Uncertainty
    m.def(
        "ce_utility",
        [](const ActModel& model, std::vector<double> x) { return uncertainty::ce_utility(model, Act(std::move(x))); },
        py::arg("model"), py::arg("act"));
    m.def(
        "extract_prior",
        [](const ActModel& model) { return uncertainty::extract_prior(uncertainty::CEUtility(model)).probabilities(); },
        py::arg("model"));
    m.def("mean_prior", &uncertainty::mean_prior, py::arg("model"));
    m.def(
        "smooth_ambiguity_bound",
        [](const SmoothAmbiguity& model, double bound, std::size_t resolution) {
            std::vector<Act> pts;
            for (const auto& g : grid_sample(GridSpec{SpaceKind::Box, model.priors.front().size(), resolution, bound}))
                pts.emplace_back(g);
            return to_dict(uncertainty::smooth_ambiguity_bound(model, pts));
        },
        py::arg("model"), py::arg("bound") = 10.0, py::arg("resolution") = 50);
    m.def(
        "hull_membership",
        [](const std::vector<std::vector<double>>& points, const std::vector<double>& x) {
            const auto c = hull::membership(points, x);
            return py::make_tuple(c.member, c.indices, c.weights);
        },
        py::arg("points"), py::arg("x"));

    // Discrete time
    m.def(
        "fit_gamma",
        [](const TimeModel& model, std::size_t horizon) {
            return timepref::fit_gamma(timepref::DiscountCurve(model, horizon)).gamma;
        },
        py::arg("model"), py::arg("horizon") = 200);
    m.def(
        "theta_discount",
        [](const TimeModel& model, std::size_t horizon, std::vector<double> ts) {
            return to_dict(timepref::theta_series(timepref::DiscountCurve(model, horizon), ts).report);
        },
        py::arg("model"), py::arg("horizon") = 200, py::arg("ts") = std::vector<double>{1.0});
    m.def(
        "exact_recovery",
        [](const TimeModel& model, double theta_w, std::size_t horizon) {
            return to_dict(timepref::exact_recovery(timepref::DiscountCurve(model, horizon), theta_w));
        },
        py::arg("model"), py::arg("theta_w"), py::arg("horizon") = 200);

    // Scenarios
    m.def(
        "dump_scenario", [](const std::string& text) { return scenario::dump(scenario::parse(text)); },
        py::arg("text"), "Parse a scenario document and return its canonical form.");
    m.def(
        "run_scenario",
        [](const std::string& text) { return to_dict(scenario::run(scenario::parse(text))); }, py::arg("text"));
    m.def(
        "run_builtin",
        [](const std::string& name) {
            py::list out;
            for (const auto& r : scenario::run_builtin(name)) out.append(to_dict(r));
            return out;
        },
        py::arg("name"));
    m.def("builtin_names", &scenario::builtin_names);
}
