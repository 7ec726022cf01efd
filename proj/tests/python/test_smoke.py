import json
import math

import pytest

import nearrep as nr


def test_allais_pattern():
    a = nr.allais_report()
    assert a["b_over_a"] and a["c_over_d"] and a["d_prime_over_c"]
    assert 0.25 < a["lambda_star"] < 0.27


def test_cpt_weight_endpoints():
    assert nr.cpt_weight(0.0, 0.74) == 0.0
    assert nr.cpt_weight(1.0, 0.74) == pytest.approx(1.0)


def test_expected_utility_is_its_own_benchmark():
    out = nr.risk_bound(nr.ExpectedUtility([0.0, 0.3, 1.0]), resolution=20)
    assert out["eps_rcl"]["value"] < 1e-7
    assert out["coefficients"] == pytest.approx([0.0, 0.3, 1.0], abs=1e-9)
    assert out["representation"]["passed"]


def test_seu_prior_recovered():
    assert nr.extract_prior(nr.Seu([0.25, 0.75])) == pytest.approx([0.25, 0.75], abs=1e-9)


def test_meu_is_not_additive():
    with pytest.raises(nr.NotAdditive):
        nr.extract_prior(nr.Meu([[0.3, 0.7], [0.7, 0.3]]))


def test_smooth_bound():
    m = nr.SmoothAmbiguity(nr.AmbiguityKernel.SQRT1PZ2, [[0.3, 0.7], [0.8, 0.2]], [0.5, 0.5])
    rep = nr.smooth_ambiguity_bound(m, 10.0, 50)
    assert rep["achieved_distance"] <= 1.0 + 1e-12
    assert nr.mean_prior(m) == pytest.approx([0.55, 0.45])


def test_quasi_hyperbolic_gamma():
    assert nr.fit_gamma(nr.QuasiHyperbolic(0.9, 0.95)) == pytest.approx(0.95, abs=1e-9)
    rep = nr.theta_discount(nr.QuasiHyperbolic(0.9, 0.95), ts=[1.0, 2.0, 3.0])
    assert rep["value"] == pytest.approx(-math.log(0.9), abs=1e-9)


def test_exact_recovery_exponential():
    rep = nr.exact_recovery(nr.Exponential(0.9), 0.0)
    assert rep["parameters"]["tau"] == 14
    assert rep["parameters"]["gamma"] == pytest.approx(0.9, abs=1e-9)


def test_hull_membership():
    member, idx, w = nr.hull_membership([[0, 0], [1, 0], [0, 1]], [0.25, 0.25])
    assert member and sum(w) == pytest.approx(1.0)
    assert not nr.hull_membership([[0, 0], [1, 0], [0, 1]], [1.0, 1.0])[0]


def test_scenario_round_trip_and_run():
    text = json.dumps({
        "version": 1, "name": "eu", "domain": "risk",
        "model": {"type": "expected_utility", "utilities": [0.0, 0.5, 1.0]},
        "sampler": {"resolution": 20},
    })
    canonical = nr.dump_scenario(text)
    assert nr.dump_scenario(canonical) == canonical
    result = nr.run_scenario(text)
    assert result["exit_code"] == 0
    assert json.loads(result["report"])["all_passed"] is True


def test_unknown_field_rejected():
    bad = json.dumps({"version": 1, "name": "x", "domain": "risk",
                      "model": {"type": "expected_utility", "utilities": [0, 1]}, "colour": 1})
    with pytest.raises(ValueError, match="colour"):
        nr.dump_scenario(bad)


def test_builtins_listed():
    assert set(nr.builtin_names()) == {"allais", "figure1", "smooth-bound", "quasi-hyperbolic"}
