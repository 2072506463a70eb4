import numpy as np
import pytest
from scipy.integrate import quad

from nflab import FiringRate, check_hypotheses, f_eval, f_inverse, primitive_of_inverse
from nflab.firing import SampleSpec

from conftest import PHI_HALF, PHI_S_STAR, S_STAR


@pytest.fixture(scope="module")
def fr():
    return FiringRate()


def test_values_at_origin(fr):
    assert f_eval(fr, 0.0) == 0.5
    assert f_eval(fr, 0.0, 1) == 0.25
    assert f_eval(fr, 0.0, 2) == 0.0


def test_stable_for_large_arguments(fr):
    for x in (-800.0, 800.0):
        assert 0.0 <= f_eval(fr, x) <= 1.0
        assert np.isfinite(f_eval(fr, x, 1))
        assert np.isfinite(f_eval(fr, x, 2))


def test_gain_and_threshold():
    fr = FiringRate(beta=12.0, theta=0.55)
    assert f_eval(fr, 0.55) == 0.5
    assert f_eval(fr, 0.55, 1) == pytest.approx(3.0, abs=1e-14)
    assert fr.k1 == 3.0


def test_beta_must_be_positive():
    with pytest.raises(ValueError):
        FiringRate(beta=0.0)


def test_inverse_at_half(fr):
    assert f_inverse(fr, 0.5) == 0.0


def test_inverse_round_trips(fr):
    assert f_inverse(fr, f_eval(fr, 1.283)) == pytest.approx(1.283, abs=1e-10)
    for s in np.linspace(1e-6, 1 - 1e-6, 21):
        assert f_eval(fr, f_inverse(fr, s)) == pytest.approx(s, abs=1e-12)
    for x in np.linspace(-15, 15, 21):
        assert f_inverse(fr, f_eval(fr, x)) == pytest.approx(x, abs=1e-9)
    # past |x| ~ 16 the sigmoid saturates in doubles and 1 - f(x) carries
    # only ~ulp(1)*exp(|x|) of information; the round trip degrades to that
    # floor no matter how the inverse is computed
    for x in np.linspace(-30, 30, 21):
        assert f_inverse(fr, f_eval(fr, x)) == pytest.approx(
            x, abs=2.0 * 1.2e-16 * np.exp(abs(x)) + 1e-9)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.1, 1.1])
def test_inverse_domain_errors(fr, s):
    with pytest.raises(ValueError):
        f_inverse(fr, s)


def test_primitive_endpoints(fr):
    assert primitive_of_inverse(fr, 0.0) == 0.0
    assert primitive_of_inverse(fr, 1.0) == 0.0


def test_primitive_reference_values(fr):
    assert primitive_of_inverse(fr, 0.5) == pytest.approx(PHI_HALF, abs=1e-14)
    assert primitive_of_inverse(fr, S_STAR) == pytest.approx(PHI_S_STAR, abs=1e-12)
    grid = np.linspace(0.0, 1.0, 10001)
    sup = np.max(np.abs(primitive_of_inverse(fr, grid)))
    assert sup == pytest.approx(np.log(2.0), abs=1e-12)


def test_primitive_against_quadrature(fr):
    for s in (0.05, 0.3, 0.5, 0.78, 0.97):
        ref, _ = quad(lambda r: f_inverse(fr, r), 0.0, s, epsabs=1e-13, epsrel=1e-13)
        assert primitive_of_inverse(fr, s) == pytest.approx(ref, abs=1e-10)


def test_primitive_with_threshold():
    fr = FiringRate(beta=2.0, theta=0.7)
    for s in (0.2, 0.5, 0.9):
        ref, _ = quad(lambda r: f_inverse(fr, r), 0.0, s, epsabs=1e-13, epsrel=1e-13)
        assert primitive_of_inverse(fr, s) == pytest.approx(ref, abs=1e-10)


def test_primitive_derivative_is_inverse(fr):
    eps = 1e-6
    for s in np.linspace(0.01, 0.99, 25):
        fd = (primitive_of_inverse(fr, s + eps) - primitive_of_inverse(fr, s - eps)) / (2 * eps)
        assert fd == pytest.approx(f_inverse(fr, s), abs=1e-6)


def test_lipschitz_bound(fr):
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-40, 40, 200), rng.uniform(-40, 40, 200)
    lhs = np.abs(f_eval(fr, x) - f_eval(fr, y))
    assert np.all(lhs <= fr.k1 * np.abs(x - y) + 1e-14)


def test_linear_growth_bound(fr):
    assert fr.k2 == 0.5
    rng = np.random.default_rng(1)
    x = rng.uniform(-100, 100, 500)
    assert np.all(np.abs(f_eval(fr, x)) <= fr.k1 * np.abs(x) + fr.k2 + 1e-14)


def test_hypotheses_pass_for_reference_rate(fr):
    report = check_hypotheses(fr)
    assert report.all_passed
    by_name = {c.name: c for c in report.checks}
    assert by_name["H1"].measured["sup_fprime"] == pytest.approx(0.25, abs=1e-6)
    assert by_name["H1"].bound["k1_loose"] == 1.0
    assert by_name["H2"].measured["sup_abs_phi"] == pytest.approx(np.log(2), abs=1e-9)
    assert by_name["H4"].measured["sup_abs_fsecond"] < 3.0


def test_hypotheses_pass_for_steep_gain():
    report = check_hypotheses(FiringRate(beta=12.0, theta=0.55))
    assert report.all_passed
    by_name = {c.name: c for c in report.checks}
    assert by_name["H1"].measured["sup_fprime"] == pytest.approx(3.0, abs=1e-5)
    assert "k1_loose" not in by_name["H1"].bound


def test_non_monotone_rule_fails_h2():
    report = check_hypotheses(np.sin, SampleSpec(lo=-6.0, hi=6.0, count=2000))
    by_name = {c.name: c for c in report.checks}
    assert not by_name["H2"].passed
    assert not report.all_passed


def test_report_json_round_trip(fr):
    import json

    payload = json.loads(check_hypotheses(fr).to_json())
    assert payload["all_passed"] is True
    assert {c["hypothesis"] for c in payload["checks"]} == {"H1", "H2", "H4"}
    for c in payload["checks"]:
        assert set(c) == {"hypothesis", "pass", "measured", "bound", "tolerance"}


def test_report_reproducible(fr):
    a = check_hypotheses(fr, SampleSpec(seed=5)).to_json()
    b = check_hypotheses(fr, SampleSpec(seed=5)).to_json()
    assert a == b
