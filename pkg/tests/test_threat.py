import numpy as np
import pytest

from pacesim import (
    ConfigurationError,
    RiskMatrixBin,
    ThreatScore,
    ValidationError,
    base_cost,
    base_transition_probability,
    nasa_lookup,
    normalize_cvss,
)

TOL = 1e-12


@pytest.mark.parametrize("score,expected", [(7.5, 0.75), (0.0, 0.0), (10.0, 1.0)])
def test_normalize_cvss(score, expected):
    result = normalize_cvss(score)
    assert abs(result.value - expected) <= TOL


@pytest.mark.parametrize("score", [-0.1, 10.5, 100.0])
def test_normalize_cvss_rejects_out_of_range(score):
    with pytest.raises(ValidationError, match=str(score)):
        normalize_cvss(score)


@pytest.mark.parametrize(
    "likelihood,severity,expected",
    [(5, 5, 1.0), (1, 1, 0.04), (3, 4, 0.48)],
)
def test_nasa_lookup(likelihood, severity, expected):
    result = nasa_lookup(RiskMatrixBin(likelihood, severity))
    assert abs(result.value - expected) <= TOL


@pytest.mark.parametrize("likelihood,severity", [(0, 3), (6, 3), (3, 0), (3, 6), (2.5, 3)])
def test_nasa_bin_rejects_bad_levels(likelihood, severity):
    with pytest.raises(ValidationError):
        RiskMatrixBin(likelihood, severity)


@pytest.mark.parametrize(
    "rho,p_max,expected",
    [(0.48, 0.5, 0.24), (0.0, 0.9, 0.0), (1.0, 0.35, 0.35)],
)
def test_base_transition_probability(rho, p_max, expected):
    assert abs(base_transition_probability(ThreatScore(rho), p_max) - expected) <= TOL


@pytest.mark.parametrize("p_max", [0.0, 1.0, -0.2, 1.5])
def test_base_transition_probability_rejects_bad_cap(p_max):
    with pytest.raises(ConfigurationError):
        base_transition_probability(ThreatScore(0.5), p_max)


@pytest.mark.parametrize(
    "w_from,w_to,scale,expected",
    [(1.0, 0.7, 10.0, 3.0), (0.7, 0.7, 10.0, 0.0), (0.4, 1.0, 10.0, 0.0)],
)
def test_base_cost(w_from, w_to, scale, expected):
    assert abs(base_cost(w_from, w_to, scale) - expected) <= TOL


def test_base_cost_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        base_cost(1.5, 0.5, 10.0)
    with pytest.raises(ConfigurationError):
        base_cost(1.0, 0.5, 0.0)


def test_threat_score_bounds():
    with pytest.raises(ValidationError):
        ThreatScore(1.01)
    with pytest.raises(ValidationError):
        ThreatScore(-0.01)


def test_normalized_scores_stay_in_unit_interval():
    rng = np.random.default_rng(101)
    for _ in range(1000):
        assert 0.0 <= normalize_cvss(rng.uniform(0, 10)).value <= 1.0
        cell = RiskMatrixBin(int(rng.integers(1, 6)), int(rng.integers(1, 6)))
        assert 0.0 <= nasa_lookup(cell).value <= 1.0


def test_nasa_lookup_monotone_in_each_level():
    for fixed in range(1, 6):
        likelihood_scores = [nasa_lookup(RiskMatrixBin(l, fixed)).value for l in range(1, 6)]
        severity_scores = [nasa_lookup(RiskMatrixBin(fixed, s)).value for s in range(1, 6)]
        assert likelihood_scores == sorted(likelihood_scores)
        assert severity_scores == sorted(severity_scores)


def test_base_transition_probability_linear_and_capped():
    rng = np.random.default_rng(102)
    for _ in range(1000):
        rho = rng.uniform(0, 1)
        p_max = rng.uniform(0.01, 0.99)
        p = base_transition_probability(ThreatScore(rho), p_max)
        assert p <= p_max + 1e-12
        doubled = base_transition_probability(ThreatScore(min(1.0, 2 * rho)), p_max)
        if 2 * rho <= 1.0:
            assert abs(doubled - 2 * p) <= TOL


def test_base_cost_zero_iff_no_utility_loss():
    rng = np.random.default_rng(103)
    for _ in range(1000):
        w_from, w_to = rng.uniform(0, 1, size=2)
        cost = base_cost(w_from, w_to, 10.0)
        assert cost >= 0.0
        if w_to >= w_from:
            assert cost == 0.0
        else:
            assert cost > 0.0
