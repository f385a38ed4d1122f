import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from shared.kpz_lab import airy
from shared.kpz_lab.exceptions import ValidationError


def reference(x):
    ai, ai_prime, _, _ = scipy.special.airy(x)
    return ai, ai_prime


def test_matches_reference_on_supported_range():
    x = np.linspace(airy.X_MIN, airy.X_MAX, 1201)
    ai, ai_prime = airy.airy(x)
    expected_ai, expected_prime = reference(x)
    assert np.max(np.abs(ai - expected_ai)) < 1e-10
    assert np.max(np.abs(ai_prime - expected_prime)) < 1e-9


@pytest.mark.parametrize('x', [airy.SERIES_LEFT, airy.SERIES_RIGHT])
def test_branch_boundaries_agree(x):
    for point in (x - 1e-9, x, x + 1e-9):
        assert airy.ai(point) == pytest.approx(reference(point)[0], abs=1e-10)


def test_values_at_origin():
    assert airy.ai(0.0) == pytest.approx(airy.AI_0, abs=1e-15)
    assert airy.ai_prime(0.0) == pytest.approx(airy.AI_PRIME_0, abs=1e-15)
    assert isinstance(airy.ai(0.0), float)


def test_evaluate():
    value = airy.evaluate(1.0)
    assert value.x == 1.0
    assert value.ai == pytest.approx(0.1352924163128814, abs=1e-12)
    assert value.ai_prime == pytest.approx(-0.1591474412967932, abs=1e-12)


def test_array_shape_preserved():
    x = np.zeros((3, 4))
    assert airy.ai(x).shape == (3, 4)
    assert airy.ai_prime_scaled(x).shape == (3, 4)


def test_airy_equation_residual():
    h = 1e-3
    x = -10.0 + h * np.arange(-2, 18003)
    f = airy.ai(x)
    second = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    assert x[2] == -10.0 and x[-3] == pytest.approx(8.0)
    assert np.max(np.abs(second - x[2:-2] * f[2:-2])) < 1e-6


def test_series_weight():
    assert airy.series_weight(airy.SERIES_LEFT) == 1.0
    assert airy.series_weight(airy.SERIES_RIGHT) == 1.0
    assert airy.series_weight(airy.SERIES_LEFT - airy.BLEND) == 0.0
    assert airy.series_weight(airy.SERIES_RIGHT + airy.BLEND) == 0.0
    assert 0.0 < airy.series_weight(airy.SERIES_LEFT - airy.BLEND / 2) < 1.0


def test_scaled_variant_on_the_right():
    x = np.linspace(0.0, 60.0, 301)
    expected = scipy.special.airye(x)[0]
    assert np.allclose(airy.ai_scaled(x), expected, rtol=1e-6, atol=0)


def test_scaled_variant_unscaled_on_the_left():
    x = np.linspace(-20.0, 0.0, 41)
    assert np.array_equal(airy.ai_scaled(x), airy.ai(x))


def test_unbounded_beyond_range():
    assert airy.ai_unbounded(40.0) == pytest.approx(reference(40.0)[0], rel=1e-6)
    assert airy.ai_unbounded(400.0) == 0.0


@pytest.mark.parametrize('x', [airy.X_MAX + 1.0, airy.X_MIN - 1.0, np.nan, np.inf])
def test_rejects_out_of_range(x):
    with pytest.raises(ValidationError):
        airy.ai(x)


def test_scaled_variant_extends_left_of_range():
    x = np.array([airy.X_MIN - 0.5, -60.0, -100.0])
    assert np.max(np.abs(airy.ai_scaled(x) - reference(x)[0])) < 1e-9
    assert airy.ai_unbounded(-45.0) == pytest.approx(reference(-45.0)[0], abs=1e-9)


def test_scaled_rejects_non_finite():
    with pytest.raises(ValidationError):
        airy.ai_scaled(-np.inf)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=airy.X_MIN, max_value=airy.X_MAX))
def test_pointwise_against_reference(x):
    assert abs(airy.ai(x) - reference(x)[0]) < 1e-10
