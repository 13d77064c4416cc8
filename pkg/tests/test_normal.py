import math

import mpmath
import numpy as np
import pytest

from shrinkcov.errors import ConfigurationError
from shrinkcov.normal import normal_quantile


def phi(z):
    # erf-based oracle, independent of the rational approximation
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def test_median_is_zero():
    assert normal_quantile(0.5) == 0.0


def test_975_against_high_precision_erfinv():
    mpmath.mp.dps = 40
    exact = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf("0.975") - 1))
    assert normal_quantile(0.975) == pytest.approx(exact, abs=1e-12)
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)


def test_round_trip_grid():
    p = np.linspace(1e-7, 1 - 1e-7, 1000)
    z = normal_quantile(p)
    back = np.array([phi(v) for v in z])
    assert np.max(np.abs(back - p)) < 1e-9


def test_absolute_error_against_mpmath_in_tails():
    mpmath.mp.dps = 40
    for p in (1e-7, 1e-5, 0.01, 0.3, 0.6, 0.999, 1 - 1e-7):
        exact = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))
        assert abs(normal_quantile(p) - exact) < 1e-9


def test_symmetry():
    p = np.linspace(0.001, 0.499, 50)
    np.testing.assert_allclose(normal_quantile(p), -normal_quantile(1 - p), atol=1e-12)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_domain(p):
    with pytest.raises(ConfigurationError):
        normal_quantile(p)
