import math

import numpy as np
import pytest
from scipy import special as sp

from evfusion.special import digamma, lgamma, trigamma

GRID = np.concatenate([np.geomspace(1e-3, 1, 200), np.linspace(1, 50, 400), [1e3, 1e6, 1e10]])


def test_digamma_at_one_is_minus_euler_gamma():
    assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-13)


def test_digamma_recurrence():
    x = np.linspace(0.1, 20, 101)
    assert np.allclose(digamma(x + 1), digamma(x) + 1 / x, rtol=0, atol=1e-12)


def test_lgamma_matches_factorials():
    for n in range(1, 25):
        assert lgamma(float(n)) == pytest.approx(math.log(math.factorial(n - 1)), abs=1e-12)
    assert lgamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-13)


@pytest.mark.parametrize("ours, ref", [(digamma, sp.digamma), (lgamma, sp.gammaln),
                                       (trigamma, lambda x: sp.polygamma(1, x))])
def test_against_scipy(ours, ref):
    err = np.abs(ours(GRID) - ref(GRID)) / np.maximum(1.0, np.abs(ref(GRID)))
    assert err.max() < 1e-12


def test_trigamma_is_derivative_of_digamma():
    x, h = np.linspace(0.5, 30, 50), 1e-5
    fd = (digamma(x + h) - digamma(x - h)) / (2 * h)
    assert np.allclose(fd, trigamma(x), rtol=1e-7)


def test_scalar_in_scalar_out():
    assert isinstance(digamma(2.0), float)
    assert digamma(np.array([2.0])).shape == (1,)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_rejects_non_positive(bad):
    for fn in (digamma, trigamma, lgamma):
        with pytest.raises(ValueError):
            fn(bad)
