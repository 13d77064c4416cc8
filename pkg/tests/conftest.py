import numpy as np
import pytest

from shrinkcov.panel import ReturnsPanel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_panel(rng, n, d, scale=1.0):
    return ReturnsPanel(scale * rng.standard_normal((n, d)))


@pytest.fixture
def make_panel(rng):
    def _make(n, d, scale=1.0):
        return random_panel(rng, n, d, scale)
    return _make


def random_spd(rng, d, cond=None):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lam = rng.uniform(0.5, 5.0, d) if cond is None else np.geomspace(1.0, cond, d)
    return (q * lam) @ q.T, lam
