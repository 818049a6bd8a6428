import numpy as np
import pytest
from hypothesis import settings

from qlm.sphere_metrics import AxisymMetricSpec

settings.register_profile("qlm", max_examples=60, deadline=None)
settings.load_profile("qlm")


def bump(eps: float, r_o: float = 1.0) -> AxisymMetricSpec:
    """``w = 1 + eps (1 - x^2)``; ``r_o^2 K = 1 + eps (2 - 6 x^2)``."""
    return AxisymMetricSpec.from_poly(r_o, [1.0 + eps, 0.0, -eps])


def convex_samples(n: int = 20, seed: int = 7, amp: float = 0.06):
    """Deterministic convex, embeddable axisymmetric metrics."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b, c = amp * rng.uniform(-1.0, 1.0, 3)
        r_o = float(rng.uniform(0.5, 3.0))
        # w = 1 + (1 - x^2)(a + b x + c x^2)
        coeffs = [1.0 + a, b, c - a, -b, -c]
        g = AxisymMetricSpec.from_poly(r_o, coeffs)
        x = np.linspace(-1, 1, 2001)
        if g.curvature_scaled(x).min() > 0.2:
            out.append(g)
    return out


@pytest.fixture
def sample_metric():
    return bump(0.1)


@pytest.fixture(scope="session")
def convex_metrics():
    return convex_samples()
