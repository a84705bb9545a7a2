import numpy as np
import pytest

from delayfronts import ModelParams, c_kappa_curve, h_star


@pytest.fixture(scope="session")
def toy12() -> ModelParams:
    return ModelParams.toy(1.2)


def sample_dkappa(rng: np.random.Generator, n: int):
    """Random (h, c) pairs from a representative box inside the
    three-real-roots region: h in [0.1, 3], c in [0.2, min(2.5, 0.8 c_kappa)].
    The 0.8 margin keeps the double-root pinch at the boundary away."""
    params = ModelParams.toy(1.2)
    hs = h_star(-1.0)
    out = []
    while len(out) < n:
        h = rng.uniform(0.1, 3.0)
        c_cap = 2.5 if h <= hs else min(2.5, 0.8 * c_kappa_curve(h, params))
        if c_cap <= 0.2:
            continue
        out.append((float(rng.uniform(0.2, c_cap)), float(h)))
    return out
