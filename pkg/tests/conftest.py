import numpy as np
import pytest

from statespec import EigenCoefficients


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_eig(rng, k=6, j=4, m=2, scale=1.0):
    """Random eigen-coefficient block with circularly symmetric entries."""
    coeffs = scale * (
        rng.standard_normal((k, j, m)) + 1j * rng.standard_normal((k, j, m))
    )
    return EigenCoefficients(
        coeffs=coeffs,
        frequencies_hz=np.arange(j, dtype=float),
        window_times_s=np.arange(k, dtype=float),
    )
