import numpy as np
import pytest

from qgsphere.spharm import SphField, num_coeffs, sph_index


def random_band_field(lmax: int, seed: int, lmin: int = 1, lband: int | None = None) -> SphField:
    """Seeded random field with support on degrees lmin..lband (mean-zero)."""
    lband = lmax if lband is None else lband
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(num_coeffs(lmax))
    for l in range(lmin, lband + 1):
        for m in range(-l, l + 1):
            coeffs[sph_index(l, m)] = rng.standard_normal()
    return SphField(lmax, coeffs)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
