import numpy as np
import pytest

from laxlab.fields import (
    COEFF_NAMES,
    CoefficientSet,
    GridSpec,
    ScalarField,
    SecondFormCoeffs,
    sample_family,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def small_grid():
    return GridSpec(-1.0, 1.0, 0.0, 1.0, 9, 7)


def kink_grid(n, x_min=-2.0, x_max=2.0, t_min=0.0, t_max=1.0):
    return GridSpec(x_min, x_max, t_min, t_max, n, n)


def kink_scenario(n, v=0.0, x0=0.0):
    return sample_family({"name": "sine_gordon_kink", "v": v, "x0": x0}, kink_grid(n))


def constant_scenario(grid, **values):
    return sample_family({"name": "constant", **values}, grid)


def random_scenario(grid, rng, scale=1.0):
    """Nine independent sampled fields with no closed forms."""
    f = {n: ScalarField(grid, scale * rng.normal(size=grid.shape))
         for n in COEFF_NAMES + ("h11", "h22", "h")}
    c = CoefficientSet(**{n: f[n] for n in COEFF_NAMES})
    s = SecondFormCoeffs(f["h11"], f["h22"], f["h"])
    return c, s
