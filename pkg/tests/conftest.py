import numpy as np
import pytest

from thinslip.geometry import Domain, Grid3, HeightField
from thinslip.presets import make_forcing

I2 = [[1.0, 0.0], [0.0, 1.0]]


def interval_grid(n=32, nz=16, periodic=True, h=1.0):
    dom = Domain(lo=(0.0,), hi=(1.0,), n=(n,), periodic=periodic)
    hf = HeightField.from_preset(dom, "constant", [h])
    return Grid3(hf, nz)


def square_grid(nx=12, ny=None, nz=8, h=1.0):
    ny = ny if ny is not None else nx
    dom = Domain(lo=(0.0, 0.0), hi=(1.0, 1.0), n=(nx, ny), periodic=False)
    hf = HeightField.from_preset(dom, "constant", [h])
    return Grid3(hf, nz)


def ring_forcing(c0=1.0, c1=1.0):
    return make_forcing("rotational", [c0, c1], (0.0,), (1.0,))


def vortex_forcing(w=1.0):
    return make_forcing("rotational", [w], (0.0, 0.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
