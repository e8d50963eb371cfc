import numpy as np
import pytest

import monofield as mf


@pytest.fixture
def natural():
    """Natural units: hbar = c = V = 1."""
    return mf.FieldConfig()


@pytest.fixture
def mixed_modes():
    """Three propagating modes with mixed directions and polarizations."""
    return (
        mf.mode(+1, (0.0, 0.0, 1.0)),
        mf.mode(-1, (0.0, 2.0, 0.0)),
        mf.mode(+1, (1.0, 1.0, 0.0)),
    )


@pytest.fixture
def two_tone_layout():
    """Two direction-free modes with omega = 1, 2 (the workhorse small layout)."""
    return mf.build_layout([mf.abstract_mode(1.0), mf.abstract_mode(2.0)], 3)


def random_state(layout, rng):
    amps = rng.normal(size=layout.dimension) + 1j * rng.normal(size=layout.dimension)
    return mf.StateVector(layout, amps).normalize()


def random_hermitian(layout, rng):
    m = rng.normal(size=(layout.dimension,) * 2) \
        + 1j * rng.normal(size=(layout.dimension,) * 2)
    return mf.Operator(layout, 0.5 * (m + m.conj().T))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
