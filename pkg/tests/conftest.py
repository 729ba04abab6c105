import pytest

from adiabatic_eta.surface import SurfaceData, classes_from_lengths


@pytest.fixture
def genus2():
    return SurfaceData(2, 0)


@pytest.fixture
def sphere4():
    """Four cusps, two of them spin-trivial."""
    return SurfaceData(0, 4).with_kappa_t(2)


@pytest.fixture
def torus3():
    """Three cusps, one spin-trivial."""
    return SurfaceData(1, 3).with_kappa_t(1)


@pytest.fixture
def one_class():
    return classes_from_lengths([1.5])
