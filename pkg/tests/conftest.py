import math

import pytest

from isospec import (
    CPRSPotential,
    Deformation,
    HarmonicOscillator,
    MorsePotential,
    SquareWell,
)


@pytest.fixture(scope="session")
def oscillator():
    return HarmonicOscillator()


@pytest.fixture(scope="session")
def morse():
    return MorsePotential()


@pytest.fixture(scope="session")
def well():
    return SquareWell()  # width pi


@pytest.fixture(scope="session")
def cprs():
    return CPRSPotential()


@pytest.fixture(scope="session")
def morse_family(morse):
    """The worked Morse example: seed level 0, paper-scale parameter 5."""
    seed = morse.eigenstate(0)
    return Deformation.from_eigenstate(seed, 5.0, c_scale="paper")


@pytest.fixture(scope="session")
def well_family(well):
    """The worked well example: seed level 1, paper-scale parameter 1."""
    seed = well.eigenstate(1)
    return Deformation.from_eigenstate(seed, 1.0, c_scale="paper")


@pytest.fixture(scope="session")
def cprs_family(cprs):
    """The worked CPRS example: seed level 0, paper-scale parameter 1.8."""
    seed = cprs.eigenstate(0)
    return Deformation.from_eigenstate(seed, 1.8, c_scale="paper")


@pytest.fixture(scope="session")
def oscillator_family(oscillator):
    seed = oscillator.eigenstate(0)
    return Deformation.from_eigenstate(seed, 2.0)


SQRT_PI = math.sqrt(math.pi)
