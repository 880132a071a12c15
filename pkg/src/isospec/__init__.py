"""Isospectral families of one-dimensional Schroedinger potentials.

Build one- and multi-parameter deformations of exactly solvable potentials
that leave the bound-state spectrum untouched, and verify every family
member against an independent finite-difference eigensolver.
"""

from .catalog import (
    CATALOG,
    BasePotential,
    CPRSPotential,
    EigenState,
    GroundStateAnnihilatedError,
    HarmonicOscillator,
    LadderDescriptor,
    MorsePotential,
    NoSuchBoundStateError,
    SquareWell,
    apply_ladder,
    make_potential,
    partner_potentials,
    superpotential,
    superpotential_derivative,
)
from .factorize import (
    AffineCMap,
    BosonicFeasibilityReport,
    ChainResult,
    Deformation,
    DeformedState,
    SingularCError,
    UseMissingStateError,
    ValidityInterval,
    bosonic_feasibility,
    composite_ladder,
    deform_chain,
    paper_c_map,
    validity_interval,
)
from .grid import (
    Grid,
    GridFunction,
    GridMismatchError,
    ZeroNormError,
    count_nodes,
    cumulative_integral,
    derivative,
    inner_product,
    normalize,
)
from .spectral import (
    FdHamiltonian,
    SolverError,
    SpectrumReport,
    assemble,
    compare_spectra,
    eigenvector_overlap,
    lowest_eigenpairs,
)

__version__ = "0.1.0"

__all__ = [
    "AffineCMap",
    "BasePotential",
    "BosonicFeasibilityReport",
    "CATALOG",
    "CPRSPotential",
    "ChainResult",
    "Deformation",
    "DeformedState",
    "EigenState",
    "FdHamiltonian",
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "GroundStateAnnihilatedError",
    "HarmonicOscillator",
    "LadderDescriptor",
    "MorsePotential",
    "NoSuchBoundStateError",
    "SingularCError",
    "SolverError",
    "SpectrumReport",
    "SquareWell",
    "UseMissingStateError",
    "ValidityInterval",
    "ZeroNormError",
    "apply_ladder",
    "assemble",
    "bosonic_feasibility",
    "compare_spectra",
    "composite_ladder",
    "count_nodes",
    "cumulative_integral",
    "deform_chain",
    "derivative",
    "eigenvector_overlap",
    "inner_product",
    "lowest_eigenpairs",
    "make_potential",
    "normalize",
    "paper_c_map",
    "partner_potentials",
    "superpotential",
    "superpotential_derivative",
    "validity_interval",
]
