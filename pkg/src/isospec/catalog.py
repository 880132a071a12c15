"""Exactly solvable base potentials: spectra, eigenfunctions, ladder operators.

Four families are provided, all in hbar = 2m = 1 units with the Hamiltonian
H = -d^2/dx^2 + V(x) and the zero of energy fixed at the ground state:

* harmonic oscillator      V = x^2 - 1,                    E_k = 2k
* Morse                    V = A^2 - B(2A+a)e^{-ax} + B^2 e^{-2ax},
                                                           E_k = k a (2A - k a)
* infinite square well     V = -pi^2/L^2 on [0, L],        E_k = k(k+2) pi^2/L^2
* CPRS                     V = x^2 + 3 + 8(2x^2-1)/(2x^2+1)^2,
                                                           E_0 = 0, E_k = 2k + 4

Each family supplies analytic eigenfunctions together with their first and
second derivatives (Hermite / associated-Laguerre evaluations for the
polynomial families), so that superpotentials, partner potentials and
ladder images can be formed without numerical differentiation.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, eval_hermite

from .grid import Grid, GridFunction, inner_product

# Polynomial recurrences stay accurate in double precision up to this level;
# higher indices are rejected rather than silently degraded.
MAX_LEVEL = 12


class NoSuchBoundStateError(LookupError):
    """Requested level does not exist (or exceeds the supported cap)."""


class GroundStateAnnihilatedError(ValueError):
    """A ladder operator was asked to step off the bottom of its tower."""


@dataclass(frozen=True)
class LadderDescriptor:
    """What kind of ladder a potential carries, plus family metadata."""

    kind: str
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class EigenState:
    """A normalized bound state with analytic first/second derivatives."""

    potential: "BasePotential"
    level: int
    energy: float
    wavefunction: GridFunction
    derivative: GridFunction
    second_derivative: GridFunction

    @property
    def grid(self) -> Grid:
        return self.wavefunction.grid


class BasePotential(ABC):
    """Common interface of the catalog families."""

    name: str = ""
    #: number of bound states, or None when the ladder is unbounded
    bound_count: int | None = None

    @property
    def parameters(self) -> dict:
        return {}

    @abstractmethod
    def default_grid(self) -> Grid:
        ...

    @abstractmethod
    def potential(self, grid: Grid) -> GridFunction:
        ...

    @abstractmethod
    def eigenvalue(self, k: int) -> float:
        ...

    @abstractmethod
    def _state_arrays(self, k: int, x: np.ndarray):
        """Unnormalized (psi, psi', psi'') samples of level k."""

    @property
    def ladder(self) -> LadderDescriptor:
        return LadderDescriptor("none")

    #: continuum threshold for spectrum comparisons (None: no continuum
    #: below any practical verification level on the recommended box)
    continuum_threshold: float | None = None

    def _check_level(self, k: int):
        if k < 0:
            raise NoSuchBoundStateError(f"negative level {k}")
        if self.bound_count is not None and k >= self.bound_count:
            raise NoSuchBoundStateError(
                f"{self.name} has {self.bound_count} bound states; level {k} "
                "does not exist"
            )

    def eigenstate(self, k: int, grid: Grid | None = None) -> EigenState:
        """Normalized level-k bound state on `grid` (default recommended)."""
        self._check_level(k)
        if k > MAX_LEVEL:
            raise NoSuchBoundStateError(
                f"level {k} exceeds the supported cap {MAX_LEVEL}"
            )
        g = grid or self.default_grid()
        psi, dpsi, d2psi = self._state_arrays(k, g.points)
        f = GridFunction(g, psi)
        nrm = math.sqrt(inner_product(f, f))  # defining formulas fix the sign
        return EigenState(
            potential=self,
            level=k,
            energy=self.eigenvalue(k),
            wavefunction=GridFunction(g, psi / nrm),
            derivative=GridFunction(g, dpsi / nrm),
            second_derivative=GridFunction(g, d2psi / nrm),
        )


def _hermite_triplet(k: int, x: np.ndarray):
    """H_k, H_{k-1}, H_{k-2} (physicists' convention)."""
    hk = eval_hermite(k, x)
    hk1 = eval_hermite(k - 1, x) if k >= 1 else np.zeros_like(x)
    hk2 = eval_hermite(k - 2, x) if k >= 2 else np.zeros_like(x)
    return hk, hk1, hk2


def _gauss_hermite_arrays(m: int, x: np.ndarray):
    """(phi, phi', phi'') for phi = H_m(x) exp(-x^2/2), unnormalized."""
    hm, hm1, _ = _hermite_triplet(m, x)
    e = np.exp(-0.5 * x * x)
    dh = 2 * m * hm1
    phi = hm * e
    dphi = (dh - x * hm) * e
    # phi'' = (x^2 - 1 - 2m) phi  (Hermite ODE)
    d2phi = (x * x - 1.0 - 2.0 * m) * phi
    return phi, dphi, d2phi


class HarmonicOscillator(BasePotential):
    """V = x^2 - 1 (frequency-2 convention), evenly spaced levels E_k = 2k."""

    name = "oscillator"
    bound_count = None

    def default_grid(self) -> Grid:
        return Grid(-8.0, 8.0, 16001)

    def potential(self, grid: Grid) -> GridFunction:
        return GridFunction(grid, grid.points**2 - 1.0)

    def eigenvalue(self, k: int) -> float:
        self._check_level(k)
        return 2.0 * k

    def _state_arrays(self, k: int, x: np.ndarray):
        return _gauss_hermite_arrays(k, x)

    @property
    def ladder(self) -> LadderDescriptor:
        return LadderDescriptor(
            "oscillator-annihilation",
            {"lowering": "d/dx + x", "raising": "-d/dx + x"},
        )

    def _ladder_image(self, k, psi, dpsi, grid, direction):
        x = grid.points
        if direction == "up":
            return -dpsi + x * psi
        return dpsi + x * psi


class MorsePotential(BasePotential):
    """Morse well with a finite ladder of levels E_k = k*a*(2A - k*a), k*a < A."""

    name = "morse"

    def __init__(self, A: float = 2.0, B: float = 1.0, alpha: float = 1.0):
        if min(A, B, alpha) <= 0:
            raise ValueError("Morse parameters A, B, alpha must be positive")
        self.A = float(A)
        self.B = float(B)
        self.alpha = float(alpha)
        # largest k with k*alpha < A
        self.bound_count = int(math.ceil(self.A / self.alpha - 1e-12))
        # numeric spectra are only trusted below the continuum at V(+inf)=A^2
        self.continuum_threshold = self.A**2 - 0.5

    @property
    def parameters(self) -> dict:
        return {"A": self.A, "B": self.B, "alpha": self.alpha}

    def default_grid(self) -> Grid:
        return Grid(-4.0, 14.0, 16001)

    def potential(self, grid: Grid) -> GridFunction:
        x = grid.points
        ex = np.exp(-self.alpha * x)
        v = self.A**2 - self.B * (2 * self.A + self.alpha) * ex + self.B**2 * ex**2
        return GridFunction(grid, v)

    def eigenvalue(self, k: int) -> float:
        self._check_level(k)
        return k * self.alpha * (2 * self.A - k * self.alpha)

    def _y(self, x: np.ndarray) -> np.ndarray:
        return (2 * self.B / self.alpha) * np.exp(-self.alpha * x)

    def _state_arrays(self, k: int, x: np.ndarray):
        # psi_k(y) = y^{s-k} e^{-y/2} L_k^{(2s-2k)}(y),  y = (2B/a) e^{-a x}
        s = self.A / self.alpha
        a = 2 * s - 2 * k
        y = self._y(x)
        lk = eval_genlaguerre(k, a, y)
        dl = -eval_genlaguerre(k - 1, a + 1, y) if k >= 1 else np.zeros_like(y)
        d2l = eval_genlaguerre(k - 2, a + 2, y) if k >= 2 else np.zeros_like(y)
        p = y ** (s - k) * np.exp(-y / 2)
        c1 = (s - k) / y - 0.5
        c2 = (s - k) * (s - k - 1) / y**2 - (s - k) / y + 0.25
        psi = p * lk
        psi_y = p * (c1 * lk + dl)
        psi_yy = p * (c2 * lk + 2 * c1 * dl + d2l)
        # x-derivatives via dy/dx = -alpha*y
        dpsi = -self.alpha * y * psi_y
        d2psi = self.alpha**2 * y * (psi_y + y * psi_yy)
        return psi, dpsi, d2psi

    @property
    def ladder(self) -> LadderDescriptor:
        return LadderDescriptor(
            "morse-laguerre",
            {
                "s": self.A / self.alpha,
                "variable": "y = (2B/alpha) exp(-alpha x)",
                "note": "shift index follows the level of the input state; "
                "proportionality constants are measured, not asserted",
            },
        )

    def _ladder_image(self, k, psi, dpsi, grid, direction):
        s = self.A / self.alpha
        y = self._y(grid.points)
        psi_y = -dpsi / (self.alpha * y)
        if direction == "up":
            return psi_y + (s - k) / y * psi - (s + 0.5) / (2 * s - 2 * k - 1) * psi
        return -(psi_y - (s - k) / y * psi + (s + 0.5) / (2 * s - 2 * k + 1) * psi)


class SquareWell(BasePotential):
    """Infinite square well of width L, floor at -pi^2/L^2 so that E_0 = 0."""

    name = "well"
    bound_count = None

    def __init__(self, L: float = math.pi):
        if L <= 0:
            raise ValueError("well width L must be positive")
        self.L = float(L)

    @property
    def parameters(self) -> dict:
        return {"L": self.L}

    def default_grid(self) -> Grid:
        return Grid(0.0, self.L, 8001)

    def potential(self, grid: Grid) -> GridFunction:
        return GridFunction(grid, np.full(grid.n_points, -math.pi**2 / self.L**2))

    def eigenvalue(self, k: int) -> float:
        self._check_level(k)
        return k * (k + 2) * math.pi**2 / self.L**2

    def _state_arrays(self, k: int, x: np.ndarray):
        th = (k + 1) * math.pi / self.L
        psi = np.sin(th * x)
        return psi, th * np.cos(th * x), -(th**2) * psi

    def eigenstate(self, k: int, grid: Grid | None = None) -> EigenState:
        self._check_level(k)
        g = grid or self.default_grid()
        psi, dpsi, d2psi = self._state_arrays(k, g.points)
        nrm = math.sqrt(self.L / 2)  # exact; trig states need no cap
        return EigenState(self, k, self.eigenvalue(k),
                          GridFunction(g, psi / nrm),
                          GridFunction(g, dpsi / nrm),
                          GridFunction(g, d2psi / nrm))

    @property
    def ladder(self) -> LadderDescriptor:
        return LadderDescriptor(
            "well-number-operator",
            {"action": "M- psi_k = k psi_{k-1};  M+ psi_k = (k+1) psi_{k+1}",
             "note": "the number operator acts by level index"},
        )

    def _ladder_image(self, k, psi, dpsi, grid, direction):
        x = grid.points
        c = np.cos(math.pi * x / self.L)
        sn = np.sin(math.pi * x / self.L)
        if direction == "up":
            return (k + 1) * c * psi + (self.L / math.pi) * sn * dpsi
        if k == 0:
            return np.zeros_like(psi)  # k-factor kills the image exactly
        return ((k + 1) * c * psi - (self.L / math.pi) * sn * dpsi) * (k / (k + 1))


class CPRSPotential(BasePotential):
    """The non-polynomial CPRS well x^2 + 3 + 8(2x^2-1)/(2x^2+1)^2.

    Its ground state sits at zero energy and the remaining levels follow the
    oscillator rule E_k = 2k + 4: the potential is the partner of x^2 + 5
    under the first-order operator pair built from the ground state.  Excited
    states are produced here by applying that raising operator
    -d/dx + x + 4x/(2x^2+1) to Gauss-Hermite oscillator states.
    """

    name = "cprs"
    bound_count = None

    def default_grid(self) -> Grid:
        return Grid(-8.0, 8.0, 16001)

    def potential(self, grid: Grid) -> GridFunction:
        x = grid.points
        q = 2 * x * x + 1
        return GridFunction(grid, x * x + 3 + 8 * (2 * x * x - 1) / q**2)

    def eigenvalue(self, k: int) -> float:
        self._check_level(k)
        return 0.0 if k == 0 else 2.0 * k + 4.0

    @staticmethod
    def _w(x: np.ndarray):
        """Ground-state superpotential and its two derivatives."""
        q = 2 * x * x + 1
        w = x + 4 * x / q
        wp = 1 + (4 - 8 * x * x) / q**2
        wpp = (32 * x**3 - 48 * x) / q**3
        return w, wp, wpp

    def _state_arrays(self, k: int, x: np.ndarray):
        q = 2 * x * x + 1
        if k == 0:
            e = np.exp(-0.5 * x * x)
            psi = e / q
            dpsi = -x * (2 * x * x + 5) * e / q**2
            # direct second derivative of e^{-x^2/2}/q (no eigen-equation)
            g = 1 / q + 4 / q**2
            d2psi = e * ((x * x - 1) * g + 4 * x * x / q**2 + 32 * x * x / q**3)
            return psi, dpsi, d2psi
        # k >= 1: apply the raising operator to the oscillator state m = k-1
        m = k - 1
        phi, dphi, d2phi = _gauss_hermite_arrays(m, x)
        d3phi = 2 * x * phi + (x * x - 1.0 - 2.0 * m) * dphi
        w, wp, wpp = self._w(x)
        psi = -dphi + w * phi
        dpsi = -d2phi + wp * phi + w * dphi
        d2psi = -d3phi + wpp * phi + 2 * wp * dphi + w * d2phi
        return psi, dpsi, d2psi

    @property
    def ladder(self) -> LadderDescriptor:
        return LadderDescriptor(
            "cprs-composite",
            {
                "raising": "T' a' T with T' = -d/dx + x + 4x/(2x^2+1), a' = -d/dx + x",
                "lowering": "T' a T with a = d/dx + x",
                "note": "level 0 is outside the tower: both directions "
                "annihilate it, and lowering from level 1 annihilates too",
            },
        )

    def _ladder_image(self, k, psi, dpsi, grid, direction):
        x = grid.points
        w, wp, _ = self._w(x)
        e_k = self.eigenvalue(k)
        # g = (d/dx + w) psi_k, an oscillator-tower function at energy e_k
        # of the partner x^2 + 5; derivatives close via its eigen-equation.
        g = dpsi + w * psi
        d2psi = (self.potential(grid).values - e_k) * psi
        gp = d2psi + wp * psi + w * dpsi
        gpp = (x * x + 5 - e_k) * g
        if direction == "up":
            u = -gp + x * g
            up = -gpp + g + x * gp
        else:
            u = gp + x * g
            up = gpp + g + x * gp
        return -up + w * u


#: the library's catalog, keyed by CLI-facing names
CATALOG: dict[str, type[BasePotential]] = {
    "oscillator": HarmonicOscillator,
    "morse": MorsePotential,
    "well": SquareWell,
    "cprs": CPRSPotential,
}


def make_potential(name: str, **params) -> BasePotential:
    try:
        cls = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown potential {name!r}; choose from "
                         f"{sorted(CATALOG)}") from None
    return cls(**params)


# relative amplitude below which a quotient by psi is numerically meaningless
_QUOTIENT_FLOOR = 1e-9


def _node_flags(psi: np.ndarray) -> np.ndarray:
    """Samples adjacent to a sign change of psi, or with negligible |psi|.

    The amplitude criterion also catches zeros without a sign change, such
    as hard-wall boundary samples where sin evaluates to a rounding-level
    residue instead of exact zero.
    """
    flags = np.abs(psi) < _QUOTIENT_FLOOR * np.max(np.abs(psi))
    signs = np.sign(psi)
    crossing = signs[1:] * signs[:-1] < 0
    flags[:-1] |= crossing
    flags[1:] |= crossing
    return flags


def superpotential(state: EigenState) -> GridFunction:
    """-psi'/psi from the analytic derivative.

    Samples next to a node of psi (and any sample where the quotient is not
    finite, e.g. hard-wall boundaries) are flagged as NaN; consumers must
    use node-safe composite formulas instead of these samples.
    """
    psi = state.wavefunction.values
    with np.errstate(divide="ignore", invalid="ignore"):
        w = -state.derivative.values / psi
    bad = ~np.isfinite(w) | _node_flags(psi)
    if bad.any():
        w = np.where(bad, np.nan, w)
        return GridFunction(state.grid, w, flagged=True)
    return GridFunction(state.grid, w)


def superpotential_derivative(state: EigenState) -> GridFunction:
    """Derivative of -psi'/psi, evaluated analytically as -psi''/psi + (psi'/psi)^2."""
    psi = state.wavefunction.values
    with np.errstate(divide="ignore", invalid="ignore"):
        r = state.derivative.values / psi
        wp = -state.second_derivative.values / psi + r * r
    bad = ~np.isfinite(wp) | _node_flags(psi)
    if bad.any():
        wp = np.where(bad, np.nan, wp)
        return GridFunction(state.grid, wp, flagged=True)
    return GridFunction(state.grid, wp)


def partner_potentials(state: EigenState) -> tuple[GridFunction, GridFunction]:
    """(W^2 - W', W^2 + W') for the state's superpotential W.

    The first member reproduces V - E_n away from flagged samples; the
    second is the partner whose spectrum drops the factorization level.
    """
    w = superpotential(state).values
    wp = superpotential_derivative(state).values
    vm = w * w - wp
    vp = w * w + wp
    flagged = not np.all(np.isfinite(vm))
    return (GridFunction(state.grid, vm, flagged=flagged),
            GridFunction(state.grid, vp, flagged=flagged))


def ladder_image(potential: BasePotential, level: int, psi: np.ndarray,
                 dpsi: np.ndarray, grid: Grid, direction: str) -> np.ndarray:
    """Raw ladder application on explicit samples (no validation)."""
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    return potential._ladder_image(level, psi, dpsi, grid, direction)


def check_ladder_move(pot: BasePotential, level: int, direction: str,
                      allow_annihilation: bool = False):
    """Validate a ladder step; raises before any arithmetic happens.

    Stepping above the top of a finite tower raises
    :class:`NoSuchBoundStateError`; stepping off the bottom raises
    :class:`GroundStateAnnihilatedError` -- except for the well, whose
    lowering operator carries an explicit k-factor and legitimately
    returns the zero function from level 0.
    """
    if direction == "up":
        if pot.bound_count is not None and level + 1 >= pot.bound_count:
            raise NoSuchBoundStateError(
                f"{pot.name}: no level {level + 1} to raise into")
        if isinstance(pot, CPRSPotential) and level == 0 and not allow_annihilation:
            raise GroundStateAnnihilatedError(
                "the CPRS ladder annihilates level 0 in both directions")
    elif direction == "down":
        annihilates = (level == 0) or (isinstance(pot, CPRSPotential) and level == 1)
        if annihilates and not (allow_annihilation or isinstance(pot, SquareWell)):
            raise GroundStateAnnihilatedError(
                f"{pot.name}: lowering from level {level} annihilates the state")
    else:
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")


def apply_ladder(state: EigenState, direction: str,
                 allow_annihilation: bool = False) -> GridFunction:
    """Apply the native ladder of the state's potential.

    Returns the raw (unnormalized) image, parallel to the neighbouring
    eigenstate.  Pass ``allow_annihilation=True`` to get the raw
    (numerically zero) image from the bottom of a tower instead of
    :class:`GroundStateAnnihilatedError`.
    """
    pot = state.potential
    check_ladder_move(pot, state.level, direction, allow_annihilation)
    img = ladder_image(pot, state.level, state.wavefunction.values,
                       state.derivative.values, state.grid, direction)
    return GridFunction(state.grid, img)
