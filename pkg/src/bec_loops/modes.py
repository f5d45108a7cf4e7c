"""Localized well modes and the two-mode parameters derived from them.

Each well is cut out of the double well at the barrier top: on the far side
of the cut the potential is held at its barrier-top value. The ground state
of each single-well potential is the local mode of that well. Mode 1 is the
left well and mode 2 the right well.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import NoBoundMode
from .grid import (
    Grid,
    PotentialParams,
    SampledFunction,
    WellGeometry,
    check_same_grid,
    locate_wells,
    locate_wells_sampled,
    sample_potential,
)
from .linear import TridiagonalOperator, build_h0, eigensolve, matrix_element

OVERLAP_THRESHOLD = 1e-2


class ModeOverlapWarning(UserWarning):
    """The two local modes overlap more than the configured threshold."""


@dataclass(frozen=True)
class TwoModeParams:
    """Parameters of the two-mode Hamiltonian.

    ``V1`` and ``V2`` are effective mode volumes, the inverses of
    ``integral |u_j|^4 dx``. ``overlap`` is ``integral u1 u2 dx`` and
    ``overlap_warning`` is set when it exceeds the threshold the modes were
    built with.
    """

    E1: float
    E2: float
    Omega: float
    V1: float
    V2: float
    g0: float = 0.0
    N: int = 1
    overlap: float = 0.0
    overlap_warning: bool = False

    def __post_init__(self):
        if not (self.V1 > 0 and self.V2 > 0):
            raise ValueError(f"mode volumes must be positive, got {self.V1}, {self.V2}")
        if not (np.isfinite(self.E1) and np.isfinite(self.E2)):
            raise ValueError("on-site energies must be finite")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @property
    def Ng0(self) -> float:
        return self.g0 * self.N

    def with_interaction(self, g0: float, N: int) -> "TwoModeParams":
        return replace(self, g0=float(g0), N=int(N))


@dataclass(frozen=True, eq=False)
class Modes:
    """Result of the full mode construction at one trap shape."""

    u1: SampledFunction
    u2: SampledFunction
    left_v: SampledFunction
    right_v: SampledFunction
    geometry: WellGeometry
    h0: TridiagonalOperator


def split_potential(
    p: PotentialParams, g: Grid, w: WellGeometry
) -> tuple[SampledFunction, SampledFunction]:
    """Cut the trap at the barrier top into left and right single wells."""
    return split_sampled(sample_potential(p, g), w)


def split_sampled(v: SampledFunction, w: WellGeometry) -> tuple[SampledFunction, SampledFunction]:
    vals = np.asarray(v.values, dtype=float)
    ib = v.grid.index_of(w.barrier_top)
    plateau = vals[ib]
    left = vals.copy()
    left[ib + 1 :] = plateau
    right = vals.copy()
    right[:ib] = plateau
    return SampledFunction(left, v.grid), SampledFunction(right, v.grid)


def _ground_mode(v: SampledFunction) -> SampledFunction:
    (energy, u), = eigensolve(build_h0(v), 1)
    vals = np.asarray(v.values)
    plateau = min(vals[0], vals[-1])
    if not energy < plateau:
        raise NoBoundMode(f"ground energy {energy:.6g} is not below plateau {plateau:.6g}")
    i_min = int(np.argmin(vals))
    if u.values[i_min] < 0:
        u = SampledFunction(-u.values, u.grid)
    return u


def build_modes(left_v: SampledFunction, right_v: SampledFunction):
    """Ground states of the two split potentials, positive at their minima.

    Raises:
        NoBoundMode: a split potential has no level below its plateau.
    """
    check_same_grid(left_v.grid, right_v.grid)
    return _ground_mode(left_v), _ground_mode(right_v)


def two_mode_params(
    u1: SampledFunction,
    u2: SampledFunction,
    full_h0: TridiagonalOperator,
    g0: float = 0.0,
    N: int = 1,
    overlap_threshold: float = OVERLAP_THRESHOLD,
) -> TwoModeParams:
    """Project the unsplit ``H0`` and the contact interaction on the two modes."""
    h = full_h0.grid.h
    E1 = matrix_element(u1, full_h0, u1)
    E2 = matrix_element(u2, full_h0, u2)
    Omega = 2.0 * matrix_element(u1, full_h0, u2)
    inv_v1 = float(np.sum(np.abs(u1.values) ** 4) * h)
    inv_v2 = float(np.sum(np.abs(u2.values) ** 4) * h)
    overlap = float(np.real(u1.inner(u2)))
    flagged = abs(overlap) > overlap_threshold
    if flagged:
        warnings.warn(
            f"mode overlap {overlap:.3e} exceeds {overlap_threshold:g}", ModeOverlapWarning,
            stacklevel=2,
        )
    return TwoModeParams(
        E1=E1, E2=E2, Omega=Omega, V1=1.0 / inv_v1, V2=1.0 / inv_v2,
        g0=float(g0), N=int(N), overlap=overlap, overlap_warning=flagged,
    )


def modes_for_sampled(v: SampledFunction) -> Modes:
    """Full pipeline (wells, split, modes) on tabulated potential samples."""
    geom = locate_wells_sampled(v)
    left_v, right_v = split_sampled(v, geom)
    u1, u2 = build_modes(left_v, right_v)
    return Modes(u1, u2, left_v, right_v, geom, build_h0(v))


def modes_for_trap(p: PotentialParams, g: Grid) -> Modes:
    return modes_for_sampled(sample_potential(p, g))


def params_for_trap(
    p: PotentialParams,
    g: Grid,
    g0: float = 0.0,
    N: int = 1,
    overlap_threshold: float = OVERLAP_THRESHOLD,
) -> TwoModeParams:
    """Two-mode parameters of the trap ``p`` sampled on ``g``."""
    m = modes_for_trap(p, g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModeOverlapWarning)
        return two_mode_params(m.u1, m.u2, m.h0, g0, N, overlap_threshold)


def load_tabulated(path) -> SampledFunction:
    """Read a two-column ``x V(x)`` text file on a uniform grid."""
    data = np.loadtxt(path, comments="#", delimiter=None if _is_whitespace(path) else ",")
    x, v = data[:, 0], data[:, 1]
    grid = Grid(float(x[0]), float(x[-1]), len(x))
    if not np.allclose(grid.x, x, rtol=0, atol=1e-9 * max(1.0, grid.h)):
        raise ValueError(f"{path}: abscissae are not uniformly spaced")
    return SampledFunction(v, grid)


def _is_whitespace(path) -> bool:
    with open(path) as fh:
        for line in fh:
            if line.strip() and not line.lstrip().startswith("#"):
                return "," not in line
    return True
