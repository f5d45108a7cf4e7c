"""Uniform 1D grid, the Gaussian-perturbed harmonic trap, and well geometry.

Lengths and energies are in units of the longitudinal harmonic oscillator.
The trap is

    V(x) = x**2 / 2 + U0 * arctan(x0) * exp(-(x - x0)**2 / (2 sigma**2))

so for ``x0 < 0`` the Gaussian digs a side well to the left of the trap
center and a barrier separates it from the central harmonic well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, NoDoubleWell

EXTREMUM_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_min + i*h`` for ``i = 0..n_points-1``."""

    x_min: float = -12.0
    x_max: float = 12.0
    n_points: int = 4801

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min={self.x_min} must be below x_max={self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError(f"n_points must be an integer >= 3, got {self.n_points}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_points)

    def refined(self, factor: int = 2) -> "Grid":
        """Same interval with the spacing divided by ``factor``."""
        return Grid(self.x_min, self.x_max, (self.n_points - 1) * factor + 1)

    def index_of(self, x: float) -> int:
        """Index of the node nearest to ``x``."""
        i = int(round((x - self.x_min) / self.h))
        return min(max(i, 0), self.n_points - 1)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real or complex samples of a function on the nodes of ``grid``."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"values have shape {values.shape}, grid has {self.grid.n_points} nodes"
            )
        object.__setattr__(self, "values", values)

    def norm2(self) -> float:
        """Discrete ``sum |f|^2 h``."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.h)

    def normalized(self) -> "SampledFunction":
        return SampledFunction(self.values / np.sqrt(self.norm2()), self.grid)

    def inner(self, other: "SampledFunction") -> complex | float:
        """Riemann-sum inner product ``h * sum conj(f) g``."""
        check_same_grid(self.grid, other.grid)
        return np.vdot(self.values, other.values) * self.grid.h


def check_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridMismatch(f"{a} != {b}")


@dataclass(frozen=True)
class PotentialParams:
    """Trap family: amplitude ``U0``, Gaussian width ``sigma`` and center ``x0``."""

    U0: float = 6.4
    sigma: float = 0.5
    x0: float = -3.7

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def at(self, x0: float) -> "PotentialParams":
        return PotentialParams(self.U0, self.sigma, float(x0))


@dataclass(frozen=True)
class WellGeometry:
    """Positions of the two well bottoms and of the barrier top between them."""

    left_min: float
    barrier_top: float
    right_min: float
    values: tuple[float, float, float] = field(default=(np.nan, np.nan, np.nan), compare=False)


def eval_potential(p: PotentialParams, x):
    """Evaluate the trap potential at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    gauss = np.exp(-((x - p.x0) ** 2) / (2.0 * p.sigma**2))
    out = 0.5 * x**2 + p.U0 * np.arctan(p.x0) * gauss
    return float(out) if out.ndim == 0 else out


def potential_dx0(p: PotentialParams, x):
    """Partial derivative of the potential with respect to ``x0``."""
    x = np.asarray(x, dtype=float)
    gauss = np.exp(-((x - p.x0) ** 2) / (2.0 * p.sigma**2))
    return p.U0 * gauss * (1.0 / (1.0 + p.x0**2) + np.arctan(p.x0) * (x - p.x0) / p.sigma**2)


def sample_potential(p: PotentialParams, g: Grid) -> SampledFunction:
    return SampledFunction(eval_potential(p, g.x), g)


def _parabola_vertex(xs: np.ndarray, ys: np.ndarray, i: int) -> tuple[float, float]:
    # Uniform spacing: vertex offset = h (y- - y+) / (2 (y- - 2 y0 + y+)).
    h = xs[1] - xs[0]
    ym, y0, yp = ys[i - 1], ys[i], ys[i + 1]
    curv = ym - 2.0 * y0 + yp
    if curv == 0.0:
        return float(xs[i]), float(y0)
    t = 0.5 * (ym - yp) / curv
    return float(xs[i] + t * h), float(y0 - 0.25 * (ym - yp) * t)


def locate_wells_sampled(v: SampledFunction) -> WellGeometry:
    """Find the double-well geometry of tabulated samples.

    The two deepest strict local minima are kept, and the barrier is the
    highest local maximum between them. Each extremum is refined by a
    three-point parabola.

    Raises:
        NoDoubleWell: fewer than two minima or no interior maximum.
    """
    y = np.asarray(v.values, dtype=float)
    x = v.grid.x
    left, mid, right = y[:-2], y[1:-1], y[2:]
    is_min = (left - mid > EXTREMUM_TOL) & (right - mid > EXTREMUM_TOL)
    is_max = (mid - left > EXTREMUM_TOL) & (mid - right > EXTREMUM_TOL)
    minima = np.flatnonzero(is_min) + 1
    maxima = np.flatnonzero(is_max) + 1
    if minima.size < 2:
        raise NoDoubleWell(f"found {minima.size} local minimum(s)")
    deepest = np.sort(minima[np.argsort(y[minima], kind="stable")[:2]])
    i_l, i_r = int(deepest[0]), int(deepest[1])
    between = maxima[(maxima > i_l) & (maxima < i_r)]
    if between.size == 0:
        raise NoDoubleWell("no interior maximum between the minima")
    i_b = int(between[np.argmax(y[between])])

    xl, vl = _parabola_vertex(x, y, i_l)
    xb, vb = _parabola_vertex(x, y, i_b)
    xr, vr = _parabola_vertex(x, y, i_r)
    return WellGeometry(xl, xb, xr, (vl, vb, vr))


def locate_wells(p: PotentialParams, g: Grid) -> WellGeometry:
    """Double-well geometry of the trap sampled on ``g``; see :func:`locate_wells_sampled`."""
    return locate_wells_sampled(sample_potential(p, g))
