"""Stationary points of the mean-field two-mode equations.

With real amplitudes ``c1 = sqrt(N) cos(theta)``, ``c2 = sqrt(N) sin(theta)``
the two stationarity conditions

    c1 E1 + c2 Omega/2 + g0 c1**3 / V1 = mu c1
    c2 E2 + c1 Omega/2 + g0 c2**3 / V2 = mu c2

reduce, after eliminating ``mu``, to one smooth function of ``theta`` with
period ``pi``. All of its roots on ``(-pi/2, pi/2]`` are found by a dense
sign-change scan followed by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOmega
from .modes import TwoModeParams

N_LATTICE = 10_000
BISECT_TOL = 1e-12
FOLD_MERGE = 1e-8


@dataclass(frozen=True)
class ClassicalSolution:
    c1: float
    c2: float
    mu: float
    energy: float
    theta: float
    fold: bool = False

    @property
    def energy_per_particle(self) -> float:
        return self.energy / (self.c1**2 + self.c2**2)


def consistency(theta, p: TwoModeParams):
    """``f(theta)``: zero exactly where both stationarity lines share one ``mu``."""
    s, c = np.sin(theta), np.cos(theta)
    return s * c * ((p.E1 - p.E2) + p.Ng0 * (c**2 / p.V1 - s**2 / p.V2)) - 0.5 * p.Omega * (
        c**2 - s**2
    )


def stationarity_residuals(c1: float, c2: float, mu: float, p: TwoModeParams):
    """Residuals of the two stationarity lines, in the order of the modes."""
    r1 = c1 * p.E1 + c2 * p.Omega / 2 + c1**3 * p.g0 / p.V1 - c1 * mu
    r2 = c2 * p.E2 + c1 * p.Omega / 2 + c2**3 * p.g0 / p.V2 - c2 * mu
    return r1, r2


def classical_energy(s: ClassicalSolution, p: TwoModeParams) -> float:
    """Mean-field two-mode energy ``H(c1, c2)`` (total, not per particle)."""
    c1, c2 = s.c1, s.c2
    return (
        p.E1 * c1**2
        + p.E2 * c2**2
        + p.Omega * c1 * c2
        + p.g0 / (2 * p.V1) * c1**4
        + p.g0 / (2 * p.V2) * c2**4
    )


def energy_identity_gap(s: ClassicalSolution, p: TwoModeParams) -> float:
    """``H/N - (mu - g0/(2N) (c1^4/V1 + c2^4/V2))``; zero on any stationary point."""
    rhs = s.mu - p.g0 / (2 * p.N) * (s.c1**4 / p.V1 + s.c2**4 / p.V2)
    return classical_energy(s, p) / p.N - rhs


def _bisect(f, a: float, b: float, fa: float) -> float:
    while b - a > BISECT_TOL:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _wrap(theta: float) -> float:
    # Representative of theta modulo pi in (-pi/2, pi/2].
    t = (theta + np.pi / 2) % np.pi - np.pi / 2
    return np.pi / 2 if t <= -np.pi / 2 else t


def _solution(theta: float, p: TwoModeParams, fold: bool) -> ClassicalSolution:
    sq = np.sqrt(p.N)
    c1, c2 = sq * np.cos(theta), sq * np.sin(theta)
    if abs(c1) >= abs(c2):
        mu = p.E1 + 0.5 * p.Omega * c2 / c1 + p.g0 * c1**2 / p.V1
    else:
        mu = p.E2 + 0.5 * p.Omega * c1 / c2 + p.g0 * c2**2 / p.V2
    s = ClassicalSolution(c1, c2, mu, 0.0, theta, fold)
    return ClassicalSolution(c1, c2, mu, classical_energy(s, p), theta, fold)


def classical_roots(p: TwoModeParams, n_lattice: int = N_LATTICE) -> list[ClassicalSolution]:
    """All real stationary states, sorted by energy.

    Raises:
        DegenerateOmega: ``p.Omega == 0``.
    """
    if p.Omega == 0:
        raise DegenerateOmega("Omega = 0 leaves the relative phase unconstrained")

    def f(t):
        return float(consistency(t, p))

    # Lattice on (-pi/2, pi/2] plus one extra node to close the period.
    thetas = -np.pi / 2 + np.pi * np.arange(1, n_lattice + 2) / n_lattice
    vals = consistency(thetas, p)
    roots = []
    for k in range(n_lattice):
        a, b, fa, fb = thetas[k], thetas[k + 1], vals[k], vals[k + 1]
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(_bisect(f, a, b, fa))
    roots = sorted(_wrap(t) for t in roots)

    merged: list[tuple[float, bool]] = []
    for t in roots:
        if merged and abs(t - merged[-1][0]) < FOLD_MERGE:
            merged[-1] = (0.5 * (t + merged[-1][0]), True)
        else:
            merged.append((t, False))
    if len(merged) > 1 and abs(merged[0][0] + np.pi - merged[-1][0]) < FOLD_MERGE:
        merged[-1] = (merged[-1][0], True)
        merged.pop(0)

    sols = [_solution(t, p, fold) for t, fold in merged]
    return sorted(sols, key=lambda s: s.energy)
