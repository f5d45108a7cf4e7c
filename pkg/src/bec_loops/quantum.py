"""Many-body two-mode Hamiltonian in the Fock basis and its spectrum over x0.

Fock index ``n`` is the number of atoms in mode 1 (left well); the
remaining ``N - n`` occupy mode 2. In this basis the Hamiltonian is a
symmetric tridiagonal (Jacobi) matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import BecLoopsError, ConvergenceFailure
from .grid import Grid, PotentialParams
from .linear import RESIDUAL_TOL, fix_sign
from .modes import TwoModeParams, params_for_trap


@dataclass(frozen=True, eq=False)
class FockVector:
    """Amplitudes over ``|n, N-n>`` for ``n = 0..N``."""

    amplitudes: np.ndarray
    N: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.N + 1,):
            raise ValueError(f"expected {self.N + 1} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class FockHamiltonian:
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    @property
    def N(self) -> int:
        return self.diagonal.size - 1

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diagonal)
            + np.diag(self.off_diagonal, 1)
            + np.diag(self.off_diagonal, -1)
        )

    def apply(self, amps: np.ndarray) -> np.ndarray:
        out = self.diagonal * amps
        out[:-1] += self.off_diagonal * amps[1:]
        out[1:] += self.off_diagonal * amps[:-1]
        return out


def fock_bands(E1, E2, Omega, g1, g2, N: int):
    """Bands of the Fock Hamiltonian with ``g1 = g0/V1``, ``g2 = g0/V2``.

    Scalars or arrays broadcast along a leading axis; used by the sweep for
    interpolated parameters.
    """
    n = np.arange(N + 1, dtype=float)
    m = N - n
    E1, E2, Omega, g1, g2 = (np.asarray(a, dtype=float)[..., None] for a in (E1, E2, Omega, g1, g2))
    diag = E1 * n + E2 * m + 0.5 * g1 * n * (n - 1) + 0.5 * g2 * m * (m - 1)
    off = 0.5 * Omega * np.sqrt((n[:-1] + 1) * m[:-1])
    return diag, off


def build_fock_hamiltonian(p: TwoModeParams) -> FockHamiltonian:
    diag, off = fock_bands(p.E1, p.E2, p.Omega, p.g0 / p.V1, p.g0 / p.V2, p.N)
    return FockHamiltonian(diag, off)


def spectrum(p: TwoModeParams) -> tuple[np.ndarray, list[FockVector]]:
    """All eigenvalues (ascending, total energies) and eigenvectors.

    Eigenvectors have their largest-magnitude component positive.
    """
    ham = build_fock_hamiltonian(p)
    return diagonalize(ham)


def diagonalize(ham: FockHamiltonian) -> tuple[np.ndarray, list[FockVector]]:
    N = ham.N
    if N == 0:
        return ham.diagonal.copy(), [FockVector(np.ones(1), 0)]
    try:
        w, vecs = eigh_tridiagonal(ham.diagonal, ham.off_diagonal)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    out = []
    for energy, vec in zip(w, vecs.T):
        vec = fix_sign(vec)
        res = np.linalg.norm(ham.apply(vec) - energy * vec)
        if not res <= RESIDUAL_TOL * max(1.0, abs(energy)):
            raise ConvergenceFailure(f"Fock residual {res:.3e} at eigenvalue {energy:.12g}")
        out.append(FockVector(vec, N))
    return w, out


@dataclass(frozen=True, eq=False)
class SpectrumScan:
    """Per-particle levels: ``levels[k, j]`` is level ``k`` at ``x0_values[j]``.

    ``gaps[k, j]`` is ``levels[k+1, j] - levels[k, j]``.
    """

    x0_values: np.ndarray
    levels: np.ndarray
    gaps: np.ndarray
    params_trace: tuple[TwoModeParams, ...]

    @property
    def N(self) -> int:
        return self.levels.shape[0] - 1


class ScanPointError(BecLoopsError):
    """Wraps a module error raised at a particular x0 of a scan."""

    def __init__(self, x0: float, cause: Exception):
        super().__init__(f"at x0={x0:.6g}: {type(cause).__name__}: {cause}")
        self.x0 = x0
        self.cause = cause


def scan_spectrum(
    trap: PotentialParams,
    x0_list,
    g0: float,
    N: int,
    grid: Grid | None = None,
) -> SpectrumScan:
    """Recompute modes and diagonalize at every ``x0`` of ``x0_list``.

    Raises:
        ScanPointError: the mode construction or diagonalization failed at
            some ``x0``; the original error is its ``cause``.
    """
    grid = grid or Grid()
    x0_values = np.asarray(x0_list, dtype=float)
    if x0_values.size == 0:
        raise ValueError("x0_list is empty")
    levels = np.empty((N + 1, x0_values.size))
    trace = []
    for j, x0 in enumerate(x0_values):
        try:
            p = params_for_trap(trap.at(x0), grid, g0, N)
            w, _ = spectrum(p)
        except BecLoopsError as exc:
            raise ScanPointError(float(x0), exc) from exc
        levels[:, j] = w / N
        trace.append(p)
    return SpectrumScan(x0_values, levels, np.diff(levels, axis=0), tuple(trace))


def min_gap(scan: SpectrumScan) -> tuple[float, int, float]:
    """Smallest adjacent-level gap over the scan as ``(x0, lower level index, gap)``.

    Gaps are per particle, like the levels.
    """
    if scan.gaps.size == 0:
        raise ValueError("scan has a single level; no gaps")
    k, j = np.unravel_index(int(np.argmin(scan.gaps)), scan.gaps.shape)
    return float(scan.x0_values[j]), int(k), float(scan.gaps[k, j])


def envelope_delta(p: TwoModeParams) -> float:
    """Default finite-size allowance ``5 |Omega| / N`` of the envelope check."""
    return 5.0 * abs(p.Omega) / p.N


def envelope_excess(p: TwoModeParams, delta: float | None = None) -> float:
    """How far the quantum per-particle spectrum leaves the classical band.

    The band is ``[min H/N - delta, max H/N + delta]`` over the classical
    stationary states. Returns the largest excursion outside it (zero or
    negative when the spectrum is enveloped).
    """
    from .classical import classical_roots

    if delta is None:
        delta = envelope_delta(p)
    w, _ = spectrum(p)
    e = np.array([s.energy for s in classical_roots(p)]) / p.N
    lo, hi = e.min() - delta, e.max() + delta
    return float(max(lo - w[0] / p.N, w[-1] / p.N - hi))
