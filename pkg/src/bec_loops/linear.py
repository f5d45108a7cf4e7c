"""Finite-difference single-particle Hamiltonian ``H0 = -1/2 d^2/dx^2 + V``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceFailure
from .grid import Grid, SampledFunction, check_same_grid

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix acting on samples of ``grid``.

    Dirichlet boundaries: the wavefunction is implicitly zero just outside
    the grid.
    """

    diagonal: np.ndarray
    off_diagonal: np.ndarray
    grid: Grid

    def __post_init__(self):
        n = self.grid.n_points
        if self.diagonal.shape != (n,) or self.off_diagonal.shape != (n - 1,):
            raise ValueError("operator bands do not match the grid")

    def apply(self, values: np.ndarray) -> np.ndarray:
        out = self.diagonal * values
        out[:-1] += self.off_diagonal * values[1:]
        out[1:] += self.off_diagonal * values[:-1]
        return out

    def __matmul__(self, f: SampledFunction) -> SampledFunction:
        check_same_grid(self.grid, f.grid)
        return SampledFunction(self.apply(f.values), self.grid)

    def shifted(self, dv: np.ndarray) -> "TridiagonalOperator":
        """Operator with ``dv`` added to the diagonal."""
        return TridiagonalOperator(self.diagonal + dv, self.off_diagonal, self.grid)

    def to_sparse(self):
        from scipy.sparse import diags

        return diags(
            [self.off_diagonal, self.diagonal, self.off_diagonal], [-1, 0, 1], format="csc"
        )


def build_h0(v: SampledFunction) -> TridiagonalOperator:
    """Three-point discretization of ``-1/2 d^2/dx^2 + v``."""
    vals = np.asarray(v.values)
    if np.iscomplexobj(vals):
        if np.any(vals.imag != 0):
            raise ValueError("potential must be real")
        vals = vals.real
    h = v.grid.h
    diag = 1.0 / h**2 + vals.astype(float)
    off = np.full(v.grid.n_points - 1, -0.5 / h**2)
    return TridiagonalOperator(diag, off, v.grid)


def fix_sign(vec: np.ndarray) -> np.ndarray:
    """Flip ``vec`` so that its entry of largest magnitude is positive."""
    i = int(np.argmax(np.abs(vec)))
    return -vec if vec[i].real < 0 else vec


def eigensolve(op: TridiagonalOperator, k: int) -> list[tuple[float, SampledFunction]]:
    """The ``k`` lowest eigenpairs, eigenvectors normalized to ``sum |u|^2 h = 1``.

    Raises:
        ConvergenceFailure: a pair misses ``||H u - E u|| <= 1e-9 max(1, |E|)``.
    """
    n = op.grid.n_points
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    try:
        w, vecs = eigh_tridiagonal(
            op.diagonal, op.off_diagonal, select="i", select_range=(0, k - 1)
        )
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc

    h = op.grid.h
    out = []
    for energy, vec in zip(w, vecs.T):
        vec = fix_sign(vec / np.sqrt(np.sum(vec**2) * h))
        res = np.linalg.norm(op.apply(vec) - energy * vec)
        if not res <= RESIDUAL_TOL * max(1.0, abs(energy)):
            raise ConvergenceFailure(f"residual {res:.3e} for eigenvalue {energy:.12g}")
        out.append((float(energy), SampledFunction(vec, op.grid)))
    return out


def matrix_element(u: SampledFunction, op: TridiagonalOperator, w: SampledFunction):
    """Discrete ``integral conj(u) (op w) dx`` as ``h * u^H (op w)``."""
    check_same_grid(u.grid, op.grid)
    check_same_grid(w.grid, op.grid)
    val = np.vdot(u.values, op.apply(w.values)) * op.grid.h
    return float(val.real) if np.isrealobj(u.values) and np.isrealobj(w.values) else val
