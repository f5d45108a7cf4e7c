"""Stationary Gross-Pitaevskii states and their continuation in ``x0``.

The unknowns of a stationary solve are the real wavefunction samples and
the chemical potential, tied together by the normalization constraint:

    H0 phi + Ng0 phi**3 - mu phi = 0,     h * sum(phi**2) = 1.

Continuation appends ``x0`` as a third block and follows the solution curve
with a pseudo-arclength predictor-corrector, so folds in ``x0`` (the edges
of the mean-field loops) are ordinary points of the curve.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, splu

from .errors import NoConvergence, SingularJacobian, StepCollapse
from .grid import Grid, PotentialParams, SampledFunction, potential_dx0, sample_potential
from .linear import build_h0, eigensolve
from .modes import modes_for_trap

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
NORM_TOL = 1e-10
SAME_STATE = 0.999


@dataclass(frozen=True, eq=False)
class GpeSolution:
    phi: SampledFunction
    mu: float
    energy_per_particle: float
    Ng0: float
    params: PotentialParams
    residual_norm: float
    iterations: int = 0

    @property
    def x0(self) -> float:
        return self.params.x0


@dataclass(frozen=True)
class StepControl:
    """Arclength step settings.

    The step adapts to corrector effort inside ``[min_step, max_step]``;
    repeated corrector failures halve it, and falling below ``collapse``
    abandons the branch.
    """

    initial: float = 0.01
    min_step: float = 1e-6
    max_step: float = 0.05
    collapse: float = 1e-8
    max_corrector: int = 10
    max_points: int = 20000
    closure_tol: float = 1e-4
    closure_overlap: float = 1 - 1e-6


@dataclass
class Branch:
    points: list[tuple[float, GpeSolution]] = field(default_factory=list)
    closed: bool = False
    turning_points: list[float] = field(default_factory=list)
    turning_indices: list[int] = field(default_factory=list)

    @property
    def x0(self) -> np.ndarray:
        return np.array([x for x, _ in self.points])

    @property
    def mu(self) -> np.ndarray:
        return np.array([s.mu for _, s in self.points])

    @property
    def energy_per_particle(self) -> np.ndarray:
        return np.array([s.energy_per_particle for _, s in self.points])


def _quartic(phi: np.ndarray, h: float) -> float:
    return float(np.sum(phi**4) * h)


def make_solution(p: PotentialParams, Ng0: float, phi: np.ndarray, mu: float, grid: Grid, its=0):
    h0 = build_h0(sample_potential(p, grid))
    res = float(np.linalg.norm(h0.apply(phi) + Ng0 * phi**3 - mu * phi))
    e = mu - 0.5 * Ng0 * _quartic(phi, grid.h)
    return GpeSolution(SampledFunction(phi, grid), float(mu), float(e), float(Ng0), p, res, its)


def mu_consistency_gap(s: GpeSolution) -> float:
    """``mu - (<phi|H0|phi> + Ng0 sum phi^4 h)``; vanishes on every solution."""
    g = s.phi.grid
    h0 = build_h0(sample_potential(s.params, g))
    phi = s.phi.values
    return s.mu - (float(phi @ h0.apply(phi)) * g.h + s.Ng0 * _quartic(phi, g.h))


def _lu(mat):
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            return splu(sp.csc_matrix(mat), permc_spec="NATURAL", diag_pivot_thresh=0.0)
        except (RuntimeError, MatrixRankWarning) as exc:
            raise SingularJacobian(str(exc)) from exc


def _solve(mat, rhs):
    out = _lu(mat).solve(rhs)
    if not np.all(np.isfinite(out)):
        raise SingularJacobian("non-finite Newton step")
    return out


class _System:
    """Residual and Jacobian of the stationary problem at fixed trap family."""

    def __init__(self, trap: PotentialParams, Ng0: float, grid: Grid):
        self.trap = trap
        self.Ng0 = Ng0
        self.grid = grid
        self.h = grid.h
        n = grid.n_points
        self.n = n
        self.lap_off = np.full(n - 1, -0.5 / self.h**2)

    def potential(self, x0: float) -> np.ndarray:
        return sample_potential(self.trap.at(x0), self.grid).values

    def residual(self, phi, mu, x0):
        v = self.potential(x0)
        r = (1.0 / self.h**2 + v + self.Ng0 * phi**2 - mu) * phi
        r[:-1] += self.lap_off * phi[1:]
        r[1:] += self.lap_off * phi[:-1]
        norm = 0.5 * (self.h * float(phi @ phi) - 1.0)
        return r, norm

    def jacobian(self, phi, mu, x0, with_x0: bool):
        v = self.potential(x0)
        n = self.n
        diag = 1.0 / self.h**2 + v + 3.0 * self.Ng0 * phi**2 - mu
        a = sp.diags([self.lap_off, diag, self.lap_off], [-1, 0, 1], format="csr")
        cols = [-phi[:, None]]
        if with_x0:
            dv = potential_dx0(self.trap.at(x0), self.grid.x)
            cols.append((dv * phi)[:, None])
        top = sp.hstack([a, sp.csr_matrix(np.hstack(cols))])
        bottom = np.zeros((1, n + len(cols)))
        bottom[0, :n] = self.h * phi
        return sp.vstack([top, sp.csr_matrix(bottom)], format="csr")


def solve_gpe(
    p: PotentialParams,
    Ng0: float,
    guess: SampledFunction,
    max_iter: int = 200,
    tol: float = RESIDUAL_TOL,
    mu_guess: float | None = None,
) -> GpeSolution:
    """Newton iteration from ``guess`` to the nearest stationary state.

    Raises:
        NoConvergence: more than ``max_iter`` iterations or a stalled line search.
        SingularJacobian: the bordered Jacobian cannot be factorized.
    """
    grid = guess.grid
    system = _System(p, Ng0, grid)
    phi = np.array(np.real(guess.values), dtype=float)
    phi /= np.sqrt(np.sum(phi**2) * grid.h)
    if mu_guess is None:
        h0 = build_h0(sample_potential(p, grid))
        mu = float(phi @ h0.apply(phi)) * grid.h + Ng0 * _quartic(phi, grid.h)
    else:
        mu = float(mu_guess)

    def merit(ph, m):
        r, c = system.residual(ph, m, p.x0)
        return float(np.linalg.norm(r)), abs(c), np.concatenate([r, [c]])

    rn, cn, full = merit(phi, mu)
    for it in range(max_iter + 1):
        if rn <= tol and 2 * cn <= NORM_TOL:
            return make_solution(p, Ng0, phi, mu, grid, it)
        if it == max_iter:
            break
        jac = system.jacobian(phi, mu, p.x0, with_x0=False)
        step = _solve(jac, -full)
        dphi, dmu = step[:-1], step[-1]
        f0 = float(np.linalg.norm(full))
        alpha = 1.0
        while True:
            cand_phi, cand_mu = phi + alpha * dphi, mu + alpha * dmu
            crn, ccn, cfull = merit(cand_phi, cand_mu)
            if np.linalg.norm(cfull) < (1 - 1e-4 * alpha) * f0 or alpha < 1e-10:
                break
            alpha *= 0.5
        if alpha < 1e-10:
            # Floating-point floor: accept if already at roundoff level.
            if rn <= 10 * tol and 2 * cn <= NORM_TOL:
                return make_solution(p, Ng0, phi, mu, grid, it)
            raise NoConvergence(f"line search stalled at residual {rn:.3e} (iteration {it})")
        phi, mu, rn, cn, full = cand_phi, cand_mu, crn, ccn, cfull
    raise NoConvergence(f"no convergence after {max_iter} iterations, residual {rn:.3e}")


def two_mode_linear_states(p: PotentialParams, grid: Grid, n_candidates: int = 8):
    """The two linear eigenstates that best span the two local-mode subspace.

    Returned in increasing energy order as ``[(E, psi), (E, psi)]``. Away
    from the avoided crossing these are not necessarily the two lowest
    levels: an unrelated harmonic excitation of the central well can sit
    between them.
    """
    m = modes_for_trap(p, grid)
    pairs = eigensolve(build_h0(sample_potential(p, grid)), n_candidates)
    h = grid.h
    # Projector weight of each eigenstate on span{u1, u2}.
    u = np.vstack([m.u1.values, m.u2.values])
    gram = u @ u.T * h
    proj = u @ np.vstack([psi.values for _, psi in pairs]).T * h
    weight = np.einsum("ik,ij,jk->k", proj, np.linalg.inv(gram), proj)
    best = np.sort(np.argsort(weight)[-2:])
    return [pairs[i] for i in best]


def seed_from_linear(p: PotentialParams, Ng0: float, psi: SampledFunction, ramp: int = 8) -> GpeSolution:
    """Solve at ``Ng0`` starting from a linear eigenstate ``psi``.

    A direct Newton solve is tried first. If it fails, the interaction is
    ramped from zero in ``ramp`` equal steps, each solve seeded by the last.
    """
    try:
        return solve_gpe(p, Ng0, psi)
    except (NoConvergence, SingularJacobian):
        pass
    s = solve_gpe(p, 0.0, psi)
    for g in Ng0 * np.arange(1, ramp + 1) / ramp:
        s = solve_gpe(p, float(g), s.phi, mu_guess=s.mu)
    return s


def _wnorm(v: np.ndarray, h: float, n: int) -> float:
    return float(np.sqrt(h * v[:n] @ v[:n] + v[n] ** 2 + v[n + 1] ** 2))


def continue_branch(
    seed: GpeSolution,
    x0_range: tuple[float, float],
    step_control: StepControl | None = None,
    direction: int | None = None,
) -> Branch:
    """Follow the solution curve through ``seed`` across ``x0_range``.

    The curve is parametrized by arclength with the state weighted by ``h``
    and ``mu``, ``x0`` weighted by one. Tracing ends on leaving the range,
    on closing a loop, or after ``max_points`` points.

    Raises:
        StepCollapse: the step fell below ``step_control.collapse`` while the
            corrector kept failing.
    """
    ctl = step_control or StepControl()
    lo, hi = min(x0_range), max(x0_range)
    grid = seed.phi.grid
    h, n = grid.h, grid.n_points
    trap = seed.params
    system = _System(trap, seed.Ng0, grid)
    if direction is None:
        direction = 1 if abs(seed.x0 - lo) <= abs(seed.x0 - hi) else -1

    w = np.concatenate([np.full(n, h), [1.0, 1.0]])
    z = np.concatenate([seed.phi.values, [seed.mu, seed.x0]])
    z_start = z.copy()

    def tangent(z, ref):
        jac = system.jacobian(z[:n], z[n], z[n + 1], with_x0=True)
        mat = sp.vstack([jac, sp.csr_matrix(ref[None, :])], format="csc")
        rhs = np.zeros(n + 2)
        rhs[-1] = 1.0
        t = _solve(mat, rhs)
        return t / _wnorm(t, h, n)

    e_x0 = np.zeros(n + 2)
    e_x0[-1] = 1.0
    t = direction * tangent(z, e_x0)

    branch = Branch(points=[(seed.x0, seed)])
    ds = ctl.initial
    travelled = 0.0

    def correct(z_pred, t):
        zc = z_pred.copy()
        row = sp.csr_matrix((w * t)[None, :])
        for it in range(1, ctl.max_corrector + 1):
            r, c = system.residual(zc[:n], zc[n], zc[n + 1])
            arc = float((w * t) @ (zc - z_pred))
            jac = system.jacobian(zc[:n], zc[n], zc[n + 1], with_x0=True)
            mat = sp.vstack([jac, row], format="csc")
            zc = zc + _solve(mat, -np.concatenate([r, [c, arc]]))
            r, c = system.residual(zc[:n], zc[n], zc[n + 1])
            if np.linalg.norm(r) <= RESIDUAL_TOL and 2 * abs(c) <= NORM_TOL:
                return zc, it
            if not np.isfinite(np.linalg.norm(r)) or np.linalg.norm(r) > 1e6:
                return None, it
        return None, ctl.max_corrector

    while len(branch.points) < ctl.max_points:
        near_start = (
            len(branch.points) > 3
            and travelled > 4 * ctl.max_step
            and _wnorm(z - z_start, h, n) < 1.5 * ds
        )
        z_pred = z_start.copy() if near_start else z + ds * t
        try:
            z_new, its = correct(z_pred, t)
        except SingularJacobian:
            z_new, its = None, ctl.max_corrector
        if z_new is not None:
            t_new = tangent(z_new, w * t)
            if float((w * t) @ t_new) < 0.9:
                z_new = None  # tangent swung too far: probable branch jump
        if z_new is None:
            ds *= 0.5
            if ds < ctl.collapse:
                raise StepCollapse(f"step collapsed near x0={z[n + 1]:.6g}, mu={z[n]:.6g}")
            continue

        x_new = float(z_new[n + 1])
        if not lo <= x_new <= hi:
            break
        travelled += _wnorm(z_new - z, h, n)
        sol = make_solution(trap.at(x_new), seed.Ng0, z_new[:n].copy(), float(z_new[n]), grid, its)
        if np.sign(t_new[n + 1]) != np.sign(t[n + 1]) and t[n + 1] != 0:
            frac = t[n + 1] / (t[n + 1] - t_new[n + 1])
            branch.turning_points.append(float(z[n + 1] + frac * (x_new - z[n + 1])))
            branch.turning_indices.append(len(branch.points))
        branch.points.append((x_new, sol))
        z, t = z_new, t_new

        if near_start:
            ov = abs(float(z[:n] @ z_start[:n]) * h)
            if (
                abs(z[n + 1] - z_start[n + 1]) < ctl.closure_tol
                and abs(z[n] - z_start[n]) < ctl.closure_tol
                and ov > ctl.closure_overlap
            ):
                branch.closed = True
                break

        if its <= 3:
            ds = min(ds * 1.3, ctl.max_step)
        elif its >= 6:
            ds = max(ds * 0.7, ctl.min_step)
    log.debug(
        "branch: %d points, %d turning points, closed=%s",
        len(branch.points), len(branch.turning_points), branch.closed,
    )
    return branch


def count_solutions(
    p: PotentialParams,
    Ng0: float,
    mu_window: tuple[float, float],
    n_starts: int = 16,
    grid: Grid | None = None,
    seed: int = 0,
    basis: str = "lowest",
) -> list[GpeSolution]:
    """Distinct stationary states with ``mu`` in ``mu_window`` found by multistart Newton.

    Starting guesses are normalized mixtures ``cos(a) psi_a + sin(a) psi_b``
    on a 16-angle lattice; starts beyond 16 use random angles with a small
    random admixture of higher eigenstates. With ``basis="lowest"`` the
    pair is the two lowest linear eigenstates, with ``basis="two-mode"``
    the pair from :func:`two_mode_linear_states`. Solutions whose overlap
    exceeds 0.999 in magnitude are one solution. The result is sorted by
    ``mu``.
    """
    if n_starts < 16:
        raise ValueError("n_starts must be at least 16")
    grid = grid or Grid()
    linear = eigensolve(build_h0(sample_potential(p, grid)), 6)
    if basis == "lowest":
        (_, psi_a), (_, psi_b) = linear[:2]
    elif basis == "two-mode":
        (_, psi_a), (_, psi_b) = two_mode_linear_states(p, grid)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    extra = [psi for _, psi in linear]
    rng = np.random.default_rng(seed)

    guesses = []
    for k in range(n_starts):
        if k < 16:
            a = np.pi * k / 16
            vals = np.cos(a) * psi_a.values + np.sin(a) * psi_b.values
        else:
            a = rng.uniform(0, np.pi)
            vals = np.cos(a) * psi_a.values + np.sin(a) * psi_b.values
            for psi in extra:
                vals = vals + 0.05 * rng.standard_normal() * psi.values
        guesses.append(SampledFunction(vals, grid))

    found: list[GpeSolution] = []
    for guess in guesses:
        try:
            s = solve_gpe(p, Ng0, guess, max_iter=60)
        except (NoConvergence, SingularJacobian):
            continue
        if not mu_window[0] <= s.mu <= mu_window[1]:
            continue
        if any(abs(s.phi.inner(f.phi)) > SAME_STATE for f in found):
            continue
        found.append(s)
    return sorted(found, key=lambda s: s.mu)
