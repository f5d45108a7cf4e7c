"""Cached expensive computations shared by the module tests and the acceptance suite."""

from __future__ import annotations

import functools

import numpy as np

from bec_loops import Grid, PotentialParams, SweepProtocol, continue_branch, params_for_trap, solve_gpe
from bec_loops.gpe import StepControl, two_mode_linear_states
from bec_loops.modes import modes_for_trap
from bec_loops.sweep import ParameterLattice, initial_ground_state, project_at_end, propagate

GRID = Grid()
TRAP = PotentialParams(U0=6.4, sigma=0.5, x0=-3.7)
SCAN_X0 = tuple(float(x) for x in np.round(-4.5 + 0.005 * np.arange(321), 10))
GPE_WINDOW = (-3.95, -3.2)
SWEEP_N = 50

# One "criterion <n>: PASS|FAIL ..." line per acceptance criterion, printed in the summary.
ACCEPTANCE: list[str] = []


@functools.lru_cache(maxsize=None)
def base_params(x0: float):
    """Two-mode parameters at ``x0`` with ``g0 = 0, N = 1``."""
    return params_for_trap(TRAP.at(x0), GRID)


def params(x0: float, Ng0: float, N: int):
    return base_params(x0).with_interaction(Ng0 / N, N)


@functools.lru_cache(maxsize=None)
def modes(x0: float):
    return modes_for_trap(TRAP.at(x0), GRID)


@functools.lru_cache(maxsize=None)
def gpe_branches(Ng0: float):
    """Full-GPE branches seeded on both two-mode levels at the right window edge."""
    lo, hi = GPE_WINDOW
    seed_trap = TRAP.at(hi)
    out = {}
    for label, (_, psi) in zip(("lower", "upper"), two_mode_linear_states(seed_trap, GRID)):
        seed = solve_gpe(seed_trap, Ng0, psi)
        out[label] = continue_branch(seed, (lo, hi), StepControl(), direction=-1)
    return out


@functools.lru_cache(maxsize=None)
def lattice(overlap_limit: float = 0.1):
    proto = SweepProtocol()
    return ParameterLattice(TRAP, proto.x0_start, proto.x0_end, GRID, overlap_limit=overlap_limit)


@functools.lru_cache(maxsize=None)
def sweep_run(Ng0: float, dt: float = 1e-3, rate: float = 0.05):
    proto = SweepProtocol(rate=rate, dt=dt)
    lat = lattice() if rate == 0.05 else ParameterLattice(TRAP, proto.x0_start, proto.x0_end, GRID, overlap_limit=0.1)
    g0 = Ng0 / SWEEP_N
    init = initial_ground_state(lat, proto, g0, SWEEP_N)
    res = propagate(init, proto, TRAP, g0, SWEEP_N, lattice=lat)
    return res, project_at_end(res, g0, SWEEP_N)


def mode_angle(phi, x0: float) -> float:
    """Angle ``theta`` of the projection ``(<u1|phi>, <u2|phi>)``, folded into ``(-pi/2, pi/2]``."""
    m = modes(x0)
    a, b = float(m.u1.inner(phi)), float(m.u2.inner(phi))
    t = np.arctan2(b, a)
    t = (t + np.pi / 2) % np.pi - np.pi / 2
    return np.pi / 2 if t <= -np.pi / 2 else float(t)


def angle_distance(a: float, b: float) -> float:
    d = abs(a - b) % np.pi
    return min(d, np.pi - d)
