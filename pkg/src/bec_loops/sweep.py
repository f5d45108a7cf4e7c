"""Laser sweep of the trap, ``x0(t) = x0_start + rate * t``, in the Fock basis.

The two-mode parameters are tabulated on a fine ``x0`` lattice and
interpolated with cubic splines. Propagation uses fixed-step classical RK4
in the interaction picture of the diagonal (on-site plus interaction) part
of the Hamiltonian; the diagonal phases are integrated exactly from the
spline antiderivatives, so RK4 only has to resolve the tunneling coupling.
This keeps the norm drift at roundoff level for the default step.

The sweep only runs while a double well exists and the two local modes
stay nearly orthogonal. When either fails, the trajectory is truncated at
the last valid lattice point and projected there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gammaln

from .errors import BecLoopsError, WindowExit
from .grid import Grid, PotentialParams
from .modes import ModeOverlapWarning, TwoModeParams, params_for_trap
from .quantum import FockVector, diagonalize, fock_bands, spectrum

LATTICE_SPACING = 0.01
OVERLAP_LIMIT = 0.1


@dataclass(frozen=True)
class SweepProtocol:
    x0_start: float = -5.0
    rate: float = 0.05
    t_end: float = 100.0
    dt: float = 1e-3

    def __post_init__(self):
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def x0_end(self) -> float:
        return self.x0_start + self.rate * self.t_end

    def x0_at(self, t):
        return self.x0_start + self.rate * np.asarray(t)


class ParameterLattice:
    """Two-mode parameters on an ``x0`` lattice with cubic interpolation.

    Built once along the sweep direction and read-only afterwards. The
    lattice stops before the first node where the wells or modes fail or
    the mode overlap exceeds ``overlap_limit``.
    """

    def __init__(
        self,
        trap: PotentialParams,
        x0_start: float,
        x0_end: float,
        grid: Grid | None = None,
        spacing: float = LATTICE_SPACING,
        overlap_limit: float = OVERLAP_LIMIT,
    ):
        self.trap = trap
        self.grid = grid or Grid()
        self.overlap_limit = overlap_limit
        span = x0_end - x0_start
        n = int(math.floor(abs(span) / spacing + 1e-9))
        nodes = x0_start + math.copysign(spacing, span) * np.arange(n + 1) if n else np.array([x0_start])
        if abs(span) > 0 and not math.isclose(nodes[-1], x0_end, abs_tol=1e-12):
            nodes = np.append(nodes, x0_end)

        self.params: list[TwoModeParams] = []
        self.exit_reason: str | None = None
        for x0 in nodes:
            try:
                p = params_for_trap(trap.at(x0), self.grid, overlap_threshold=overlap_limit)
            except BecLoopsError as exc:
                self.exit_reason = f"{type(exc).__name__} at x0={x0:.6g}: {exc}"
                break
            if p.overlap_warning:
                self.exit_reason = f"mode overlap {p.overlap:.3e} > {overlap_limit:g} at x0={x0:.6g}"
                break
            self.params.append(p)
        if not self.params:
            raise WindowExit(self.exit_reason or "no valid lattice node")
        self.nodes = np.asarray(nodes[: len(self.params)], dtype=float)
        self.truncated = self.exit_reason is not None
        cols = {
            "E1": [p.E1 for p in self.params],
            "E2": [p.E2 for p in self.params],
            "Omega": [p.Omega for p in self.params],
            "invV1": [1.0 / p.V1 for p in self.params],
            "invV2": [1.0 / p.V2 for p in self.params],
        }
        self._values = {k: np.asarray(v) for k, v in cols.items()}
        self._splines = {}
        if self.nodes.size >= 2:
            order = np.argsort(self.nodes)
            for k, v in self._values.items():
                self._splines[k] = CubicSpline(self.nodes[order], v[order])

    @property
    def x0_last(self) -> float:
        return float(self.nodes[-1])

    def __call__(self, name: str, x0):
        if name in self._splines:
            return self._splines[name](x0)
        return np.full(np.shape(x0), self._values[name][0])

    def integral(self, name: str, x0_a: float, x0_b):
        """``integral_{x0_a}^{x0_b} f(x0) dx0`` of an interpolated parameter."""
        if name in self._splines:
            anti = self._splines[name].antiderivative()
            return anti(x0_b) - anti(x0_a)
        return self._values[name][0] * (np.asarray(x0_b) - x0_a)

    def two_mode_params(self, x0: float, g0: float, N: int) -> TwoModeParams:
        """Interpolated parameters at ``x0`` (mode overlap not tracked)."""
        return TwoModeParams(
            E1=float(self("E1", x0)),
            E2=float(self("E2", x0)),
            Omega=float(self("Omega", x0)),
            V1=1.0 / float(self("invV1", x0)),
            V2=1.0 / float(self("invV2", x0)),
            g0=float(g0),
            N=int(N),
        )


@dataclass(frozen=True, eq=False)
class SweepResult:
    times: np.ndarray
    x0: np.ndarray
    populations: np.ndarray
    final: FockVector
    t_final: float
    x0_final: float
    truncated: bool
    exit_reason: str | None
    norm_drift: float
    lattice: ParameterLattice = field(repr=False)


@dataclass(frozen=True)
class OverlapDistribution:
    probabilities: np.ndarray
    basis_tag: str
    energies: np.ndarray | None = None

    def top_fraction_weight(self, fraction: float = 0.2) -> float:
        """Total probability on the highest ``floor(fraction * dim)`` eigenstates."""
        k = max(1, int(math.floor(fraction * self.probabilities.size + 1e-9)))
        return float(np.sum(self.probabilities[-k:]))


def _diag_coefficients(N: int):
    n = np.arange(N + 1, dtype=float)
    m = N - n
    return n, m, 0.5 * n * (n - 1), 0.5 * m * (m - 1)


class _Phases:
    """Exact ``integral_0^t diag(t') dt'`` for every Fock index."""

    def __init__(self, lattice: ParameterLattice, protocol: SweepProtocol, g0: float, N: int):
        self.lat = lattice
        self.proto = protocol
        self.g0 = g0
        self.coef = _diag_coefficients(N)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        proto, lat = self.proto, self.lat
        if proto.rate == 0:
            ints = {k: lat(k, proto.x0_start) * t for k in ("E1", "E2", "invV1", "invV2")}
        else:
            xb = proto.x0_at(t)
            ints = {k: lat.integral(k, proto.x0_start, xb) / proto.rate for k in ("E1", "E2", "invV1", "invV2")}
        n, m, nn, mm = self.coef
        return (
            ints["E1"][:, None] * n
            + ints["E2"][:, None] * m
            + self.g0 * ints["invV1"][:, None] * nn
            + self.g0 * ints["invV2"][:, None] * mm
        )


def valid_duration(protocol: SweepProtocol, lattice: ParameterLattice) -> float:
    if protocol.rate == 0 or not lattice.truncated:
        return protocol.t_end
    return min(protocol.t_end, (lattice.x0_last - protocol.x0_start) / protocol.rate)


def initial_ground_state(lattice: ParameterLattice, protocol: SweepProtocol, g0: float, N: int) -> FockVector:
    """Ground eigenvector of the Fock Hamiltonian at the sweep start."""
    _, vecs = spectrum(lattice.two_mode_params(protocol.x0_start, g0, N))
    return vecs[0]


def propagate(
    initial: FockVector,
    protocol: SweepProtocol,
    trap: PotentialParams,
    g0: float,
    N: int,
    grid: Grid | None = None,
    lattice: ParameterLattice | None = None,
    sample_every: float = 1.0,
    strict: bool = False,
) -> SweepResult:
    """Integrate ``i d psi/dt = H(x0(t)) psi`` from ``initial``.

    Populations are sampled every ``sample_every`` time units and at the
    final time. If the parameter window ends before ``t_end`` the result is
    marked truncated; with ``strict=True`` a :class:`WindowExit` is raised
    instead.
    """
    if initial.N != N:
        raise ValueError(f"initial state has N={initial.N}, expected {N}")
    norm0 = initial.norm()
    if abs(norm0 - 1) > 1e-9:
        raise ValueError(f"initial state is not normalized (norm {norm0:.12g})")
    if lattice is None:
        lattice = ParameterLattice(trap, protocol.x0_start, protocol.x0_end, grid)
    t_valid = valid_duration(protocol, lattice)
    if strict and lattice.truncated:
        raise WindowExit(lattice.exit_reason)

    dt = protocol.dt
    n_steps = int(math.floor(t_valid / dt + 1e-9))
    stride = max(1, int(round(sample_every / dt)))
    phases = _Phases(lattice, protocol, g0, N)
    sq = np.sqrt((np.arange(N) + 1.0) * (N - np.arange(N)))

    # Coupling magnitudes at every half step; phases follow the same times.
    t_half = 0.5 * dt * np.arange(2 * n_steps + 1)
    x_half = protocol.x0_at(t_half) if protocol.rate else np.full(t_half.shape, protocol.x0_start)
    omega_half = 0.5 * np.asarray(lattice("Omega", x_half), dtype=float)

    def phase_block(i0: int, i1: int) -> np.ndarray:
        return phases(t_half[i0:i1])

    amps = initial.amplitudes.copy()
    times, x0s, pops = [0.0], [protocol.x0_start], [np.abs(amps) ** 2]
    max_drift = 0.0
    block = 2000
    step = 0
    while step < n_steps:
        s1 = min(step + block, n_steps)
        ph = phase_block(2 * step, 2 * s1 + 1)
        rot = np.exp(1j * (ph[:, 1:] - ph[:, :-1]))  # e^{i(theta_{n+1}-theta_n)}
        for k in range(step, s1):
            j = 2 * (k - step)
            c0 = omega_half[2 * k] * sq
            c1 = omega_half[2 * k + 1] * sq
            c2 = omega_half[2 * k + 2] * sq
            r0, r1, r2 = rot[j], rot[j + 1], rot[j + 2]

            def f(c, r, y):
                # -i H_I y with H_I[n, n+1] = c_n e^{i(theta_n - theta_{n+1})}
                out = np.zeros_like(y)
                out[:-1] = c * np.conj(r) * y[1:]
                out[1:] += c * r * y[:-1]
                return -1j * out

            k1 = f(c0, r0, amps)
            k2 = f(c1, r1, amps + 0.5 * dt * k1)
            k3 = f(c1, r1, amps + 0.5 * dt * k2)
            k4 = f(c2, r2, amps + dt * k3)
            amps = amps + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if (k + 1) % stride == 0 or k + 1 == n_steps:
                t = (k + 1) * dt
                times.append(t)
                x0s.append(float(protocol.x0_at(t)))
                pops.append(np.abs(amps) ** 2)
                max_drift = max(max_drift, abs(np.linalg.norm(amps) - norm0))
        step = s1

    t_final = n_steps * dt
    lab = amps * np.exp(-1j * phases(np.array([t_final]))[0])
    final = FockVector(lab, N)
    max_drift = max(max_drift, abs(final.norm() - norm0))
    return SweepResult(
        times=np.asarray(times),
        x0=np.asarray(x0s),
        populations=np.vstack(pops),
        final=final,
        t_final=t_final,
        x0_final=float(protocol.x0_at(t_final)),
        truncated=lattice.truncated and t_valid < protocol.t_end,
        exit_reason=lattice.exit_reason if t_valid < protocol.t_end else None,
        norm_drift=max_drift,
        lattice=lattice,
    )


def final_overlaps(state: FockVector, projection: TwoModeParams, basis_tag: str | None = None) -> OverlapDistribution:
    """``|<n|state>|^2`` over eigenstates of ``projection``, ascending in energy."""
    w, vecs = spectrum(projection)
    probs = np.array([abs(np.vdot(v.amplitudes, state.amplitudes)) ** 2 for v in vecs])
    tag = basis_tag or "eigenstates of supplied two-mode parameters"
    return OverlapDistribution(probs, tag, w)


def project_at_end(result: SweepResult, g0: float, N: int) -> OverlapDistribution:
    """Project the final state on the instantaneous eigenstates at ``x0_final``."""
    p = result.lattice.two_mode_params(result.x0_final, g0, N)
    tag = f"instantaneous x0={result.x0_final:.6f}"
    return final_overlaps(result.final, p, tag)


# --- independent oracle for the noninteracting sweep -----------------------


def single_particle_oracle(protocol: SweepProtocol, lattice: ParameterLattice, t_final: float):
    """Mode amplitudes ``(a, b)`` of one particle swept through the 2x2 problem.

    Starts in the lower eigenvector at ``x0_start`` and integrates in the
    lab frame with an adaptive high-order method, independently of the
    Fock-space propagator.
    """
    from scipy.integrate import solve_ivp

    x_s = protocol.x0_start
    h0 = np.array(
        [[lattice("E1", x_s), 0.5 * lattice("Omega", x_s)], [0.5 * lattice("Omega", x_s), lattice("E2", x_s)]],
        dtype=float,
    )
    _, vecs = np.linalg.eigh(h0)
    y0 = vecs[:, 0].astype(complex)

    def rhs(t, y):
        x = protocol.x0_at(t) if protocol.rate else x_s
        e1, e2 = float(lattice("E1", x)), float(lattice("E2", x))
        om = 0.5 * float(lattice("Omega", x))
        return -1j * np.array([e1 * y[0] + om * y[1], om * y[0] + e2 * y[1]])

    sol = solve_ivp(rhs, (0.0, t_final), y0, method="DOP853", rtol=1e-12, atol=1e-14)
    a, b = sol.y[:, -1]
    return complex(a), complex(b)


def binomial_populations(a: complex, b: complex, N: int) -> np.ndarray:
    """Fock populations of ``N`` independent bosons with mode amplitudes ``(a, b)``."""
    pa, pb = abs(a) ** 2, abs(b) ** 2
    total = pa + pb
    pa, pb = pa / total, pb / total
    n = np.arange(N + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        logc = gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1)
        logp = logc + n * np.log(pa) + (N - n) * np.log(pb)
    out = np.exp(logp)
    out[~np.isfinite(out)] = 0.0
    if pa == 0:
        out[:] = 0.0
        out[0] = 1.0
    if pb == 0:
        out[:] = 0.0
        out[-1] = 1.0
    return out


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
