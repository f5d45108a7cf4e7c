import warnings

import numpy as np
import pytest
from scipy.integrate import simpson

from bec_loops import Grid, PotentialParams, SampledFunction, build_h0, sample_potential
from bec_loops.errors import GridMismatch, NoBoundMode
from bec_loops.grid import eval_potential, locate_wells
from bec_loops.linear import eigensolve
from bec_loops.modes import (
    ModeOverlapWarning,
    TwoModeParams,
    build_modes,
    load_tabulated,
    modes_for_sampled,
    modes_for_trap,
    params_for_trap,
    split_potential,
    two_mode_params,
)

REF_TRAP = PotentialParams(6.4, 0.5, -3.7)


@pytest.fixture(scope="module")
def ref_modes():
    return modes_for_trap(REF_TRAP, Grid())


def symmetric_well(grid: Grid) -> SampledFunction:
    x = grid.x
    return SampledFunction(0.5 * (x**2 - 4.0) ** 2 / 4.0, grid)


def test_split_flattens_far_side(ref_modes):
    g = Grid()
    w = locate_wells(REF_TRAP, g)
    left, right = split_potential(REF_TRAP, g, w)
    ib = g.index_of(w.barrier_top)
    vb = sample_potential(REF_TRAP, g).values[ib]
    assert np.all(left.values[ib:] == vb)
    assert np.all(right.values[: ib + 1] == vb)
    assert left.values[ib:].max() == vb
    full = sample_potential(REF_TRAP, g).values
    assert left.values[g.index_of(w.left_min)] == full[g.index_of(w.left_min)]
    assert right.values[g.index_of(w.right_min)] == full[g.index_of(w.right_min)]


def test_modes_normalized_and_positive(ref_modes):
    g = Grid()
    w = ref_modes.geometry
    for u, x_min in ((ref_modes.u1, w.left_min), (ref_modes.u2, w.right_min)):
        assert abs(u.norm2() - 1) < 1e-10
        assert u.values[g.index_of(x_min)] > 0


@pytest.mark.xfail(strict=True, reason="overlap is 2.6e-2 at x0=-3.7; see the decisions ledger")
def test_reference_overlap_below_threshold(ref_modes):
    assert abs(ref_modes.u1.inner(ref_modes.u2)) < 1e-2


def test_reference_trap_overlap_small_but_monitored():
    p = params_for_trap(REF_TRAP, Grid())
    assert abs(p.overlap - 0.02551044896812252) < 1e-9
    assert p.overlap_warning
    far = params_for_trap(REF_TRAP.at(-5.0), Grid())
    assert abs(far.overlap) < 1e-2 and not far.overlap_warning


def test_overlap_warning_emitted(ref_modes):
    with pytest.warns(ModeOverlapWarning):
        two_mode_params(ref_modes.u1, ref_modes.u2, ref_modes.h0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        p = two_mode_params(ref_modes.u1, ref_modes.u2, ref_modes.h0, overlap_threshold=0.1)
    assert not p.overlap_warning


def test_omega_against_simpson_quadrature(ref_modes):
    g = Grid()
    u1, u2 = ref_modes.u1.values, ref_modes.u2.values
    # Kinetic term by parts with independent derivatives, then Simpson.
    d1 = np.gradient(u1, g.h, edge_order=2)
    d2 = np.gradient(u2, g.h, edge_order=2)
    half = simpson(0.5 * d1 * d2 + eval_potential(REF_TRAP, g.x) * u1 * u2, x=g.x)
    p = params_for_trap(REF_TRAP, g)
    assert abs(p.Omega / 2 - half) < 1e-6
    assert p.Omega < 0


def test_params_bounds(ref_modes):
    p = params_for_trap(REF_TRAP, Grid())
    e0 = eigensolve(ref_modes.h0, 1)[0][0]
    assert p.E1 >= e0 and p.E2 >= e0
    assert p.V1 > 0 and p.V2 > 0


def test_zero_interaction_gives_zero_interaction_terms():
    p = params_for_trap(REF_TRAP, Grid(), g0=0.0, N=7)
    assert p.g0 == 0 and p.Ng0 == 0


def test_grid_mismatch():
    g1, g2 = Grid(-5, 5, 101), Grid(-5, 5, 103)
    u = SampledFunction(np.ones(101), g1)
    op = build_h0(SampledFunction(np.zeros(103), g2))
    with pytest.raises(GridMismatch):
        two_mode_params(u, u, op)


def test_no_bound_mode():
    g = Grid(-5, 5, 501)
    # Shallow, narrow side well: the ground state sits above the plateau.
    x = g.x
    v = SampledFunction(0.5 * x**2 - 0.3 * np.exp(-((x + 3) ** 2) / 0.01), g)
    left = SampledFunction(np.where(x <= -2.5, v.values, v.values[g.index_of(-2.5)]), g)
    with pytest.raises(NoBoundMode):
        build_modes(left, v)


def test_symmetric_tabulated_well(tmp_path):
    g = Grid(-6, 6, 2401)
    v = symmetric_well(g)
    path = tmp_path / "well.txt"
    np.savetxt(path, np.column_stack([g.x, v.values]), header="x V")
    loaded = load_tabulated(path)
    assert loaded.grid == g
    m = modes_for_sampled(loaded)
    np.testing.assert_allclose(m.u2.values, m.u1.values[::-1], atol=1e-8)
    p = two_mode_params(m.u1, m.u2, m.h0, overlap_threshold=0.1)
    assert abs(p.E1 - p.E2) < 1e-8 and abs(p.V1 - p.V2) < 1e-8


def test_load_tabulated_csv(tmp_path):
    g = Grid(-6, 6, 25)
    path = tmp_path / "well.csv"
    path.write_text("".join(f"{float(x)!r},{float(v)!r}\n" for x, v in zip(g.x, symmetric_well(g).values)))
    assert np.array_equal(load_tabulated(path).values, symmetric_well(g).values)


def test_load_tabulated_rejects_nonuniform(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 1\n1 2\n3 4\n")
    with pytest.raises(ValueError):
        load_tabulated(path)


def test_two_mode_params_validation():
    with pytest.raises(ValueError):
        TwoModeParams(0.0, 0.0, 0.1, -1.0, 1.0)
    with pytest.raises(ValueError):
        TwoModeParams(0.0, 0.0, 0.1, 1.0, 1.0, N=0)
