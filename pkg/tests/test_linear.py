import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bec_loops import Grid, PotentialParams, SampledFunction, build_h0, eigensolve, sample_potential
from bec_loops.errors import GridMismatch
from bec_loops.linear import matrix_element

HARMONIC = PotentialParams(0.0, 0.5, 0.0)

# Two lowest levels at x0 = -3.7 from shift-invert Lanczos on the h/4 grid.
FINE_GRID_LEVELS = (0.4975399883076519, 0.6646628829682117)


def test_stencil_on_constant_potential():
    op = build_h0(SampledFunction(np.zeros(5), Grid(0.0, 4.0, 5)))
    np.testing.assert_array_equal(op.diagonal, np.ones(5))
    np.testing.assert_array_equal(op.off_diagonal, np.full(4, -0.5))


def test_complex_potential_rejected():
    with pytest.raises(ValueError):
        build_h0(SampledFunction(np.full(5, 1j), Grid(0.0, 4.0, 5)))


def test_stencil_reproduces_gaussian_second_derivative():
    errs = []
    for n in (1201, 2401):
        g = Grid(-12, 12, n)
        x = g.x
        psi = np.exp(-((x - 0.3) ** 2))
        v = 0.5 * x**2
        exact = -0.5 * (4 * (x - 0.3) ** 2 - 2) * psi + v * psi
        got = build_h0(SampledFunction(v, g)).apply(psi)
        errs.append(np.max(np.abs(got - exact)[1:-1]))
    assert errs[1] < 1e-4
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_oscillator_levels():
    pairs = eigensolve(build_h0(sample_potential(HARMONIC, Grid())), 6)
    for n, (e, u) in enumerate(pairs):
        assert abs(e - (n + 0.5)) < 1e-4
        assert abs(u.norm2() - 1) < 1e-10


def test_second_order_convergence():
    errs = [
        abs(eigensolve(build_h0(sample_potential(HARMONIC, Grid(-12, 12, n))), 1)[0][0] - 0.5)
        for n in (1201, 2401)
    ]
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_reference_trap_levels_match_fine_grid():
    pairs = eigensolve(build_h0(sample_potential(PotentialParams(), Grid())), 2)
    for (e, _), ref in zip(pairs, FINE_GRID_LEVELS):
        assert abs(e - ref) < 5e-5
    assert 0 < pairs[1][0] - pairs[0][0] < 0.2


def test_eigenpair_invariants():
    op = build_h0(sample_potential(PotentialParams(), Grid()))
    pairs = eigensolve(op, 8)
    energies = [e for e, _ in pairs]
    assert all(b > a for a, b in zip(energies, energies[1:]))
    for e, u in pairs:
        assert np.linalg.norm(op.apply(u.values) - e * u.values) <= 1e-9 * max(1, abs(e))
        i = np.argmax(np.abs(u.values))
        assert u.values[i] > 0


@pytest.mark.parametrize("k", [0, 4802])
def test_eigensolve_k_range(k):
    with pytest.raises(ValueError):
        eigensolve(build_h0(sample_potential(HARMONIC, Grid())), k)


def test_matrix_element_ground_state():
    op = build_h0(sample_potential(HARMONIC, Grid()))
    (_, u0), (_, u1) = eigensolve(op, 2)
    assert abs(matrix_element(u0, op, u0) - 0.5) < 1e-4
    assert abs(matrix_element(u0, op, u1)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matrix_element_hermitian(seed):
    rng = np.random.default_rng(seed)
    g = Grid(-5, 5, 201)
    op = build_h0(SampledFunction(rng.standard_normal(201), g))
    u = SampledFunction(rng.standard_normal(201) + 1j * rng.standard_normal(201), g)
    w = SampledFunction(rng.standard_normal(201) + 1j * rng.standard_normal(201), g)
    assert matrix_element(u, op, w) == pytest.approx(np.conj(matrix_element(w, op, u)), rel=1e-12)


def test_matrix_element_grid_mismatch():
    g1, g2 = Grid(-5, 5, 101), Grid(-5, 5, 103)
    op = build_h0(SampledFunction(np.zeros(101), g1))
    with pytest.raises(GridMismatch):
        matrix_element(SampledFunction(np.ones(103), g2), op, SampledFunction(np.ones(101), g1))
