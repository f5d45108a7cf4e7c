import numpy as np
import pytest

from _shared import GRID, SWEEP_N, TRAP, lattice, sweep_run
from bec_loops import SweepProtocol, WindowExit, propagate, spectrum
from bec_loops.quantum import FockVector
from bec_loops.sweep import (
    OverlapDistribution,
    ParameterLattice,
    binomial_populations,
    final_overlaps,
    initial_ground_state,
    single_particle_oracle,
    total_variation,
)


def short_protocol(**kw):
    base = dict(x0_start=-5.0, rate=0.05, t_end=4.0, dt=1e-3)
    base.update(kw)
    return SweepProtocol(**base)


def test_protocol_reaches_endpoint():
    p = SweepProtocol()
    assert p.x0_end == 0.0
    assert p.x0_at(100.0) == 0.0
    with pytest.raises(ValueError):
        SweepProtocol(dt=0.0)


def test_lattice_window_and_interpolation():
    lat = lattice()
    assert lat.truncated and "overlap" in lat.exit_reason
    assert -3.2 < lat.x0_last < -3.0
    np.testing.assert_allclose(np.diff(lat.nodes), 0.01, atol=1e-12)
    # Interpolation reproduces a node value and the spline integral matches quadrature.
    p = lat.params[37]
    assert float(lat("E1", lat.nodes[37])) == pytest.approx(p.E1, abs=1e-13)
    xs = np.linspace(-5.0, -4.0, 2001)
    ref = np.trapezoid(lat("Omega", xs), xs) if hasattr(np, "trapezoid") else np.trapz(lat("Omega", xs), xs)
    assert float(lat.integral("Omega", -5.0, -4.0)) == pytest.approx(ref, abs=1e-9)


def test_lattice_strict_threshold_truncates_early():
    lat = ParameterLattice(TRAP, -5.0, 0.0, GRID, overlap_limit=1e-2)
    assert lat.x0_last < -4.2


def test_frozen_hamiltonian_keeps_eigenstate():
    lat = lattice()
    proto = short_protocol(rate=0.0, t_end=5.0)
    g0 = 1.0 / 10
    _, vecs = spectrum(lat.two_mode_params(-5.0, g0, 10))
    res = propagate(vecs[3], proto, TRAP, g0, 10, lattice=lat)
    np.testing.assert_allclose(res.populations, np.tile(vecs[3].populations, (len(res.times), 1)), atol=1e-9)
    dist = final_overlaps(res.final, lat.two_mode_params(-5.0, g0, 10))
    assert abs(dist.probabilities[3] - 1) < 1e-9


def test_initial_state_is_ground_state():
    lat = lattice()
    g0 = 1.0 / SWEEP_N
    init = initial_ground_state(lat, SweepProtocol(), g0, SWEEP_N)
    dist = final_overlaps(init, lat.two_mode_params(-5.0, g0, SWEEP_N))
    assert abs(dist.probabilities[0] - 1) < 1e-12
    assert np.all(dist.probabilities[1:] < 1e-12)


def test_rejects_bad_initial_state():
    lat = lattice()
    with pytest.raises(ValueError):
        propagate(FockVector(np.ones(11), 10), short_protocol(), TRAP, 0.0, 10, lattice=lat)
    with pytest.raises(ValueError):
        propagate(FockVector(np.eye(12)[0], 11), short_protocol(), TRAP, 0.0, 10, lattice=lat)


def test_strict_window_exit():
    lat = lattice()
    init = initial_ground_state(lat, SweepProtocol(), 0.0, 4)
    with pytest.raises(WindowExit):
        propagate(init, SweepProtocol(), TRAP, 0.0, 4, lattice=lat, strict=True)


def test_noninteracting_binomial_law():
    res, _ = sweep_run(0.0)
    a, b = single_particle_oracle(SweepProtocol(), res.lattice, res.t_final)
    assert abs(abs(a) ** 2 + abs(b) ** 2 - 1) < 1e-10
    assert total_variation(binomial_populations(a, b, SWEEP_N), res.final.populations) < 1e-6
    assert res.truncated and res.x0_final == pytest.approx(res.lattice.x0_last)


def test_binomial_law_at_intermediate_times():
    lat = lattice()
    proto = short_protocol(t_end=30.0)
    init = initial_ground_state(lat, proto, 0.0, 12)
    res = propagate(init, proto, TRAP, 0.0, 12, lattice=lat, sample_every=10.0)
    for t, pops in zip(res.times[1:], res.populations[1:]):
        a, b = single_particle_oracle(proto, lat, t)
        assert total_variation(binomial_populations(a, b, 12), pops) < 1e-8


@pytest.mark.parametrize("Ng0", [0.0, 1.0, -1.0])
def test_unitarity(Ng0):
    res, _ = sweep_run(Ng0)
    assert res.norm_drift / res.t_final < 1e-9


def test_step_size_convergence():
    coarse, _ = sweep_run(1.0)
    fine, _ = sweep_run(1.0, dt=5e-4)
    assert coarse.t_final == fine.t_final
    assert np.max(np.abs(coarse.final.populations - fine.final.populations)) < 1e-6


def test_linearity():
    lat = lattice()
    proto = short_protocol(t_end=10.0, x0_start=-4.0)
    lat_s = ParameterLattice(TRAP, proto.x0_start, proto.x0_end, GRID, overlap_limit=0.1)
    g0, N = 0.0, 6
    _, vecs = spectrum(lat_s.two_mode_params(-4.0, g0, N))
    alpha, beta = 0.6, 0.8j
    mix = FockVector(alpha * vecs[0].amplitudes + beta * vecs[2].amplitudes, N)
    runs = [propagate(v, proto, TRAP, g0, N, lattice=lat_s).final.amplitudes for v in (vecs[0], vecs[2], mix)]
    np.testing.assert_allclose(runs[2], alpha * runs[0] + beta * runs[1], atol=1e-12)


def test_deterministic_trajectories():
    lat = lattice()
    proto = short_protocol(t_end=3.0)
    init = initial_ground_state(lat, proto, 0.02, 50)
    a = propagate(init, proto, TRAP, 0.02, 50, lattice=lat)
    b = propagate(init, proto, TRAP, 0.02, 50, lattice=lat)
    assert np.array_equal(a.populations, b.populations)
    assert np.array_equal(a.final.amplitudes, b.final.amplitudes)


def test_overlap_distribution_properties():
    _, dist = sweep_run(1.0)
    assert np.all((dist.probabilities >= 0) & (dist.probabilities <= 1))
    assert abs(dist.probabilities.sum() - 1) < 1e-6
    assert dist.basis_tag.startswith("instantaneous x0=")
    assert np.all(np.diff(dist.energies) > 0)


def test_top_fraction_uses_floor():
    d = OverlapDistribution(np.r_[np.zeros(41), np.full(10, 0.1)], "t")
    assert d.top_fraction_weight(0.2) == pytest.approx(1.0)
    assert OverlapDistribution(np.array([0.5, 0.5]), "t").top_fraction_weight(0.2) == 0.5


def test_binomial_edges():
    np.testing.assert_array_equal(binomial_populations(1.0, 0.0, 3), [0, 0, 0, 1])
    np.testing.assert_array_equal(binomial_populations(0.0, 1.0, 3), [1, 0, 0, 0])
    assert binomial_populations(0.6, 0.8j, 40).sum() == pytest.approx(1.0, abs=1e-12)
