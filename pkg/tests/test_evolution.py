import numpy as np
import pytest

from cap_dilation.circuit import StateVector, kinetic_block, run_circuit
from cap_dilation.classical import evolve_classical, kinetic_substep, split_step
from cap_dilation.dilation import dilation_circuit
from cap_dilation.evolution import (
    FullAbsorptionError,
    RunConfig,
    project_ancilla_zero,
    run_exact,
    run_repeated,
    run_sampled,
    trotter_block,
)
from cap_dilation.grid import gaussian_well, make_grid, zero_potential

from conftest import phase_aligned_distance, random_state

FREE = RunConfig()


def _setup(cfg=FREE):
    g = cfg.grid()
    V, W = cfg.potentials(g)
    return g, V, W, cfg.initial_state(g)


def test_trotter_block_without_potentials():
    g, _, _, wf = _setup()
    V, W = zero_potential(g), zero_potential(g, "absorbing_potential")
    out = trotter_block(StateVector.from_system(wf.amplitudes), g, V, W, 1.2).amplitudes
    assert np.max(np.abs(out[16:])) == 0.0
    assert phase_aligned_distance(out[:16], kinetic_substep(wf.amplitudes, g, 1.2)) < 1e-12


@pytest.mark.parametrize("v", [0.0, 4.0])
def test_one_block_matches_split_step(v):
    g, _, W, _ = _setup()
    V = gaussian_well(g, -1, 1)
    wf = FREE.with_(v=v).initial_state(g)
    out = trotter_block(StateVector.from_system(wf.amplitudes), g, V, W, 1.2)
    post, p_s = project_ancilla_zero(out)
    ref = split_step(wf, g, V, W, 1.2)
    assert p_s == pytest.approx(ref.physical_norm, abs=1e-12)
    assert phase_aligned_distance(post.amplitudes[:16], ref.amplitudes / np.sqrt(ref.physical_norm)) < 1e-10


def test_ancilla_one_mass():
    g, _, W, wf = _setup()
    V = gaussian_well(g, -1, 1)
    out = trotter_block(StateVector.from_system(wf.amplitudes), g, V, W, 1.2).amplitudes
    psi1 = kinetic_substep(wf.amplitudes, g, 1.2) * np.exp(-1j * V.values * 1.2)
    expected = 1 - np.vdot(psi1, np.exp(-2 * W.values * 1.2) * psi1).real
    assert np.vdot(out[16:], out[16:]).real == pytest.approx(expected, abs=1e-12)


def test_trotter_block_dimension_check():
    g, V, W, wf = _setup()
    with pytest.raises(ValueError):
        trotter_block(StateVector(wf.amplitudes), g, V, W, 1.2)


def test_project_ancilla_zero_cases(rng):
    psi = random_state(rng, 8)
    s, p = project_ancilla_zero(StateVector.from_system(psi))
    assert p == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(s.amplitudes[:8], psi, atol=1e-15)
    s, p = project_ancilla_zero(StateVector(np.concatenate([psi, psi]) / np.sqrt(2)))
    assert p == pytest.approx(0.5, abs=1e-14)
    assert s.norm() == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(FullAbsorptionError):
        project_ancilla_zero(StateVector(np.concatenate([np.zeros(8), psi])))


def test_projection_after_dilation(rng):
    W = rng.uniform(0, 2, 8)
    psi = random_state(rng, 8)
    out = run_circuit(StateVector.from_system(psi), dilation_circuit(W, 0.7))
    _, p_s = project_ancilla_zero(out)
    assert p_s == pytest.approx(np.vdot(psi, np.exp(-1.4 * W) * psi).real, abs=1e-12)


def test_success_is_one_off_absorber_support(rng):
    g, _, W, _ = _setup()
    psi = np.zeros(16, dtype=complex)
    psi[4:12] = random_state(rng, 8)
    _, p_s = project_ancilla_zero(run_circuit(StateVector.from_system(psi), dilation_circuit(W, 1.2)))
    assert p_s == pytest.approx(1.0, abs=1e-12)
    psi[3] = 0.2
    psi /= np.linalg.norm(psi)
    _, p_s = project_ancilla_zero(run_circuit(StateVector.from_system(psi), dilation_circuit(W, 1.2)))
    assert p_s < 1 - 1e-6


def test_run_exact_no_cap():
    res = run_exact(FREE.with_(U0=0.0))
    np.testing.assert_allclose(res.cumulative_success, 1.0, atol=1e-12)


@pytest.mark.parametrize(
    "cfg",
    [FREE, FREE.with_(v=4.0), FREE.with_(potential="gaussian_well", n_steps=30), FREE.with_(n=5, dt=0.4, n_steps=12)],
)
def test_run_exact_matches_classical(cfg):
    g, V, W, wf = _setup(cfg)
    res = run_exact(cfg)
    traj = evolve_classical(g, V, W, wf, cfg.dt, cfg.n_steps)
    assert np.max(np.abs(res.cumulative_success - traj.norms)) < 1e-10
    for snap, psi in zip(traj.snapshots, res.snapshots):
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)
        assert phase_aligned_distance(psi, snap.amplitudes / np.sqrt(snap.physical_norm)) < 1e-10
    assert res.cumulative_success[0] == 1.0
    assert np.all(np.diff(res.cumulative_success) <= 1e-15)
    assert np.all((res.per_step_success > 0) & (res.per_step_success <= 1 + 1e-12))


def test_turro_halves_each_step():
    res = run_exact(FREE.with_(U0=0.0, prescription="turro", n_steps=10))
    np.testing.assert_allclose(res.per_step_success, 0.5, rtol=0, atol=1e-14)
    np.testing.assert_allclose(res.cumulative_success, 2.0 ** -np.arange(11), rtol=1e-13, atol=0)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(dt=0)
    with pytest.raises(ValueError):
        RunConfig(mode="sampled", shots=0)
    with pytest.raises(ValueError):
        RunConfig(prescription="other")


def test_sampled_no_cap_accepts_everything():
    res = run_sampled(FREE.with_(U0=0.0, mode="sampled", shots=500))
    assert res.accepted_count == 500
    assert res.histogram.sum() == 500


def test_sampled_is_deterministic():
    cfg = FREE.with_(mode="sampled", shots=4096, seed=9)
    a, b = run_sampled(cfg), run_sampled(cfg)
    assert a.accepted_count == b.accepted_count
    np.testing.assert_array_equal(a.histogram, b.histogram)
    np.testing.assert_array_equal(a.survivors, b.survivors)


def test_sampled_invariants():
    res = run_sampled(FREE.with_(mode="sampled", shots=3000, seed=4))
    assert res.accepted_count <= res.total_shots
    assert res.histogram.sum() == res.accepted_count
    assert np.all(np.diff(res.survivors) <= 0)


def test_zero_accepted_is_flagged():
    results = [run_sampled(FREE.with_(mode="sampled", shots=1, seed=s)) for s in range(20)]
    empty = [r for r in results if r.zero_accepted]
    assert empty, "with P_s ~ 0.49, some of 20 single-shot runs must be rejected"
    for r in empty:
        assert r.histogram.sum() == 0
        assert np.all(r.frequencies == 0)


def test_literal_sampler_agrees_with_factorized():
    cfg = FREE.with_(mode="sampled", shots=400, seed=3)
    exact = run_exact(cfg).cumulative_success
    lit = run_sampled(cfg, literal=True)
    fact = run_sampled(cfg)
    for res in (lit, fact):
        sd = np.sqrt(exact * (1 - exact) / cfg.shots)
        assert np.all(np.abs(res.empirical_series - exact) <= 5 * sd + 1e-12)
        assert res.histogram.sum() == res.accepted_count


def test_histogram_close_to_exact():
    cfg = FREE.with_(v=4.0, mode="sampled", shots=1 << 14, seed=77)
    res = run_sampled(cfg)
    probs = np.abs(res.exact.final_state) ** 2
    a = res.accepted_count
    assert np.all(np.abs(res.histogram - a * probs) <= 4 * np.sqrt(a * probs * (1 - probs)) + 1e-9)


def test_repeated_runs_shape():
    rep = run_repeated(FREE.with_(mode="sampled", shots=256, seed=5), 6)
    assert rep.success_matrix.shape == (6, FREE.n_steps + 1)
    assert rep.success_std.shape == (FREE.n_steps + 1,)
    np.testing.assert_allclose(rep.success_matrix[:, 0], 1.0)
    assert rep.runs[0].error_bars is not None and rep.runs[0].error_bars.shape == (16,)
    seeds_differ = len({r.accepted_count for r in rep.runs}) > 1
    assert seeds_differ
