import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cap_dilation.circuit import GateKind, circuit_unitary
from cap_dilation.dilation import (
    DilationAngles,
    angle_transform,
    dilation_angles,
    dilation_circuit,
    dilation_unitary,
    gray_ladder_controls,
    multiplexed_ry_circuit,
    turro_circuit,
    turro_dilation,
)
from cap_dilation.grid import PotentialField, cap_potential, make_grid

from conftest import random_state


def test_angles_special_values():
    th = dilation_angles(np.array([0.0, np.log(2), 1e6, 0.0]), 1.0).theta
    assert th[0] == 0.0
    assert th[1] == pytest.approx(np.pi / 3)
    assert th[2] == pytest.approx(np.pi / 2)


def test_angles_reject_negative_absorption():
    with pytest.raises(ValueError):
        dilation_angles(np.array([0.1, -0.1]), 1.0)
    with pytest.raises(ValueError):
        DilationAngles(np.array([0.1, 2.0]))


@settings(max_examples=50, deadline=None)
@given(w=st.lists(st.floats(0, 50), min_size=4, max_size=4), dt=st.floats(1e-3, 5))
def test_angle_invariants(w, dt):
    th = dilation_angles(np.array(w), dt).theta
    c = np.exp(-np.array(w) * dt)
    np.testing.assert_allclose(np.cos(th), c, atol=1e-12)
    np.testing.assert_allclose(np.sin(th), np.sqrt(1 - c**2), atol=1e-7)
    assert np.all((th >= 0) & (th <= np.pi / 2))


def test_dilation_unitary_zero_absorption():
    np.testing.assert_array_equal(dilation_unitary(np.zeros(4), 0.7), np.eye(8))


def test_dilation_unitary_ln2():
    D = dilation_unitary(np.full(2, np.log(2)), 1.0)
    np.testing.assert_allclose(np.diag(D), 0.5)
    np.testing.assert_allclose(D[0, 2], np.sqrt(3) / 2)
    np.testing.assert_allclose(D[2, 0], -np.sqrt(3) / 2)
    np.testing.assert_allclose(D.T @ D, np.eye(4), atol=1e-12)


def test_dilation_unitary_block(rng):
    W = rng.uniform(0, 2, 4)
    D = dilation_unitary(W, 0.9)
    np.testing.assert_allclose(D[:4, :4], np.diag(np.exp(-W * 0.9)), rtol=0, atol=1e-16)
    assert np.max(np.abs(D.T @ D - np.eye(8))) < 1e-12


def test_angle_transform_hand_cases():
    np.testing.assert_allclose(angle_transform(np.full(8, 0.4)), [0.4] + [0] * 7, atol=1e-15)
    np.testing.assert_allclose(angle_transform(np.array([3.0, 1.0])), [2.0, 1.0])


def test_angle_transform_rejects_bad_length():
    with pytest.raises(ValueError):
        angle_transform(np.ones(3))
    with pytest.raises(ValueError):
        multiplexed_ry_circuit(np.ones(6) * 0.1)


def test_gray_ladder_controls():
    assert gray_ladder_controls(2) == [0, 1, 0, 1]
    assert gray_ladder_controls(3) == [0, 1, 0, 2, 0, 1, 0, 2]


def test_equal_angles_collapse():
    th = np.full(4, 0.3)
    mr = multiplexed_ry_circuit(th)
    np.testing.assert_allclose(mr.alpha, [-0.6, 0, 0, 0], atol=1e-15)
    W = -np.log(np.cos(th))
    assert np.max(np.abs(circuit_unitary(mr.circuit) - dilation_unitary(W, 1.0))) < 1e-10


def test_gate_counts_n2_and_n4(rng):
    mr = multiplexed_ry_circuit(rng.uniform(0, np.pi / 2, 4))
    assert mr.circuit.count(GateKind.RY) == 4 and mr.circuit.count(GateKind.CNOT) == 4
    c = dilation_circuit(rng.uniform(0, 1, 16), 0.5)
    assert c.count(GateKind.CNOT) == 16 and c.count(GateKind.RY) == 16
    assert len(c) == 32
    assert all(g.target == 4 for g in c)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_gate_counts_exact(n, rng):
    c = dilation_circuit(rng.uniform(0, 1, 1 << n), 1.0)
    assert c.count(GateKind.CNOT) == 2**n
    assert c.count(GateKind.RY) == 2**n


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_synthesis_matches_dense(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(10):
        W = rng.uniform(0, 3, 1 << n)
        dt = float(rng.uniform(0.05, 2))
        U = circuit_unitary(dilation_circuit(W, dt))
        assert np.max(np.abs(U - dilation_unitary(W, dt))) < 1e-10
        half = 1 << n
        np.testing.assert_allclose(U[:half, :half], np.diag(np.exp(-W * dt)), atol=1e-10)


def test_synthesis_on_cap_profile():
    g = make_grid(-5, 5, 4)
    W = cap_potential(g, 0.4, 1.5)
    U = circuit_unitary(dilation_circuit(W, 1.2))
    assert np.max(np.abs(U - dilation_unitary(W, 1.2))) < 1e-10


def test_turro_zero_absorption():
    U = turro_dilation(np.zeros(4), 0.5)
    np.testing.assert_allclose(np.diag(U)[:4], 1 / np.sqrt(2))
    psi = np.concatenate([random_state(np.random.default_rng(0), 4), np.zeros(4)])
    out = U @ psi
    assert np.vdot(out[:4], out[:4]).real == pytest.approx(0.5, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), scale=st.floats(0, 10))
def test_turro_success_at_most_half(seed, scale):
    rng = np.random.default_rng(seed)
    W = PotentialField(scale * rng.uniform(0, 1, 8), "absorbing_potential")
    psi = random_state(rng, 8)
    U = turro_dilation(W, 0.6)
    assert np.max(np.abs(U.T @ U - np.eye(16))) < 1e-12
    top = U[:8, :8] @ psi
    p_turro = np.vdot(top, top).real
    p_new = np.vdot(psi, np.exp(-2 * W.values * 0.6) * psi).real
    assert p_turro <= 0.5 + 1e-12
    assert p_new >= p_turro - 1e-12


def test_turro_gap_factor_two_for_weak_absorption(rng):
    psi = random_state(rng, 8)
    W = np.full(8, 1e-7)
    p_new = np.vdot(psi, np.exp(-2 * W) * psi).real
    top = turro_dilation(W, 1.0)[:8, :8] @ psi
    assert p_new / np.vdot(top, top).real == pytest.approx(2.0, rel=1e-6)


@pytest.mark.parametrize("n", [1, 3, 4])
def test_turro_circuit_matches_dense(n, rng):
    W = rng.uniform(0, 2, 1 << n)
    assert np.max(np.abs(circuit_unitary(turro_circuit(W, 0.8)) - turro_dilation(W, 0.8))) < 1e-10
