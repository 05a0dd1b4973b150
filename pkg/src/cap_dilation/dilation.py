"""Dilation of the absorbing step ``exp(-W dt)`` onto one ancilla qubit.

The dilation is the block matrix ``D = [[C, S], [-S, C]]`` with
``C = diag(cos theta)``, ``S = diag(sin theta)``.  Because ``C`` and ``S`` are
diagonal, ``D`` is a uniformly controlled Ry on the ancilla and compiles into
``2^n`` Ry and ``2^n`` CNOT gates via the Gray-code ladder.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, GateKind
from .grid import PotentialField

MAX_DENSE_SYSTEM_QUBITS = 7


@dataclass(frozen=True)
class DilationAngles:
    theta: np.ndarray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        _num_qubits(theta.size)
        if np.any(theta < 0) or np.any(theta > np.pi / 2):
            raise ValueError("dilation angles must lie in [0, pi/2]")
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return _num_qubits(self.theta.size)


def _num_qubits(size: int) -> int:
    if size < 1 or size & (size - 1):
        raise ValueError(f"expected a power-of-two length, got {size}")
    return size.bit_length() - 1


def _absorption(W: PotentialField | np.ndarray, dt: float) -> np.ndarray:
    w = np.asarray(W.values if isinstance(W, PotentialField) else W, dtype=float)
    if np.any(w < 0):
        raise ValueError("absorbing potential must be non-negative")
    if dt <= 0:
        raise ValueError("dt must be positive")
    return np.exp(-w * dt)


def dilation_angles(W: PotentialField | np.ndarray, dt: float) -> DilationAngles:
    """``theta_i = arccos(exp(-W_i dt))``."""
    c = _absorption(W, dt)
    return DilationAngles(np.clip(np.arccos(np.clip(c, 0.0, 1.0)), 0.0, np.pi / 2))


def _block_dilation(c: np.ndarray, s: np.ndarray, lower_sign: float = -1.0, flip: float = 1.0) -> np.ndarray:
    dim = c.size
    u = np.zeros((2 * dim, 2 * dim))
    i = np.arange(dim)
    u[i, i] = c
    u[i, i + dim] = s
    u[i + dim, i] = lower_sign * s
    u[i + dim, i + dim] = flip * c
    return u


def dilation_unitary(W: PotentialField | np.ndarray, dt: float) -> np.ndarray:
    """Dense ``[[C, S], [-S, C]]`` with ``C = exp(-W dt)`` (ancilla is the high bit)."""
    c = _absorption(W, dt)
    if c.size > 1 << MAX_DENSE_SYSTEM_QUBITS:
        raise ValueError("dense dilation limited to n <= 7")
    return _block_dilation(c, np.sqrt(1.0 - c**2))


def turro_operator(W: PotentialField | np.ndarray, dt: float) -> np.ndarray:
    """Diagonal of ``exp(-W dt) / sqrt(1 + exp(-2 W dt))``."""
    c = _absorption(W, dt)
    return c / np.sqrt(1.0 + c**2)


def turro_dilation(W: PotentialField | np.ndarray, dt: float) -> np.ndarray:
    """Dense ``[[M, sqrt(1-M^2)], [sqrt(1-M^2), -M]]`` for the normalized prescription."""
    m = turro_operator(W, dt)
    if m.size > 1 << MAX_DENSE_SYSTEM_QUBITS:
        raise ValueError("dense dilation limited to n <= 7")
    return _block_dilation(m, np.sqrt(1.0 - m**2), lower_sign=1.0, flip=-1.0)


def gray(i: int | np.ndarray) -> int | np.ndarray:
    return i ^ (i >> 1)


def gray_ladder_controls(n: int) -> list[int]:
    """Control qubit of the CNOT after each rotation: the bit flipped between gray(i) and gray(i+1)."""
    size = 1 << n
    return [(int(gray(i)) ^ int(gray((i + 1) % size))).bit_length() - 1 for i in range(size)]


def angle_transform(theta: np.ndarray) -> np.ndarray:
    """Map per-branch rotation angles onto the Gray-ladder rotation angles.

    ``alpha_i = 2^-n sum_j (-1)^(j . gray(i)) theta_j``.  The ladder applies
    branch ``j`` the net angle ``sum_i (-1)^(j . gray(i)) alpha_i``, which
    inverts this map.
    """
    theta = np.asarray(theta, dtype=float)
    n = _num_qubits(theta.size)
    size = theta.size
    g = gray(np.arange(size))
    j = np.arange(size)
    parity = np.array([[bin(int(a) & int(b)).count("1") & 1 for b in j] for a in g])
    return ((1 - 2 * parity) @ theta) / (1 << n) if n else theta.copy()


@dataclass(frozen=True)
class MultiplexedRotation:
    alpha: np.ndarray
    circuit: Circuit


def multiplexed_ry_circuit(angles: DilationAngles | np.ndarray, flip_ancilla: bool = False) -> MultiplexedRotation:
    """Gray-code ladder realizing ``D = [[C, S], [-S, C]]`` on ``n`` system qubits + ancilla.

    Branch ``i`` needs ``Ry(-2 theta_i)`` on the ancilla.  With
    ``flip_ancilla`` a trailing Z on the ancilla turns ``D`` into
    ``[[C, S], [S, -C]]``.
    """
    if not isinstance(angles, DilationAngles):
        angles = DilationAngles(np.asarray(angles, dtype=float))
    n = angles.n
    alpha = angle_transform(-2.0 * angles.theta)
    circ = Circuit(n + 1)
    if n == 0:
        circ.ry(float(alpha[0]), 0)
    else:
        for a, ctrl in zip(alpha, gray_ladder_controls(n)):
            circ.ry(float(a), n)
            circ.cx(ctrl, n)
    if flip_ancilla:
        circ.z(n)
    return MultiplexedRotation(alpha, circ)


def dilation_circuit(W: PotentialField | np.ndarray, dt: float) -> Circuit:
    return multiplexed_ry_circuit(dilation_angles(W, dt)).circuit


def turro_circuit(W: PotentialField | np.ndarray, dt: float) -> Circuit:
    m = turro_operator(W, dt)
    return multiplexed_ry_circuit(np.arccos(np.clip(m, 0.0, 1.0)), flip_ancilla=True).circuit


def cnot_count(circuit: Circuit) -> int:
    return circuit.count(GateKind.CNOT)
