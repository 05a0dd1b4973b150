"""Gate lists and a statevector simulator for ``n`` system qubits plus one ancilla.

Bit ordering: qubit ``q`` is bit ``q`` of the basis-state index, so system
qubit 0 is the least significant bit of the grid index and the ancilla
(qubit ``n``) is the most significant bit of the full register.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .grid import Grid, PotentialField

MAX_UNITARY_QUBITS = 8


class GateKind(str, Enum):
    H = "H"
    P = "P"
    CP = "CP"
    CNOT = "CNOT"
    RY = "RY"
    Z = "Z"
    SWAP = "SWAP"


_PARAMETRIC = {GateKind.P, GateKind.CP, GateKind.RY}
_TWO_QUBIT = {GateKind.CP, GateKind.CNOT, GateKind.SWAP}


@dataclass(frozen=True)
class Gate:
    """One gate. For ``SWAP`` the ``control`` slot holds the second qubit."""

    kind: GateKind
    target: int
    control: int | None = None
    angle: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        if self.target < 0 or (self.control is not None and self.control < 0):
            raise ValueError(f"negative qubit index in {self}")
        if (self.kind in _TWO_QUBIT) != (self.control is not None):
            raise ValueError(f"{self.kind.value} gate has wrong number of qubits")
        if self.control == self.target:
            raise ValueError(f"control equals target in {self}")
        if not np.isfinite(self.angle):
            raise ValueError("gate angle must be finite")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) if self.control is None else (self.control, self.target)

    def inverse(self) -> Gate:
        if self.kind in _PARAMETRIC:
            return Gate(self.kind, self.target, self.control, -self.angle)
        return self

    def matrix(self) -> np.ndarray:
        """2x2 action on the target (for SWAP and CNOT, the conditional X)."""
        k = self.kind
        if k == GateKind.H:
            return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        if k in (GateKind.P, GateKind.CP):
            return np.array([[1, 0], [0, np.exp(1j * self.angle)]], dtype=complex)
        if k == GateKind.RY:
            c, s = np.cos(self.angle / 2), np.sin(self.angle / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if k == GateKind.Z:
            return np.array([[1, 0], [0, -1]], dtype=complex)
        return np.array([[0, 1], [1, 0]], dtype=complex)

    def to_line(self) -> str:
        parts = ["GATE", self.kind.value, str(self.target)]
        if self.control is not None:
            parts.append(str(self.control))
        if self.kind in _PARAMETRIC:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> Gate:
        tok = line.split()
        if not tok or tok[0] != "GATE" or len(tok) < 3:
            raise ValueError(f"not a gate line: {line!r}")
        kind = GateKind(tok[1])
        rest = tok[3:]
        control = int(rest.pop(0)) if kind in _TWO_QUBIT else None
        angle = float(rest.pop(0)) if kind in _PARAMETRIC else 0.0
        if rest:
            raise ValueError(f"trailing tokens in gate line: {line!r}")
        return cls(kind, int(tok[2]), control, angle)


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        for g in self.gates:
            self._check(g)

    def _check(self, gate: Gate) -> None:
        if max(gate.qubits) >= self.num_qubits:
            raise ValueError(f"{gate} exceeds register of {self.num_qubits} qubits")

    def append(self, gate: Gate) -> Circuit:
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    def h(self, q: int) -> Circuit:
        return self.append(Gate(GateKind.H, q))

    def p(self, angle: float, q: int) -> Circuit:
        return self.append(Gate(GateKind.P, q, None, angle))

    def cp(self, angle: float, control: int, target: int) -> Circuit:
        return self.append(Gate(GateKind.CP, target, control, angle))

    def cx(self, control: int, target: int) -> Circuit:
        return self.append(Gate(GateKind.CNOT, target, control))

    def ry(self, angle: float, q: int) -> Circuit:
        return self.append(Gate(GateKind.RY, q, None, angle))

    def z(self, q: int) -> Circuit:
        return self.append(Gate(GateKind.Z, q))

    def swap(self, a: int, b: int) -> Circuit:
        return self.append(Gate(GateKind.SWAP, a, b))

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        return Circuit(max(self.num_qubits, other.num_qubits), self.gates + other.gates)

    def inverse(self) -> Circuit:
        return Circuit(self.num_qubits, [g.inverse() for g in reversed(self.gates)])

    def count(self, kind: GateKind | str) -> int:
        kind = GateKind(kind)
        return sum(1 for g in self.gates if g.kind == kind)

    def dumps(self) -> str:
        return "".join(g.to_line() + "\n" for g in self.gates)

    @classmethod
    def loads(cls, text: str, num_qubits: int) -> Circuit:
        gates = [Gate.from_line(ln) for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        return cls(num_qubits, gates)


@dataclass
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        size = self.amplitudes.size
        if self.amplitudes.ndim != 1 or size < 2 or size & (size - 1):
            raise ValueError("statevector length must be a power of two >= 2")

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def from_system(cls, psi: np.ndarray) -> StateVector:
        """Embed system amplitudes as ``|0>_anc (x) |psi>``."""
        psi = np.asarray(psi, dtype=complex)
        return cls(np.concatenate([psi, np.zeros_like(psi)]))

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy())


@lru_cache(maxsize=None)
def _pair_indices(num_qubits: int, target: int, control: int | None) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << num_qubits)
    mask = ((idx >> target) & 1) == 0
    if control is not None:
        mask &= ((idx >> control) & 1) == 1
    i0 = idx[mask]
    return i0, i0 | (1 << target)


def _apply_inplace(a: np.ndarray, gate: Gate, num_qubits: int) -> None:
    if max(gate.qubits) >= num_qubits:
        raise IndexError(f"{gate} out of range for {num_qubits} qubits")
    k = gate.kind
    if k == GateKind.SWAP:
        # states with target=1, other=0 exchange with target=0, other=1
        i0, i1 = _pair_indices(num_qubits, gate.target, None)
        sel = ((i0 >> gate.control) & 1) == 1
        lo, hi = i0[sel], i1[sel] ^ (1 << gate.control)
        a[lo], a[hi] = a[hi], a[lo].copy()
        return
    control = gate.control if k in (GateKind.CP, GateKind.CNOT) else None
    i0, i1 = _pair_indices(num_qubits, gate.target, control)
    if k in (GateKind.P, GateKind.CP):
        a[i1] *= np.exp(1j * gate.angle)
    elif k == GateKind.Z:
        a[i1] *= -1.0
    elif k == GateKind.CNOT:
        a[i0], a[i1] = a[i1], a[i0].copy()
    else:
        m = gate.matrix()
        x0, x1 = a[i0], a[i1]
        a[i0], a[i1] = m[0, 0] * x0 + m[0, 1] * x1, m[1, 0] * x0 + m[1, 1] * x1


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    out = state.copy()
    _apply_inplace(out.amplitudes, gate, out.num_qubits)
    return out


def run_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.num_qubits > state.num_qubits:
        raise ValueError("circuit is wider than the state")
    out = state.copy()
    for g in circuit:
        _apply_inplace(out.amplitudes, g, out.num_qubits)
    return out


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    nq = circuit.num_qubits
    if nq > MAX_UNITARY_QUBITS:
        raise ValueError(f"dense unitary limited to {MAX_UNITARY_QUBITS} qubits, got {nq}")
    dim = 1 << nq
    # rows index the basis state, so each gate acts on all columns at once
    u = np.eye(dim, dtype=complex)
    for g in circuit:
        _apply_inplace(u, g, nq)
    return u


def qft_circuit(n: int, num_qubits: int | None = None) -> Circuit:
    """QFT on qubits ``0..n-1``: ``|x> -> 2^(-n/2) sum_k exp(2 pi i x k / 2^n) |k>``."""
    if n < 1:
        raise ValueError("QFT needs at least one qubit")
    circ = Circuit(n if num_qubits is None else num_qubits)
    for a in range(n):
        t = n - 1 - a
        circ.h(t)
        for b in range(a + 1, n):
            circ.cp(2 * np.pi / 2 ** (b - a + 1), n - 1 - b, t)
    for q in range(n // 2):
        circ.swap(q, n - 1 - q)
    return circ


def inverse_qft_circuit(n: int, num_qubits: int | None = None) -> Circuit:
    return qft_circuit(n, num_qubits).inverse()


def kinetic_phase_circuit(grid: Grid, dt: float, num_qubits: int | None = None) -> Circuit:
    """Phase and controlled-phase gates for ``exp(-i p^2 dt / 2m)`` in the momentum basis.

    The constant ``2^(2n-2)`` term of ``p^2`` is a global phase and is dropped.
    """
    n = grid.n
    c = (2 * np.pi / grid.length) ** 2 * (1 - 2.0**-n) ** 2
    scale = -c * dt / (2 * grid.mass)
    circ = Circuit(n if num_qubits is None else num_qubits)
    for j in range(n):
        circ.p(scale * (2.0 ** (2 * j) - 2.0 ** (n + j)), j)
        for k in range(j + 1, n):
            circ.cp(scale * 2.0 ** (k + j + 1), k, j)
    return circ


def kinetic_global_phase(grid: Grid, dt: float) -> float:
    """Phase angle dropped by ``kinetic_phase_circuit``."""
    n = grid.n
    c = (2 * np.pi / grid.length) ** 2 * (1 - 2.0**-n) ** 2
    return -c * dt / (2 * grid.mass) * 2.0 ** (2 * n - 2)


def momentum_ramp_circuit(n: int, num_qubits: int | None = None) -> Circuit:
    """``(-1)^i`` on grid index ``i``: a Z on the least significant system qubit."""
    return Circuit(n if num_qubits is None else num_qubits).z(0)


def kinetic_block(grid: Grid, dt: float, num_qubits: int | None = None) -> Circuit:
    """Ramp, QFT, kinetic phases, inverse QFT, ramp."""
    nq = grid.n if num_qubits is None else num_qubits
    n = grid.n
    return (
        momentum_ramp_circuit(n, nq)
        + qft_circuit(n, nq)
        + kinetic_phase_circuit(grid, dt, nq)
        + inverse_qft_circuit(n, nq)
        + momentum_ramp_circuit(n, nq)
    )


@dataclass(frozen=True)
class DiagonalOperator:
    """Diagonal unitary on the system register, applied identically to both ancilla branches."""

    diagonal: np.ndarray

    def apply(self, state: StateVector) -> StateVector:
        reps = state.amplitudes.size // self.diagonal.size
        if reps * self.diagonal.size != state.amplitudes.size:
            raise ValueError("diagonal does not divide the state dimension")
        return StateVector(state.amplitudes * np.tile(self.diagonal, reps))

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


def potential_phase_block(grid: Grid, V: PotentialField, dt: float) -> DiagonalOperator:
    if len(V) != grid.num_points:
        raise ValueError("potential length does not match the grid")
    return DiagonalOperator(np.exp(-1j * V.values * dt))
