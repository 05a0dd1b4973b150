"""First-order split-operator reference solver with absorbing boundaries.

The Fourier convention matches the quantum Fourier transform:
``F[k, j] = exp(+2 pi i j k / N) / sqrt(N)``, which is ``numpy.fft.ifft`` with
``norm="ortho"``.  Position amplitudes are multiplied by ``(-1)**j`` before
the forward transform so bin ``k`` carries momentum ``-Grid.p[k]`` (only
``p**2`` enters the propagator, so the sign is immaterial).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .grid import Grid, PotentialField, WaveFunction, norm

MAX_DENSE_QUBITS = 8


def momentum_ramp(num_points: int) -> np.ndarray:
    return np.where(np.arange(num_points) % 2 == 0, 1.0, -1.0)


def to_momentum(psi: np.ndarray) -> np.ndarray:
    return np.fft.ifft(psi * momentum_ramp(psi.size), norm="ortho")


def to_position(phi: np.ndarray) -> np.ndarray:
    return np.fft.fft(phi, norm="ortho") * momentum_ramp(phi.size)


def kinetic_substep(psi: np.ndarray, grid: Grid, dt: float) -> np.ndarray:
    phase = np.exp(-1j * grid.kinetic_energies() * dt)
    return to_position(phase * to_momentum(psi))


def _check_lengths(grid: Grid, *vectors) -> None:
    for v in vectors:
        if len(v) != grid.num_points:
            raise ValueError(f"vector of length {len(v)} does not match grid with {grid.num_points} points")


def split_step(
    wf: WaveFunction, grid: Grid, V: PotentialField, W: PotentialField, dt: float
) -> WaveFunction:
    """One step of ``exp(-W dt) exp(-i V dt) exp(-i K dt)``, left unnormalized."""
    _check_lengths(grid, wf, V, W)
    if dt <= 0:
        raise ValueError("dt must be positive")
    psi = kinetic_substep(wf.amplitudes, grid, dt)
    psi = psi * np.exp(-1j * V.values * dt)
    psi = psi * np.exp(-W.values * dt)
    return WaveFunction(psi, norm(psi))


@dataclass
class Snapshot:
    time: float
    amplitudes: np.ndarray
    physical_norm: float


@dataclass
class ClassicalTrajectory:
    snapshots: list[Snapshot] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def norms(self) -> np.ndarray:
        return np.array([s.physical_norm for s in self.snapshots])

    def __len__(self) -> int:
        return len(self.snapshots)


def evolve_classical(
    grid: Grid,
    V: PotentialField,
    W: PotentialField,
    wf0: WaveFunction,
    dt: float,
    n_steps: int,
) -> ClassicalTrajectory:
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    _check_lengths(grid, wf0, V, W)
    wf = WaveFunction(wf0.amplitudes.copy(), wf0.physical_norm)
    traj = ClassicalTrajectory([Snapshot(0.0, wf.amplitudes.copy(), wf.physical_norm)])
    for r in range(1, n_steps + 1):
        wf = split_step(wf, grid, V, W, dt)
        traj.snapshots.append(Snapshot(r * dt, wf.amplitudes, wf.physical_norm))
    return traj


def fourier_matrix(num_points: int) -> np.ndarray:
    j = np.arange(num_points)
    return np.exp(2j * np.pi * np.outer(j, j) / num_points) / np.sqrt(num_points)


def kinetic_matrix(grid: Grid) -> np.ndarray:
    """Dense ``K = R F^dag diag(p^2/2m) F R`` in the position basis."""
    F = fourier_matrix(grid.num_points)
    R = np.diag(momentum_ramp(grid.num_points))
    return R @ F.conj().T @ np.diag(grid.kinetic_energies()) @ F @ R


def _check_dense(grid: Grid) -> None:
    if grid.n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense matrices limited to n <= {MAX_DENSE_QUBITS}, got n={grid.n}")


def effective_hamiltonian(grid: Grid, V: PotentialField, W: PotentialField) -> np.ndarray:
    _check_dense(grid)
    _check_lengths(grid, V, W)
    return kinetic_matrix(grid) + np.diag(V.values - 1j * W.values)


def dense_propagator(grid: Grid, V: PotentialField, W: PotentialField, dt: float) -> np.ndarray:
    """Exact ``exp(-i (K + V - i W) dt)``."""
    return scipy.linalg.expm(-1j * dt * effective_hamiltonian(grid, V, W))


def dense_split_propagator(grid: Grid, V: PotentialField, W: PotentialField, dt: float) -> np.ndarray:
    """The three split factors multiplied out as dense matrices."""
    _check_dense(grid)
    _check_lengths(grid, V, W)
    expK = scipy.linalg.expm(-1j * dt * kinetic_matrix(grid))
    diag = np.exp(-W.values * dt) * np.exp(-1j * V.values * dt)
    return diag[:, None] * expK


def kinetic_spectral_norm(grid: Grid) -> float:
    """Closed-form ``pi^2 2^(2n-1) / (L^2 m)``.

    Uses the band edge ``2^(n-1) 2 pi / L``, which exceeds the true largest
    grid momentum by ``1 / (1 - 2^-n)``; the result is therefore an upper
    bound on ``max p^2/2m``.
    """
    return np.pi**2 / (grid.length**2 * grid.mass) * 2.0 ** (2 * grid.n - 1)


def trotter_error_bound(dt: float, K_norm: float, V_norm: float, W_norm: float) -> float:
    if min(K_norm, V_norm, W_norm) < 0:
        raise ValueError("norms must be non-negative")
    return dt**2 * K_norm * (V_norm + W_norm)
