"""Quantum-side time loop: Trotter block, dilation, ancilla post-selection."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .circuit import (
    Circuit,
    DiagonalOperator,
    StateVector,
    kinetic_block,
    potential_phase_block,
    run_circuit,
)
from .dilation import dilation_circuit, turro_circuit
from .grid import (
    Grid,
    PotentialField,
    WaveFunction,
    cap_potential,
    gaussian_packet,
    gaussian_well,
    make_grid,
    zero_potential,
)

FULL_ABSORPTION_THRESHOLD = 1e-14

Prescription = Literal["new", "turro"]


class FullAbsorptionError(RuntimeError):
    """Success probability fell below the double-precision floor."""


@dataclass(frozen=True)
class RunConfig:
    x_min: float = -5.0
    x_max: float = 5.0
    n: int = 4
    potential: Literal["none", "gaussian_well"] = "none"
    V0: float = -1.0
    sigma_V: float = 1.0
    U0: float = 0.4
    alpha: float = 1.5
    cap_width: int | None = None
    x0: float | None = None
    sigma: float = 0.4
    v: float = 0.0
    dt: float = 1.2
    n_steps: int = 5
    mode: Literal["exact", "sampled"] = "exact"
    shots: int = 1 << 14
    seed: int = 0
    prescription: Prescription = "new"

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode needs at least one shot")
        if self.prescription not in ("new", "turro"):
            raise ValueError(f"unknown prescription {self.prescription!r}")
        if self.potential not in ("none", "gaussian_well"):
            raise ValueError(f"unknown potential {self.potential!r}")

    def with_(self, **changes) -> RunConfig:
        return replace(self, **changes)

    def grid(self) -> Grid:
        return make_grid(self.x_min, self.x_max, self.n)

    def potentials(self, grid: Grid | None = None) -> tuple[PotentialField, PotentialField]:
        grid = grid or self.grid()
        if self.potential == "gaussian_well":
            V = gaussian_well(grid, self.V0, self.sigma_V)
        else:
            V = zero_potential(grid)
        W = cap_potential(grid, self.U0, self.alpha, self.cap_width)
        return V, W

    def initial_state(self, grid: Grid | None = None) -> WaveFunction:
        return gaussian_packet(grid or self.grid(), self.x0, self.sigma, self.v)


@dataclass(frozen=True)
class StepCircuits:
    """Everything applied in one time step, prebuilt for reuse."""

    kinetic: Circuit
    potential: DiagonalOperator
    dilation: Circuit


def build_step(
    grid: Grid, V: PotentialField, W: PotentialField, dt: float, prescription: Prescription = "new"
) -> StepCircuits:
    nq = grid.n + 1
    kin = kinetic_block(grid, dt, nq)
    dil = turro_circuit(W, dt) if prescription == "turro" else dilation_circuit(W, dt)
    return StepCircuits(kin, potential_phase_block(grid, V, dt), dil)


def _apply_step(state: StateVector, step: StepCircuits) -> StateVector:
    state = run_circuit(state, step.kinetic)
    state = step.potential.apply(state)
    return run_circuit(state, step.dilation)


def trotter_block(
    state: StateVector,
    grid: Grid,
    V: PotentialField,
    W: PotentialField,
    dt: float,
    prescription: Prescription = "new",
) -> StateVector:
    """Kinetic block, potential phases and dilation; the ancilla is left unmeasured."""
    if state.amplitudes.size != 2 * grid.num_points:
        raise ValueError(
            f"state of dimension {state.amplitudes.size} does not fit {grid.n} system qubits + ancilla"
        )
    return _apply_step(state, build_step(grid, V, W, dt, prescription))


def project_ancilla_zero(state: StateVector) -> tuple[StateVector, float]:
    """Post-select ancilla = 0; returns the renormalized state and the success probability."""
    half = state.amplitudes.size // 2
    kept = state.amplitudes[:half]
    p_s = float(np.vdot(kept, kept).real)
    if p_s < FULL_ABSORPTION_THRESHOLD:
        raise FullAbsorptionError(f"success probability {p_s:.3e} below {FULL_ABSORPTION_THRESHOLD:g}")
    out = np.zeros_like(state.amplitudes)
    out[:half] = kept / np.sqrt(p_s)
    return StateVector(out), p_s


@dataclass
class RunResult:
    """Exact post-selected trajectory; index ``r`` is time ``r * dt`` (``r = 0`` included)."""

    times: np.ndarray
    per_step_success: np.ndarray
    cumulative_success: np.ndarray
    snapshots: list[np.ndarray]
    prescription: str = "new"
    mode: str = "exact"

    @property
    def final_state(self) -> np.ndarray:
        return self.snapshots[-1]

    @property
    def final_success(self) -> float:
        return float(self.cumulative_success[-1])


def run_exact(config: RunConfig) -> RunResult:
    grid = config.grid()
    V, W = config.potentials(grid)
    psi0 = config.initial_state(grid)
    step = build_step(grid, V, W, config.dt, config.prescription)
    state = StateVector.from_system(psi0.amplitudes)
    half = grid.num_points
    per_step = []
    snaps = [state.amplitudes[:half].copy()]
    for _ in range(config.n_steps):
        state, p_s = project_ancilla_zero(_apply_step(state, step))
        per_step.append(p_s)
        snaps.append(state.amplitudes[:half].copy())
    per_step = np.array(per_step)
    cumulative = np.concatenate([[1.0], np.cumprod(per_step)])
    times = config.dt * np.arange(config.n_steps + 1)
    return RunResult(times, per_step, cumulative, snaps, config.prescription)


@dataclass
class SampledResult:
    accepted_count: int
    total_shots: int
    histogram: np.ndarray
    survivors: np.ndarray = field(repr=False)
    exact: RunResult | None = field(default=None, repr=False)
    error_bars: np.ndarray | None = None

    @property
    def empirical_success(self) -> float:
        return self.accepted_count / self.total_shots

    @property
    def empirical_series(self) -> np.ndarray:
        """Fraction of shots whose ancilla read 0 at every step up to ``r``."""
        return self.survivors / self.total_shots

    @property
    def frequencies(self) -> np.ndarray:
        if self.accepted_count == 0:
            return np.zeros(self.histogram.size)
        return self.histogram / self.accepted_count

    @property
    def zero_accepted(self) -> bool:
        return self.accepted_count == 0


def _sample_from(exact: RunResult, shots: int, rng: np.random.Generator) -> SampledResult:
    # every surviving shot sits in the same collapsed state, so the ancilla
    # outcome at step r is an independent Bernoulli(p_s(r)) draw
    n_steps = exact.per_step_success.size
    alive = np.ones(shots, dtype=bool)
    survivors = [shots]
    for r in range(n_steps):
        alive &= rng.random(shots) < exact.per_step_success[r]
        survivors.append(int(alive.sum()))
    accepted = survivors[-1]
    probs = np.abs(exact.final_state) ** 2
    probs = probs / probs.sum()
    if accepted:
        hist = rng.multinomial(accepted, probs)
    else:
        hist = np.zeros(probs.size, dtype=np.int64)
    return SampledResult(accepted, shots, hist, np.array(survivors), exact)


def _sample_literal(config: RunConfig, shots: int, rng: np.random.Generator) -> SampledResult:
    """Shot-by-shot statevector simulation with a real ancilla measurement each step."""
    grid = config.grid()
    V, W = config.potentials(grid)
    step = build_step(grid, V, W, config.dt, config.prescription)
    psi0 = config.initial_state(grid).amplitudes
    half = grid.num_points
    hist = np.zeros(half, dtype=np.int64)
    survivors = np.zeros(config.n_steps + 1, dtype=np.int64)
    for _ in range(shots):
        state = StateVector.from_system(psi0)
        survivors[0] += 1
        ok = True
        for r in range(config.n_steps):
            state = _apply_step(state, step)
            p0 = float(np.vdot(state.amplitudes[:half], state.amplitudes[:half]).real)
            if rng.random() >= p0:
                ok = False
                break
            state, _ = project_ancilla_zero(state)
            survivors[r + 1] += 1
        if ok:
            probs = np.abs(state.amplitudes[:half]) ** 2
            hist[rng.choice(half, p=probs / probs.sum())] += 1
    return SampledResult(int(survivors[-1]), shots, hist, survivors)


def run_sampled(config: RunConfig, literal: bool = False, exact: RunResult | None = None) -> SampledResult:
    """Finite-shot estimate of the success probability and final position histogram.

    ``literal=True`` simulates every shot separately; it is only meant for
    cross-checking the factorized sampler at small shot counts.
    """
    if config.shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(config.seed)
    if literal:
        return _sample_literal(config, config.shots, rng)
    if exact is None:
        exact = run_exact(config)
    return _sample_from(exact, config.shots, rng)


@dataclass
class RepeatedSampling:
    runs: list[SampledResult]
    exact: RunResult

    @property
    def success_matrix(self) -> np.ndarray:
        """Shape ``(repeats, n_steps + 1)``."""
        return np.array([r.empirical_series for r in self.runs])

    @property
    def success_mean(self) -> np.ndarray:
        return self.success_matrix.mean(axis=0)

    @property
    def success_std(self) -> np.ndarray:
        return self.success_matrix.std(axis=0, ddof=1) if len(self.runs) > 1 else np.zeros(self.exact.times.size)

    @property
    def frequency_mean(self) -> np.ndarray:
        return np.mean([r.frequencies for r in self.runs], axis=0)

    @property
    def frequency_std(self) -> np.ndarray:
        if len(self.runs) < 2:
            return np.zeros(self.exact.final_state.size)
        return np.std([r.frequencies for r in self.runs], axis=0, ddof=1)


def run_repeated(config: RunConfig, repeats: int) -> RepeatedSampling:
    """Independent sampled runs with seeds spawned from ``config.seed``."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    exact = run_exact(config)
    children = np.random.SeedSequence(config.seed).spawn(repeats)
    runs = [_sample_from(exact, config.shots, np.random.default_rng(s)) for s in children]
    freq_std = np.std([r.frequencies for r in runs], axis=0, ddof=1) if repeats > 1 else None
    for r in runs:
        r.error_bars = freq_std
    return RepeatedSampling(runs, exact)
