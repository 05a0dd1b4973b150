"""Spatial mesh, initial wave packets and the two potential families."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

MAX_QUBITS = 12


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of ``2**n`` points spanning ``[x_min, x_max]`` (both included).

    Units follow hbar = 1 and hbar^2/2m = 1, hence ``mass = 0.5`` by default.
    """

    x_min: float
    x_max: float
    n: int
    mass: float = 0.5

    @property
    def num_points(self) -> int:
        return 1 << self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / (self.num_points - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.num_points)

    @property
    def p(self) -> np.ndarray:
        """Centered momentum of each Fourier bin, zero momentum at bin ``2**(n-1)``."""
        k = np.arange(self.num_points) - (self.num_points >> 1)
        return 2.0 * np.pi * k / (self.num_points * self.dx)

    def kinetic_energies(self) -> np.ndarray:
        return self.p**2 / (2.0 * self.mass)


def make_grid(x_min: float, x_max: float, n: int, mass: float = 0.5) -> Grid:
    if not x_max > x_min:
        raise ValueError(f"grid extent must be positive, got [{x_min}, {x_max}]")
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be an integer in [1, {MAX_QUBITS}], got {n!r}")
    if mass <= 0:
        raise ValueError("mass must be positive")
    return Grid(float(x_min), float(x_max), int(n), float(mass))


@dataclass
class WaveFunction:
    """Amplitudes on the grid plus the absorbed-norm bookkeeping."""

    amplitudes: np.ndarray
    physical_norm: float = 1.0

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a 1D vector")

    def __len__(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def normalized(self) -> np.ndarray:
        return self.amplitudes / np.sqrt(norm(self))


def norm(wf: WaveFunction | np.ndarray) -> float:
    """Squared 2-norm of the amplitudes, i.e. the total probability on the grid."""
    a = wf.amplitudes if isinstance(wf, WaveFunction) else np.asarray(wf)
    return float(np.vdot(a, a).real)


def gaussian_packet(
    grid: Grid,
    x0: float | None = None,
    sigma: float = 0.4,
    v: float = 0.0,
    m: float | None = None,
) -> WaveFunction:
    """Gaussian of width ``sigma`` at ``x0`` boosted by ``exp(i m v (x - x0))``.

    The continuum prefactor is dropped: samples are renormalized so the
    discrete norm is one.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if x0 is None:
        x0 = 0.5 * (grid.x_min + grid.x_max)
    if not grid.x_min <= x0 <= grid.x_max:
        raise ValueError(f"x0={x0} lies outside the grid")
    m = grid.mass if m is None else m
    d = grid.x - x0
    # shift the exponent so the largest sample is 1 (avoids underflow for narrow packets)
    psi = np.exp(-(d**2 - np.min(d**2)) / (2 * sigma**2))
    if v != 0.0:
        psi = psi * np.exp(1j * m * v * d)
    psi = psi.astype(complex)
    psi /= np.sqrt(np.vdot(psi, psi).real)
    return WaveFunction(psi, 1.0)


PotentialKind = Literal["real_potential", "absorbing_potential"]


@dataclass(frozen=True)
class PotentialField:
    values: np.ndarray = field(repr=False)
    kind: PotentialKind = "real_potential"

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("potential must be a 1D vector")
        if self.kind == "absorbing_potential" and np.any(vals < 0):
            raise ValueError("absorbing potential must be non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def zero_potential(grid: Grid, kind: PotentialKind = "real_potential") -> PotentialField:
    return PotentialField(np.zeros(grid.num_points), kind)


def cap_potential(grid: Grid, U0: float, alpha: float, k: int | None = None) -> PotentialField:
    """Kosloff cosh^-2 absorber on the ``k`` outermost points of each edge.

    The profile peaks at ``U0`` on the boundary point and decays inward;
    ``k`` defaults to a quarter of the grid.
    """
    n_x = grid.num_points
    if k is None:
        k = n_x // 4
    if U0 < 0:
        raise ValueError("U0 must be non-negative")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not 0 <= k <= n_x // 2:
        raise ValueError(f"absorber width k={k} must lie in [0, {n_x // 2}]")
    w = np.zeros(n_x)
    i = np.arange(n_x)
    left = i < k
    right = i >= n_x - k
    w[left] = U0 / np.cosh(alpha * grid.dx * i[left]) ** 2
    w[right] = U0 / np.cosh(alpha * grid.dx * (n_x - 1 - i[right])) ** 2
    return PotentialField(w, "absorbing_potential")


def gaussian_well(grid: Grid, V0: float, sigma_V: float) -> PotentialField:
    """``V0 * exp(-x^2 / (2 sigma_V^2))``; a well for negative ``V0``."""
    if sigma_V <= 0:
        raise ValueError(f"sigma_V must be positive, got {sigma_V}")
    return PotentialField(V0 * np.exp(-grid.x**2 / (2 * sigma_V**2)), "real_potential")
