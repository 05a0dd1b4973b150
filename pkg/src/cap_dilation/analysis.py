"""Gate-count table, Trotter-bound checks and diagonal observables."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .classical import (
    dense_propagator,
    dense_split_propagator,
    kinetic_matrix,
    kinetic_spectral_norm,
    trotter_error_bound,
)
from .dilation import cnot_count, dilation_circuit
from .evolution import RunResult, SampledResult
from .grid import Grid, PotentialField

MAX_BOUND_QUBITS = 5


@dataclass(frozen=True)
class ComplexityRow:
    """CNOT counts for a dilation on ``n`` system qubits (``d = n + 1`` total)."""

    n: int
    csd_count: int
    qsd_count: int
    svd_count: int
    dilation_count: int

    @property
    def d(self) -> int:
        return self.n + 1


def csd_cnots(d: int) -> int:
    return (4**d - 2**d) // 2 - 2


def qsd_cnots(d: int) -> int:
    # optimized quantum Shannon decomposition: (23/48) 4^d - (3/2) 2^d + 4/3
    value = Fraction(23, 48) * 4**d - Fraction(3, 2) * 2**d + Fraction(4, 3)
    if value.denominator != 1:
        raise ArithmeticError(f"non-integer QSD count for d={d}")
    return int(value)


def svd_cnots(d: int) -> int:
    return 2**d - 2


def dilation_cnots(n: int) -> int:
    return 2**n


def gate_count_table(n_values: Iterable[int]) -> list[ComplexityRow]:
    rows = []
    for n in n_values:
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        d = n + 1
        rows.append(ComplexityRow(n, csd_cnots(d), qsd_cnots(d), svd_cnots(d), dilation_cnots(n)))
    return rows


def audit_dilation_counts(n_values: Iterable[int], seed: int = 0) -> dict[int, tuple[int, int]]:
    """Emit a dilation circuit for a random absorber at each ``n``; returns ``{n: (formula, emitted)}``."""
    rng = np.random.default_rng(seed)
    out = {}
    for n in n_values:
        circ = dilation_circuit(rng.uniform(0.0, 1.0, 1 << n), 1.0)
        out[n] = (dilation_cnots(n), cnot_count(circ))
    return out


def complexity_rows_as_text(rows: list[ComplexityRow], fmt: str = "csv") -> str:
    header = ["n", "d", "csd", "qsd", "svd", "dilation"]
    body = [[r.n, r.d, r.csd_count, r.qsd_count, r.svd_count, r.dilation_count] for r in rows]
    if fmt == "csv":
        return "\n".join(",".join(map(str, line)) for line in [header, *body]) + "\n"
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(map(str, line)) + " |" for line in body]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


@dataclass(frozen=True)
class BoundRow:
    dt: float
    measured_error: float
    commutator_bound: float
    product_bound: float

    @property
    def commutator_ok(self) -> bool:
        return self.measured_error <= self.commutator_bound

    @property
    def product_ok(self) -> bool:
        return self.measured_error <= self.product_bound

    @property
    def passed(self) -> bool:
        return self.commutator_ok and self.product_ok


@dataclass
class BoundReport:
    rows: list[BoundRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def product_passed(self) -> bool:
        return all(r.product_ok for r in self.rows)

    def convergence_ratios(self) -> np.ndarray:
        """``error(dt) / error(dt/2)`` for consecutive halvings in the dt list."""
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            if np.isclose(b.dt, a.dt / 2) and b.measured_error > 0:
                out.append(a.measured_error / b.measured_error)
        return np.array(out)

    def fitted_order(self) -> float:
        dts = np.array([r.dt for r in self.rows])
        errs = np.array([r.measured_error for r in self.rows])
        return float(np.polyfit(np.log(dts), np.log(errs), 1)[0])


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def verify_trotter_bound(
    grid: Grid, V: PotentialField, W: PotentialField, dt_list: Iterable[float]
) -> BoundReport:
    """Compare the split step against the exact propagator for each ``dt``.

    The leading-order bound uses the commutator of the two split pieces,
    ``[K, V - iW]``; the product bound uses the closed-form ``||K||`` and the
    largest absolute values of ``V`` and ``W``.
    """
    if grid.n > MAX_BOUND_QUBITS:
        raise ValueError(f"bound check limited to n <= {MAX_BOUND_QUBITS}")
    K = kinetic_matrix(grid)
    D = np.diag(V.values - 1j * W.values)
    comm = spectral_norm(K @ D - D @ K)
    k_norm = kinetic_spectral_norm(grid)
    rows = []
    for dt in dt_list:
        err = spectral_norm(dense_propagator(grid, V, W, dt) - dense_split_propagator(grid, V, W, dt))
        rows.append(
            BoundRow(dt, err, 0.5 * dt**2 * comm, trotter_error_bound(dt, k_norm, V.max_abs, W.max_abs))
        )
    return BoundReport(rows)


def bound_report_as_csv(report: BoundReport) -> str:
    lines = ["dt,measured_error,commutator_bound,product_bound,pass"]
    for r in report.rows:
        lines.append(f"{r.dt!r},{r.measured_error!r},{r.commutator_bound!r},{r.product_bound!r},{int(r.passed)}")
    return "\n".join(lines) + "\n"


def observable_expectation(
    result: RunResult | SampledResult, observable: np.ndarray, step: int = -1
) -> float:
    """``P_s(t) <O>_dil`` for an observable diagonal in position.

    ``observable`` is the vector of diagonal entries; a 2D array is accepted
    only if it is diagonal.  For sampled results only the final step exists.
    """
    obs = np.asarray(observable)
    if obs.ndim == 2:
        if obs.shape[0] != obs.shape[1] or np.any(obs - np.diag(np.diag(obs))):
            raise ValueError("only observables diagonal in the position basis are supported")
        obs = np.diag(obs)
    obs = obs.real if np.iscomplexobj(obs) and not np.any(obs.imag) else obs
    if np.iscomplexobj(obs):
        raise ValueError("observable must be Hermitian (real diagonal)")
    if isinstance(result, SampledResult):
        if obs.size != result.histogram.size:
            raise ValueError("observable size does not match the grid")
        return float(result.empirical_success * np.dot(obs, result.frequencies))
    psi = result.snapshots[step]
    if obs.size != psi.size:
        raise ValueError("observable size does not match the grid")
    return float(result.cumulative_success[step] * np.dot(obs, np.abs(psi) ** 2))
