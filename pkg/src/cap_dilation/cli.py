"""Command-line entry point: one subcommand per experiment, CSV artifacts out.

Exit codes: 0 success, 1 config error, 2 numerical-validation failure,
3 no shot survived post-selection.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import (
    audit_dilation_counts,
    bound_report_as_csv,
    complexity_rows_as_text,
    gate_count_table,
    verify_trotter_bound,
)
from .classical import ClassicalTrajectory, evolve_classical
from .config import ConfigError, ExperimentConfig, load_config
from .evolution import FullAbsorptionError, RunResult, run_exact, run_repeated

log = logging.getLogger("cap_dilation")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NO_SHOTS = 0, 1, 2, 3

AMPLITUDE_HEADER = ["step", "time", "x", "re_psi", "im_psi", "prob", "norm"]
SUCCESS_HEADER = ["step", "time", "p_step", "P_cumulative", "classical_norm"]
HISTOGRAM_HEADER = ["x", "counts", "frequency", "stddev"]
SAMPLED_SUCCESS_HEADER = ["step", "time", "exact", "mean", "stddev"]


class ValidationFailure(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    log.info("wrote %s", path)
    return path


def _amplitude_rows(times, snapshots, norms, x, mode: str | None = None):
    for step, (t, psi, nrm) in enumerate(zip(times, snapshots, norms)):
        for xi, a in zip(x, psi):
            row = [step, repr(float(t)), repr(float(xi)), repr(a.real), repr(a.imag), repr(abs(a) ** 2), repr(float(nrm))]
            if mode is not None:
                row.append(mode)
            yield row


def _classical(cfg: ExperimentConfig, dt: float | None = None) -> ClassicalTrajectory:
    run = cfg.run
    grid = run.grid()
    V, W = run.potentials(grid)
    return evolve_classical(grid, V, W, run.initial_state(grid), dt or run.dt, run.n_steps)


def cmd_evolve_classical(cfg: ExperimentConfig, out: Path) -> list[Path]:
    traj = _classical(cfg)
    x = cfg.run.grid().x
    amps = _write_csv(
        out / f"{cfg.tag}_classical_amplitudes.csv",
        AMPLITUDE_HEADER,
        _amplitude_rows(traj.times, [s.amplitudes for s in traj.snapshots], traj.norms, x),
    )
    norms = _write_csv(
        out / f"{cfg.tag}_classical_norm.csv",
        ["step", "time", "norm"],
        ([r, repr(float(t)), repr(float(nrm))] for r, (t, nrm) in enumerate(zip(traj.times, traj.norms))),
    )
    return [amps, norms]


def _success_rows(res: RunResult, traj: ClassicalTrajectory):
    p_step = np.concatenate([[1.0], res.per_step_success])
    for r, t in enumerate(res.times):
        yield [r, repr(float(t)), repr(float(p_step[r])), repr(float(res.cumulative_success[r])), repr(float(traj.norms[r]))]


def cmd_evolve_quantum(cfg: ExperimentConfig, out: Path) -> list[Path]:
    run = replace(cfg.run, mode="exact")
    res = run_exact(run)
    traj = _classical(cfg)
    x = run.grid().x
    succ = _write_csv(out / f"{cfg.tag}_success.csv", SUCCESS_HEADER, _success_rows(res, traj))
    amps = _write_csv(
        out / f"{cfg.tag}_quantum_amplitudes.csv",
        AMPLITUDE_HEADER + ["mode"],
        _amplitude_rows(res.times, res.snapshots, res.cumulative_success, x, f"exact-{run.prescription}"),
    )
    return [succ, amps]


def cmd_sample(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], bool]:
    """Returns the written files and whether any repeat had zero accepted shots."""
    run = replace(cfg.run, mode="sampled", shots=cfg.repeat_shots)
    rep = run_repeated(run, cfg.repeats)
    x = run.grid().x
    counts = np.sum([r.histogram for r in rep.runs], axis=0)
    hist = _write_csv(
        out / f"{cfg.tag}_histogram.csv",
        HISTOGRAM_HEADER,
        (
            [repr(float(xi)), int(c), repr(float(f)), repr(float(s))]
            for xi, c, f, s in zip(x, counts, rep.frequency_mean, rep.frequency_std)
        ),
    )
    succ = _write_csv(
        out / f"{cfg.tag}_sampled_success.csv",
        SAMPLED_SUCCESS_HEADER,
        (
            [r, repr(float(t)), repr(float(e)), repr(float(m)), repr(float(s))]
            for r, (t, e, m, s) in enumerate(
                zip(rep.exact.times, rep.exact.cumulative_success, rep.success_mean, rep.success_std)
            )
        ),
    )
    mean = rep.success_mean[-1]
    std = rep.success_std[-1]
    print(f"empirical success {mean:.6f} +/- {std:.6f} (exact {rep.exact.final_success:.6f}, "
          f"{cfg.repeats} x {cfg.repeat_shots} shots)")
    return [hist, succ], any(r.zero_accepted for r in rep.runs)


def compare(cfg: ExperimentConfig) -> tuple[float, float]:
    """Max amplitude deviation (phase-aligned, renormalized) and max |P_s - norm|."""
    res = run_exact(replace(cfg.run, mode="exact"))
    traj = _classical(cfg, cfg.classical_dt)
    amp_dev = 0.0
    for snap, psi_q in zip(traj.snapshots, res.snapshots):
        psi_c = snap.amplitudes / np.sqrt(snap.physical_norm)
        overlap = np.vdot(psi_q, psi_c)
        phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
        amp_dev = max(amp_dev, float(np.max(np.abs(psi_q * phase - psi_c))))
    norm_dev = float(np.max(np.abs(res.cumulative_success - traj.norms)))
    return amp_dev, norm_dev


def cmd_compare(cfg: ExperimentConfig) -> None:
    amp_dev, norm_dev = compare(cfg)
    print(f"max amplitude deviation: {amp_dev:.3e}")
    print(f"max |P_s - norm|:        {norm_dev:.3e}")
    if not (amp_dev < cfg.tolerance and norm_dev < cfg.tolerance):
        raise ValidationFailure(
            f"classical and quantum runs disagree beyond {cfg.tolerance:g} "
            f"(amplitudes {amp_dev:.3e}, norm {norm_dev:.3e})"
        )


def cmd_complexity(n_min: int, n_max: int, out: Path) -> Path:
    rows = gate_count_table(range(n_min, n_max + 1))
    for n, (formula, emitted) in audit_dilation_counts(range(n_min, n_max + 1)).items():
        if formula != emitted:
            raise ValidationFailure(f"n={n}: emitted circuit has {emitted} CNOT, formula says {formula}")
    print(complexity_rows_as_text(rows, "markdown"), end="")
    path = out / "complexity.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(complexity_rows_as_text(rows, "csv"), encoding="utf-8")
    return path


def cmd_bound_check(cfg: ExperimentConfig, out: Path) -> Path:
    run = cfg.run
    grid = run.grid()
    V, W = run.potentials(grid)
    report = verify_trotter_bound(grid, V, W, cfg.bound_dts)
    path = out / f"{cfg.tag}_bound_report.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(bound_report_as_csv(report), encoding="utf-8")
    print(bound_report_as_csv(report), end="")
    if not report.passed:
        raise ValidationFailure("Trotter error exceeds a bound")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cap-dilation", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("evolve-classical", "evolve-quantum", "sample", "compare", "bound-check"):
        p = sub.add_parser(name)
        p.add_argument("config", help="config file, or a bundled name such as fig3_free")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=Path, default=None)
    p = sub.add_parser("complexity")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--out", type=Path, default=Path("out"))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "complexity":
            if not 1 <= args.n_min <= args.n_max:
                raise ConfigError("need 1 <= --n-min <= --n-max")
            cmd_complexity(args.n_min, args.n_max, args.out)
            return EXIT_OK
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, run=replace(cfg.run, seed=args.seed))
        out = args.out if args.out is not None else Path(cfg.output_dir)
        if args.command == "evolve-classical":
            cmd_evolve_classical(cfg, out)
        elif args.command == "evolve-quantum":
            cmd_evolve_quantum(cfg, out)
        elif args.command == "sample":
            _, empty = cmd_sample(cfg, out)
            if empty:
                print("no shot survived post-selection in at least one repeat", file=sys.stderr)
                return EXIT_NO_SHOTS
        elif args.command == "compare":
            cmd_compare(cfg)
        elif args.command == "bound-check":
            cmd_bound_check(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationFailure, FullAbsorptionError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
