"""INI-style experiment configs.

Every key is optional; anything not listed in ``SCHEMA`` is rejected with the
file, section and key that caused it.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from .evolution import RunConfig


class ConfigError(ValueError):
    pass


def _optional(conv: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(raw: str) -> Any:
        return None if raw.strip().lower() in ("", "none", "auto") else conv(raw)

    return parse


def _int(raw: str) -> int:
    value = float(raw)
    if value != int(value):
        raise ValueError(f"expected an integer, got {raw!r}")
    return int(value)


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


# section -> key -> (target field, parser)
SCHEMA: dict[str, dict[str, tuple[str, Callable[[str], Any]]]] = {
    "grid": {"x_min": ("x_min", float), "x_max": ("x_max", float), "n": ("n", _int)},
    "packet": {"x0": ("x0", _optional(float)), "sigma": ("sigma", float), "v": ("v", float)},
    "potential": {"kind": ("potential", str), "v0": ("V0", float), "sigma_v": ("sigma_V", float)},
    "cap": {"u0": ("U0", float), "alpha": ("alpha", float), "width": ("cap_width", _optional(_int))},
    "time": {"dt": ("dt", float), "n_steps": ("n_steps", _int)},
    "run": {
        "mode": ("mode", str),
        "shots": ("shots", _int),
        "seed": ("seed", _int),
        "prescription": ("prescription", str),
        "repeats": ("repeats", _int),
        "repeat_shots": ("repeat_shots", _int),
        "tag": ("tag", str),
        "output_dir": ("output_dir", str),
    },
    "compare": {"classical_dt": ("classical_dt", _optional(float)), "tolerance": ("tolerance", float)},
    "bound": {"dt_list": ("bound_dts", _float_list)},
}

_EXPERIMENT_FIELDS = {"repeats", "repeat_shots", "tag", "output_dir", "classical_dt", "tolerance", "bound_dts"}

BUNDLED = ("fig3_free", "fig4_boost", "fig5_norm", "fig6_well")


@dataclass(frozen=True)
class ExperimentConfig:
    run: RunConfig = field(default_factory=RunConfig)
    tag: str = "experiment"
    output_dir: str = "out"
    repeats: int = 20
    repeat_shots: int = 1 << 10
    classical_dt: float | None = None
    tolerance: float = 1e-9
    bound_dts: tuple[float, ...] = (0.2, 0.1, 0.05)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    run_kwargs: dict[str, Any] = {}
    exp_kwargs: dict[str, Any] = {}
    for section in parser.sections():
        keys = SCHEMA.get(section.lower())
        if keys is None:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            spec = keys.get(key.lower())
            if spec is None:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            name, conv = spec
            try:
                value = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: bad value for [{section}] {key} = {raw!r}: {exc}") from exc
            (exp_kwargs if name in _EXPERIMENT_FIELDS else run_kwargs)[name] = value
    try:
        run = RunConfig(**run_kwargs)
        cfg = ExperimentConfig(run=run, **exp_kwargs)
        run.grid()
        run.potentials()
        run.initial_state()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if cfg.repeats < 1 or cfg.repeat_shots < 1:
        raise ConfigError(f"{source}: [run] repeats and repeat_shots must be >= 1")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a config file, falling back to a bundled config name such as ``fig3_free``."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text(encoding="utf-8"), str(p))
    name = p.name.removesuffix(".cfg")
    if name in BUNDLED and not p.parent.parts:
        return parse_config(bundled_config_text(name), f"{name}.cfg")
    raise ConfigError(f"config file not found: {path}")


def bundled_config_text(name: str) -> str:
    return resources.files("cap_dilation").joinpath("configs", f"{name}.cfg").read_text(encoding="utf-8")
