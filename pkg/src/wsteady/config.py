"""Flat key=value run configuration.

Documented keys (all frequencies in units of g):

    preset      fig2 | experimental          (default fig2)
    kappa       cavity decay rate            (overrides preset)
    gamma       total atomic decay rate      (overrides preset)
    omega       shorthand: sets Omega = (x, 0.6x, x, 1.2x)
    omega1..omega4, delta1..delta4           (individual overrides)
    n_max       cavity truncation            (default 2)
    method      rate | full_time_dependent | full_independent | both
    t_end       integration horizon          (default 6000)
    dt          integrator step              (default: 1 rate, 0.02 master)
    initial     uniform | haar               (default uniform)
    seed        RNG seed for initial=haar    (default 0)

Lines starting with '#' and blank lines are ignored; nesting is not supported.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .model import SystemParams, preset

METHODS = ("rate", "full_time_dependent", "full_independent", "both")
INITIALS = ("uniform", "haar")

_FLOAT_KEYS = ("kappa", "gamma", "omega", "omega1", "omega2", "omega3", "omega4",
               "delta1", "delta2", "delta3", "delta4", "t_end", "dt")
_INT_KEYS = ("n_max", "seed")
KNOWN_KEYS = frozenset(("preset", "method", "initial") + _FLOAT_KEYS + _INT_KEYS)


class ConfigError(ValueError):
    """Invalid run configuration (maps to CLI exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    method: str = "rate"
    t_end: float = 6000.0
    dt: float | None = None  # None = per-method default
    initial: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.initial not in INITIALS:
            raise ConfigError(f"initial must be one of {INITIALS}, got {self.initial!r}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read the flat key=value file into a string dict."""
    raw: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def build_config(raw: dict[str, str]) -> RunConfig:
    """Resolve a raw key dict into a validated RunConfig."""
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}; known keys: {sorted(KNOWN_KEYS)}")

    parsed: dict[str, float | int | str] = {}
    for key, value in raw.items():
        try:
            if key in _FLOAT_KEYS:
                parsed[key] = float(value)
            elif key in _INT_KEYS:
                parsed[key] = int(value)
            else:
                parsed[key] = value
        except ValueError:
            raise ConfigError(f"config key {key!r} has a non-numeric value {value!r}") from None

    preset_kwargs = {}
    if "omega" in parsed:
        preset_kwargs["omega"] = parsed["omega"]
    if "n_max" in parsed:
        preset_kwargs["n_max"] = parsed["n_max"]
    try:
        params = preset(str(parsed.get("preset", "fig2")), **preset_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    overrides = {}
    for key in ("kappa", "gamma"):
        if key in parsed:
            overrides[key] = parsed[key]
    omegas = list(params.omegas)
    deltas = list(params.deltas)
    for i in range(4):
        if f"omega{i + 1}" in parsed:
            omegas[i] = parsed[f"omega{i + 1}"]
        if f"delta{i + 1}" in parsed:
            deltas[i] = parsed[f"delta{i + 1}"]
    try:
        params = replace(params, omegas=tuple(omegas), deltas=tuple(deltas), **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return RunConfig(
        params=params,
        method=str(parsed.get("method", "rate")),
        t_end=float(parsed.get("t_end", 6000.0)),
        dt=float(parsed["dt"]) if "dt" in parsed else None,
        initial=str(parsed.get("initial", "uniform")),
        seed=int(parsed.get("seed", 0)),
    )


def load_config(path: str | Path | None) -> RunConfig:
    """Config from file, or all defaults when no file is given."""
    if path is None:
        return build_config({})
    return build_config(parse_config_file(path))


def initial_state(config: RunConfig) -> tuple[np.ndarray, np.ndarray | None]:
    """(ground populations, ground-basis amplitude vector or None).

    uniform: incoherent 1/8 mixture (amplitudes None).
    haar:    seeded Haar-random pure state on the 8-dim ground manifold;
             the rate method uses its populations, full methods the pure state.
    """
    if config.initial == "uniform":
        return np.full(8, 1.0 / 8.0), None
    rng = np.random.default_rng(config.seed)
    z = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    z = z / np.linalg.norm(z)
    return np.abs(z) ** 2, z
