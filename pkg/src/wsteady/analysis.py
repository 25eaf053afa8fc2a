"""Parameter sweeps over the rate-model steady state and the 1-F ~ a/C fit."""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import (
    NonUniqueSteadyStateError,
    NumericalFailureError,
    Trajectory,
    rate_steady_state,
)
from .effective import assemble_rate_matrix
from .model import DegenerateParameterError, SystemParams, TARGET_INDEX

SWEEP_AXES = ("cooperativity", "gamma_over_kappa", "omega_over_g")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    points: int
    base: SystemParams

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; choose from {SWEEP_AXES}")
        if self.points < 2:
            raise ValueError(f"a sweep needs at least 2 points, got {self.points}")
        if not self.start < self.stop:
            raise ValueError(f"sweep range must satisfy from < to, got [{self.start}, {self.stop}]")
        if self.start <= 0:
            raise ValueError(f"{self.axis} values must be positive, got {self.start}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    fidelity: float
    purity: float
    reason: str = ""


def params_at(axis: str, value: float, base: SystemParams) -> SystemParams:
    """Base parameters moved to the given point on the sweep axis."""
    if value <= 0:
        raise ValueError(f"{axis} must be positive, got {value}")
    if axis == "cooperativity":
        if base.kappa <= 0 or base.gamma <= 0:
            raise ValueError("cooperativity sweep needs a base point with kappa, gamma > 0")
        ratio = base.gamma / base.kappa
        kappa = 1.0 / np.sqrt(ratio * value)
        return replace(base, kappa=kappa, gamma=ratio * kappa)
    if axis == "gamma_over_kappa":
        coop = base.cooperativity
        if not np.isfinite(coop):
            raise ValueError("gamma/kappa sweep needs a base point with finite cooperativity")
        kappa = 1.0 / np.sqrt(value * coop)
        return replace(base, kappa=kappa, gamma=value * kappa)
    if axis == "omega_over_g":
        if base.omegas[0] <= 0:
            raise ValueError("omega sweep needs a base point with Omega_1 > 0")
        scale = value / base.omegas[0]
        return replace(base, omegas=tuple(om * scale for om in base.omegas))
    raise ValueError(f"unknown sweep axis {axis!r}")


def evaluate_sweep_point(axis: str, value: float, base: SystemParams) -> SweepRow:
    """Steady-state fidelity and purity at one sweep point; degenerate points
    become NaN rows with the failure reason instead of aborting the batch."""
    try:
        params = params_at(axis, value, base)
        p = rate_steady_state(assemble_rate_matrix(params))
    except (DegenerateParameterError, NonUniqueSteadyStateError, NumericalFailureError) as exc:
        return SweepRow(axis=axis, value=value, fidelity=np.nan, purity=np.nan,
                        reason=f"{type(exc).__name__}: {exc}")
    return SweepRow(axis=axis, value=value, fidelity=float(p[TARGET_INDEX]),
                    purity=float((p**2).sum()))


def run_sweep(spec: SweepSpec, values: np.ndarray | None = None,
              workers: int = 1) -> list[SweepRow]:
    """Evaluate the sweep, optionally on an explicit value grid and in
    parallel; row order always follows the value grid."""
    grid = spec.values() if values is None else np.asarray(values, dtype=float)
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_sweep_point,
                                 [spec.axis] * len(grid), grid,
                                 [spec.base] * len(grid)))
    else:
        rows = [evaluate_sweep_point(spec.axis, v, spec.base) for v in grid]
    return rows


@dataclass(frozen=True)
class FitResult:
    a: float
    residual: float
    points_used: int


def fit_scaling(points: list[tuple[float, float]]) -> FitResult:
    """Least-squares fit of 1-F against 1/C through the origin:
    a = sum[(1-F_i)/C_i] / sum[1/C_i^2]."""
    if len(points) < 3:
        raise ValueError(f"scaling fit needs at least 3 points, got {len(points)}")
    c = np.array([p[0] for p in points], dtype=float)
    f = np.array([p[1] for p in points], dtype=float)
    if np.any(c <= 0):
        raise ValueError("all cooperativities must be positive")
    if np.any(~np.isfinite(f)):
        raise ValueError("fit input contains non-finite fidelities")
    x = 1.0 / c
    y = 1.0 - f
    a = float(np.sum(y * x) / np.sum(x * x))
    if a <= 0:
        raise ValueError(f"fitted coefficient a={a:.3e} is not positive; data is not a 1/C law")
    residual = float(np.sqrt(np.mean((y - a * x) ** 2)))
    return FitResult(a=a, residual=residual, points_used=len(points))


def time_to_threshold(traj: Trajectory, level: float) -> float:
    """First time the fidelity reaches the level (linear interpolation between
    samples); NaN when never reached."""
    f = traj.fidelity
    above = np.nonzero(f >= level)[0]
    if len(above) == 0:
        return float("nan")
    i = above[0]
    if i == 0:
        return float(traj.times[0])
    t0, t1 = traj.times[i - 1], traj.times[i]
    f0, f1 = f[i - 1], f[i]
    return float(t0 + (level - f0) / (f1 - f0) * (t1 - t0))
