"""CSV emission (9 significant digits, deterministic) and figure rendering."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import SweepRow
from .dynamics import Trajectory
from .effective import RateComparison
from .model import GROUND_LABELS

TRAJECTORY_COLUMNS = ("t", "p_000", "p_s11", "p_s12", "p_s13", "p_s21", "p_s22",
                      "p_s23", "p_111", "fidelity", "purity")

PURITY_LABELS = {
    "rate": "purity = sum of squared ground-state populations (rate mode)",
    "full_time_dependent": "purity = Tr(rho^2) on the full atom-cavity space",
    "full_independent": "purity = sum of squared ground-state populations (rate mode)",
}


def fmt(x: float) -> str:
    """Floating-point cell with 9 significant digits."""
    if np.isnan(x):
        return "nan"
    return f"{x:.9g}"


def write_trajectory_csv(path: str | Path, traj: Trajectory) -> Path:
    path = Path(path)
    lines = [f"# {PURITY_LABELS.get(traj.method, 'purity')}"]
    lines.append(",".join(TRAJECTORY_COLUMNS))
    for i, t in enumerate(traj.times):
        row = [fmt(t)] + [fmt(p) for p in traj.populations[i]]
        row += [fmt(traj.fidelity[i]), fmt(traj.purity[i])]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sweep_csv(path: str | Path, rows: list[SweepRow]) -> Path:
    """Sweep CSV: axis,value,fidelity,purity; a 'reason' column is appended
    when any point failed (NaN rows stay in place, the batch is never lost)."""
    path = Path(path)
    with_reason = any(row.reason for row in rows)
    header = "axis,value,fidelity,purity" + (",reason" if with_reason else "")
    lines = [header]
    for row in rows:
        cells = [row.axis, fmt(row.value), fmt(row.fidelity), fmt(row.purity)]
        if with_reason:
            cells.append(row.reason)
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_rate_matrix_csv(path: str | Path, mu: np.ndarray) -> Path:
    """8x8 rate matrix, destination rows by source columns."""
    path = Path(path)
    lines = ["dest\\source," + ",".join(GROUND_LABELS)]
    for z, label in enumerate(GROUND_LABELS):
        lines.append(label + "," + ",".join(fmt(mu[z, y]) for y in range(8)))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_comparison_csv(path: str | Path, rows: list[RateComparison]) -> Path:
    path = Path(path)
    lines = ["source,dest,numeric,closed_as_written,closed_corrected,"
             "rel_err_as_written,rel_err_corrected,note"]
    for r in rows:
        lines.append(",".join([
            r.y, r.z, fmt(r.numeric), fmt(r.closed_as_written), fmt(r.closed_corrected),
            fmt(r.rel_as_written), fmt(r.rel_corrected), r.note,
        ]))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_fit_points(path: str | Path) -> list[tuple[float, float]]:
    """(value, fidelity) pairs from a sweep CSV, skipping NaN rows."""
    points = []
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if not body:
        raise ValueError(f"{path}: empty CSV")
    header = body[0].split(",")
    try:
        i_value = header.index("value")
        i_fid = header.index("fidelity")
    except ValueError:
        raise ValueError(f"{path}: expected sweep CSV with 'value' and 'fidelity' columns") from None
    for ln in body[1:]:
        cells = ln.split(",")
        value, fid = float(cells[i_value]), float(cells[i_fid])
        if np.isnan(value) or np.isnan(fid):
            continue
        points.append((value, fid))
    return points


def figure_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".png")


def plot_trajectories(path: str | Path, trajectories: list[Trajectory]) -> Path:
    """Fidelity/purity curves for every method plus the population breakdown
    of the first trajectory."""
    path = Path(path)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.5, 4.2))
    for traj in trajectories:
        ax1.plot(traj.times, traj.fidelity, label=f"fidelity ({traj.method})")
        ax1.plot(traj.times, traj.purity, "--", label=f"purity ({traj.method})")
    ax1.set_xlabel("t (1/g)")
    ax1.set_ylabel("fidelity / purity")
    ax1.set_ylim(0, 1)
    ax1.legend(fontsize=8)
    lead = trajectories[0]
    for i, label in enumerate(GROUND_LABELS):
        ax2.plot(lead.times, lead.populations[:, i], label=label)
    ax2.set_xlabel("t (1/g)")
    ax2.set_ylabel(f"populations ({lead.method})")
    ax2.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sweep(path: str | Path, rows: list[SweepRow]) -> Path:
    path = Path(path)
    values = np.array([r.value for r in rows])
    fidelity = np.array([r.fidelity for r in rows])
    purity = np.array([r.purity for r in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(values, fidelity, "o-", label="steady-state fidelity")
    ax.plot(values, purity, "s--", label="steady-state purity")
    ax.set_xlabel(rows[0].axis if rows else "axis")
    ax.set_ylabel("steady-state value")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_rate_matrix(path: str | Path, mu: np.ndarray) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    im = ax.imshow(mu, cmap="viridis")
    ax.set_xticks(range(8), GROUND_LABELS, rotation=45)
    ax.set_yticks(range(8), GROUND_LABELS)
    ax.set_xlabel("source")
    ax.set_ylabel("destination")
    fig.colorbar(im, ax=ax, label="rate (units of g)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
