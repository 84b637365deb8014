"""SVG rendering of run artifacts.

Reads the per-sample CSVs emitted by the runner and produces three
figures: log-error components, dual-propagation residuals, and the
gravity-mismatch bound ratio.  Rendering is deterministic for identical
CSV inputs (fixed hash salt, no embedded dates).
"""

import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .exceptions import IoError

_SLOT_LABELS = ("x", "y", "z")


def _read_csv(path):
    path = Path(path)
    if not path.exists():
        raise IoError(f"missing artifact {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IoError(f"{path}: empty artifact (0 rows)") from None
        rows = [[float(x) for x in row] for row in reader]
    if not rows:
        raise IoError(f"{path}: no data rows (0 rows after header)")
    cols = {name: [r[i] for r in rows] for i, name in enumerate(header)}
    return cols


def _figure(seed):
    matplotlib.rcParams["svg.hashsalt"] = str(seed)
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 7.5), sharex=True)
    return fig, axes


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_log_error(csv_path, out_path, seed=0):
    """Three-panel component plot of xi from the validate samples."""
    cols = _read_csv(csv_path)
    t = [x / 3600.0 for x in cols["t_s"]]
    fig, axes = _figure(seed)
    groups = (("position error [m]", "p"), ("velocity error [m/s]", "v"),
              ("attitude error [rad]", "R"))
    for ax, (label, slot) in zip(axes, groups):
        for comp in _SLOT_LABELS:
            ax.plot(t, cols[f"xi_classical_{slot}_{comp}"],
                    label=f"classical {comp}", lw=1.0)
            ax.plot(t, cols[f"xi_log_{slot}_{comp}"], "--",
                    label=f"log-dynamics {comp}", lw=1.0)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend(ncol=3, fontsize=7)
    axes[-1].set_xlabel("time [h]")
    fig.suptitle("Log-error evolution: classical vs log-dynamics")
    _save(fig, out_path)
    return Path(out_path)


def plot_residual(csv_path, out_path, seed=0):
    """Componentwise residual between the two propagation routes."""
    cols = _read_csv(csv_path)
    t = [x / 3600.0 for x in cols["t_s"]]
    fig, axes = _figure(seed)
    groups = (("position residual [m]", "p"), ("velocity residual [m/s]", "v"),
              ("attitude residual [rad]", "R"))
    for ax, (label, slot) in zip(axes, groups):
        for comp in _SLOT_LABELS:
            ax.plot(t, cols[f"delta_{slot}_{comp}"], lw=0.9, label=comp)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend(ncol=3, fontsize=8)
    axes[-1].set_xlabel("time [h]")
    fig.suptitle("Dual-propagation residuals")
    _save(fig, out_path)
    return Path(out_path)


def plot_bound_ratio(csv_path, out_path, seed=0):
    """Mismatch magnitude, pointwise bound, and their ratio vs unity."""
    cols = _read_csv(csv_path)
    t = [x / 3600.0 for x in cols["t_s"]]
    matplotlib.rcParams["svg.hashsalt"] = str(seed)
    fig, axes = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    axes[0].plot(t, cols["actual_mismatch_ms2"], label="actual mismatch", lw=1.1)
    axes[0].plot(t, cols["pointwise_bound_ms2"], label="pointwise bound", lw=1.1)
    axes[0].set_ylabel("gravity mismatch [m/s$^2$]")
    axes[0].legend(fontsize=8)
    axes[0].grid(True, alpha=0.3)
    axes[1].plot(t, cols["ratio"], lw=1.1, label="actual / bound")
    axes[1].axhline(1.0, color="k", ls=":", lw=1.0, label="unity")
    axes[1].set_ylim(0.0, 1.1)
    axes[1].set_ylabel("ratio")
    axes[1].set_xlabel("time [h]")
    axes[1].legend(fontsize=8)
    axes[1].grid(True, alpha=0.3)
    fig.suptitle("Gravity-mismatch bound verification")
    _save(fig, out_path)
    return Path(out_path)


def plot_stabilize(csv_path, out_path, seed=0):
    """Closed-loop norm decay against the linear prediction and envelope."""
    cols = _read_csv(csv_path)
    t = [x / 3600.0 for x in cols["t_s"]]
    matplotlib.rcParams["svg.hashsalt"] = str(seed)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.semilogy(t, cols["xi_norm"], label="closed loop", lw=1.2)
    ax.semilogy(t, cols["xi_norm_linear"], "--", label="(A+BK) prediction", lw=1.2)
    ax.semilogy(t, cols["envelope"], ":", label="decay envelope", lw=1.2)
    ax.set_xlabel("time [h]")
    ax.set_ylabel(r"$\|\xi\|$")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.suptitle("Stabilized closed loop")
    _save(fig, out_path)
    return Path(out_path)


def emit_plots(out_dir, mode, seed=0):
    """Render the SVG set for one completed run; returns written paths."""
    out_dir = Path(out_dir)
    written = []
    if mode == "validate":
        src = out_dir / "validate_samples.csv"
        written.append(plot_log_error(src, out_dir / "log_error.svg", seed))
        written.append(plot_residual(src, out_dir / "residual.svg", seed))
    elif mode == "bound":
        src = out_dir / "bound_samples.csv"
        written.append(plot_bound_ratio(src, out_dir / "bound_ratio.svg", seed))
    elif mode == "stabilize":
        src = out_dir / "stabilize_u1u2_samples.csv"
        written.append(plot_stabilize(src, out_dir / "stabilize.svg", seed))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return written
