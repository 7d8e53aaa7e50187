"""Figure rendering for report bundles.

Every renderer writes a PNG next to the CSV it illustrates and returns
the path.  Rendering is presentation only; the CSVs stay the source of
truth.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .resolution import ReadoutTrace, ResolutionCurve  # noqa: E402

_DPI = 150


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_transfer(resistances, frequencies, path, title="Transfer curve"):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(resistances, [f / 1e6 for f in frequencies], "-")
    ax.set_xlabel("Sensor resistance (ohm)")
    ax.set_ylabel("Oscillation frequency (MHz)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def render_jitter(times, curves: dict, path, slopes: dict | None = None):
    """Accumulated RMS jitter vs measurement time, one line per design."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, jitter in curves.items():
        label = name
        if slopes and name in slopes:
            label = f"{name} (slope {slopes[name]:.3g})"
        ax.loglog(times, jitter, "-", label=label)
    ax.set_xlabel("Measurement time (s)")
    ax.set_ylabel("Accumulated RMS jitter (s)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return _finish(fig, path)


def render_resolution(trace: ReadoutTrace, curve: ResolutionCurve, path,
                      title="Transient resolution"):
    """Three panels: per-seed counts, count statistics, effective bits."""
    fig, axes = plt.subplots(1, 3, figsize=(15, 4))
    t = trace.checkpoints
    for row in trace.counts:
        axes[0].loglog(t, row, alpha=0.5, linewidth=0.8)
    axes[0].set_xlabel("Time (s)")
    axes[0].set_ylabel("Count")
    axes[0].set_title(f"{trace.n_seeds} noise seeds")

    axes[1].loglog(t, trace.mean, "-", label="mean")
    positive = trace.sigma > 0
    if positive.any():
        axes[1].loglog(t[positive], trace.sigma[positive], "--", label="sigma")
    axes[1].set_xlabel("Time (s)")
    axes[1].set_ylabel("Counts")
    axes[1].legend()

    axes[2].semilogx(curve.times, curve.bits, "-")
    if curve.saturation_time is not None:
        axes[2].axvline(curve.saturation_time, color="red", linestyle="--",
                        alpha=0.6, label="sigma >= 1")
        axes[2].legend()
    axes[2].set_xlabel("Time (s)")
    axes[2].set_ylabel("Effective bits")

    for ax in axes:
        ax.grid(True, which="both", alpha=0.3)
    fig.suptitle(title)
    fig.tight_layout()
    return _finish(fig, path)


def render_supply_noise(results: dict, path):
    """Resolution vs supply-noise amplitude, one line per design."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, pairs in results.items():
        amps = [a * 1e3 for a, _ in pairs]
        bits = [b for _, b in pairs]
        ax.plot(amps, bits, "o-", label=name)
    ax.set_xlabel("Supply noise amplitude (mV peak-to-peak)")
    ax.set_ylabel("Resolution (bits)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def render_calibration(rows, path):
    """RMS readout error vs number of offline points, per strategy."""
    by_strategy: dict[int, list[tuple[int, float]]] = {}
    for n_offline, strategy, err in rows:
        by_strategy.setdefault(int(strategy), []).append((int(n_offline), err))
    fig, ax = plt.subplots(figsize=(6, 4))
    for strategy in sorted(by_strategy):
        pts = sorted(by_strategy[strategy])
        ax.semilogy([n for n, _ in pts], [e for _, e in pts], "o-",
                    label=f"strategy {strategy}")
    ax.set_xlabel("Offline calibration points")
    ax.set_ylabel("RMS resistance error (%)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return _finish(fig, path)


def render_fom(reports, path):
    """Energy per readout and per conversion step across designs."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    names = [r.profile for r in reports]
    axes[0].bar(names, [r.energy_per_readout * 1e9 for r in reports])
    axes[0].set_ylabel("Energy per readout (nJ)")
    axes[0].set_yscale("log")
    axes[1].bar(names, [r.fom * 1e12 for r in reports])
    axes[1].set_ylabel("Energy per conversion step (pJ)")
    for ax in axes:
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return _finish(fig, path)
