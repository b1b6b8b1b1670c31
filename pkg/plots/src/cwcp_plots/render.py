"""Matplotlib rendering of extracted series, tuned for byte-stable SVG."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .series import PlotJob, Series, compute_series, dump_series

# Fixed hash salt and dropped date metadata keep repeated renders of the
# same input byte-identical.
matplotlib.rcParams["svg.hashsalt"] = "cwcp-plots"

_SAVE_KWARGS = {"metadata": {"Date": None}}


def _save(fig, path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    kwargs = dict(_SAVE_KWARGS) if path.endswith(".svg") else {}
    fig.savefig(path, **kwargs)
    plt.close(fig)


def _render_coverage_cdf(series: list[Series], nominal: float, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in series:
        ax.step(s.x, s.y, where="post", label=s.label)
    ax.axvline(nominal, linestyle="--", color="black", linewidth=1)
    ax.set_xlabel("per-trial coverage")
    ax.set_ylabel("fraction of trials")
    ax.set_title("coverage distribution across trials")
    ax.legend(loc="upper left", fontsize=8)
    _save(fig, path)


def _render_coverage_vs_shift(series: list[Series], nominal: float, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in series:
        ax.plot(s.x, s.y, marker="o", label=s.label)
        if s.sd is not None:
            lo = [y - sd for y, sd in zip(s.y, s.sd)]
            hi = [y + sd for y, sd in zip(s.y, s.sd)]
            ax.fill_between(s.x, lo, hi, alpha=0.2)
    ax.axhline(nominal, linestyle="--", color="black", linewidth=1)
    ax.set_xlabel("shift")
    ax.set_ylabel("coverage (mean +/- 1 sd)")
    ax.set_title("coverage against shift strength")
    ax.legend(loc="lower left", fontsize=8)
    _save(fig, path)


def _render_srm_curves(series: list[Series], path: str) -> None:
    objective = [s for s in series if s.label.startswith("objective")]
    loss = [s for s in series if s.label.startswith("test_l2")]
    lams = sorted({s.label.split()[1] for s in objective})
    fig, axes = plt.subplots(
        len(lams) + 1, 1, figsize=(6, 2.6 * (len(lams) + 1)), sharex=True
    )
    axes = [axes] if len(lams) == 0 else list(axes.ravel()) if hasattr(axes, "ravel") else [axes]
    for ax, lam in zip(axes, lams):
        for s in objective:
            if s.label.split()[1] != lam:
                continue
            ax.plot(s.x, s.y, marker="o", label=s.label.split()[2])
            if s.sd is not None:
                lo = [y - sd for y, sd in zip(s.y, s.sd)]
                hi = [y + sd for y, sd in zip(s.y, s.sd)]
                ax.fill_between(s.x, lo, hi, alpha=0.2)
        ax.set_ylabel(f"objective\n{lam}")
        ax.legend(fontsize=7)
    ax = axes[-1]
    for s in loss:
        ax.plot(s.x, s.y, marker="o", label=s.label.split()[1])
        if s.sd is not None:
            lo = [y - sd for y, sd in zip(s.y, s.sd)]
            hi = [y + sd for y, sd in zip(s.y, s.sd)]
            ax.fill_between(s.x, lo, hi, alpha=0.2)
    ax.set_ylabel("held-out\nsquared error")
    ax.set_xlabel("sample size m")
    ax.legend(fontsize=7)
    fig.suptitle("clip-level selection curves")
    _save(fig, path)


def render(job: PlotJob) -> list[Series]:
    """Compute series from the CSV, write the image (and the series text)."""
    series = compute_series(job)
    if job.kind == "coverage-cdf":
        _render_coverage_cdf(series, job.nominal, job.out_path)
    elif job.kind == "coverage-vs-shift":
        _render_coverage_vs_shift(series, job.nominal, job.out_path)
    else:
        _render_srm_curves(series, job.out_path)
    if job.dump_path is not None:
        os.makedirs(os.path.dirname(os.path.abspath(job.dump_path)), exist_ok=True)
        with open(job.dump_path, "w") as fh:
            fh.write(dump_series(series, job.nominal, job.kind))
    return series
