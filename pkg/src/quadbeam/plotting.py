"""Matplotlib figure rendering for the CLI report paths (file output only)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import PatternRaster, SweepResult

_KIND_STYLE = {
    "proposed": dict(color="tab:blue", marker="o"),
    "inverse_no_buffer": dict(color="tab:red", marker="s"),
    "uniform_real": dict(color="tab:green", marker="^"),
    "uniform_virtual": dict(color="tab:orange", marker="v"),
}


def save_raster_figure(raster: PatternRaster, path, floor_db: float = -50.0) -> None:
    """Heat map of one beam pattern in virtual-angle coordinates."""
    gain_db = 10.0 * np.log10(np.maximum(raster.gain, 10.0 ** (floor_db / 10.0)))
    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    mesh = ax.pcolormesh(
        raster.phi_mapped, raster.theta_mapped, gain_db,
        shading="nearest", cmap="viridis", vmin=floor_db, vmax=0.0,
    )
    fig.colorbar(mesh, ax=ax, label="gain (dB)")
    ax.set_xlabel("virtual azimuth")
    ax.set_ylabel("virtual elevation")
    ax.set_title(f"UPA {raster.upa}, stage {raster.stage}, beam {raster.index}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(results: list[SweepResult], path) -> None:
    """Successful-alignment rate versus SNR, one curve per codebook kind."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for res in results:
        style = _KIND_STYLE.get(res.codebook, dict(marker="o"))
        ax.errorbar(
            res.snr_db, res.success_rate, yerr=res.ci_halfwidth,
            label=res.codebook, capsize=3, **style,
        )
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("successful alignment rate")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_worstcase_figure(rows: list[dict], path) -> None:
    """Worst-case crossover gain versus beam count, per codebook kind."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    kinds = sorted({row["codebook"] for row in rows})
    for kind in kinds:
        pts = sorted(
            (row["n_beams"], row["worst_case_crossover"]) for row in rows if row["codebook"] == kind
        )
        style = _KIND_STYLE.get(kind, dict(marker="o"))
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=kind, **style)
    closed = sorted(
        (row["n_beams"], row["closed_form"])
        for row in rows
        if row["codebook"] == "proposed" and not math.isnan(row["closed_form"])
    )
    if closed:
        ax.plot(
            [p[0] for p in closed], [p[1] for p in closed],
            "k--", marker="x", label="closed form",
        )
    ax.set_xscale("log", base=2)
    ax.set_xlabel("narrow beams per axis")
    ax.set_ylabel("worst-case normalized gain")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
