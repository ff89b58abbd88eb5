"""Smoke tests for figure rendering (Agg backend, file output only)."""

import math

import numpy as np

from quadbeam.codebook import CodebookConfig, build_narrow_stage
from quadbeam.geometry import ArrayGeometry
from quadbeam.metrics import SweepResult, beam_pattern
from quadbeam.plotting import save_raster_figure, save_sweep_figure, save_worstcase_figure


def test_raster_figure_written(tmp_path):
    cfg = CodebookConfig(ArrayGeometry(4, 4), 2)
    raster = beam_pattern(build_narrow_stage(cfg, 1)[0], cfg.geom, resolution=24)
    out = tmp_path / "beam.png"
    save_raster_figure(raster, out)
    assert out.stat().st_size > 0


def test_sweep_figure_written(tmp_path):
    results = [
        SweepResult(
            codebook=kind,
            seed=0,
            trials=10,
            snr_db=[0.0, 20.0, 40.0],
            success_rate=[0.1, 0.6, 0.9],
            ci_halfwidth=[0.05, 0.05, 0.04],
            mean_norm_gain=[0.2, 0.7, 0.95],
            slots_per_trial=26,
            exhaustive_pairs=65536,
        )
        for kind in ("proposed", "inverse_no_buffer")
    ]
    out = tmp_path / "sweep.png"
    save_sweep_figure(results, out)
    assert out.stat().st_size > 0


def test_worstcase_figure_written(tmp_path):
    rows = []
    for kind in ("proposed", "uniform_real"):
        for n in (2, 4):
            rows.append(
                {
                    "codebook": kind,
                    "n_beams": n,
                    "worst_case_crossover": 0.1 * n,
                    "worst_case_sector": 0.08 * n,
                    "closed_form": 0.1 * n if kind == "proposed" else math.nan,
                }
            )
    out = tmp_path / "worstcase.png"
    save_worstcase_figure(rows, out)
    assert out.stat().st_size > 0
