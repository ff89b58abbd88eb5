"""Worst-case gain metrics, beam-pattern rasters, and alignment-rate sweeps.

Worst-case figures are reported as normalized amplitudes ``min max |a^H f|``
(best case 1); square them for power ratios.  The closed form and the brute
force agree on the beam-to-beam crossover region; over the full sector the
brute force also sees the band along the azimuth edges where the elevation
coupling stretches the gap beyond the interior crossover, so both search
regions are available.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import ElementGainModel, LosLink, MeasurementConfig
from .codebook import (
    CodebookConfig,
    Codeword,
    HIERARCHICAL_KINDS,
    build_codebook_set,
    coverage_set,
    grid_mapped_edges,
)
from .geometry import (
    SECTOR_HALF_WIDTH,
    SQRT2,
    ArrayGeometry,
    Direction,
    steering_matrix,
)
from .training import exhaustive_search, hierarchical_training


def worst_case_gain_closed_form(n_beams: int, n_y: int, n_z: int) -> float:
    """Crossover-point worst-case gain of the uniform narrow-beam layout.

    Normalized amplitude in (0, 1]; the elevation factor is evaluated at half
    the beam spacing and the azimuth factor at the same offset shrunk by the
    sine of the elevation of the rows closest to the horizon (``beta``; equal
    to 1 when ``n_beams`` is odd because the horizon then carries a beam row).
    """
    if n_beams < 1 or n_y < 1 or n_z < 1:
        raise ValueError("n_beams, n_y, n_z must be positive")
    if n_beams % 2:
        beta = 1.0
    else:
        beta = math.sin(math.acos(SQRT2 / (2 * n_beams)))
    x = SQRT2 * math.pi / (4 * n_beams)

    def ratio(m: int, scale: float) -> float:
        if m == 1:
            return 1.0
        return math.sin(m * scale * x) / (m * math.sin(scale * x))

    return ratio(n_z, 1.0) * ratio(n_y, beta)


def _narrow_weights(codebook) -> np.ndarray:
    return np.column_stack([cw.weights for cw in codebook.narrow_stage])


def _mapped_center_bounds(codebook) -> tuple[float, float, float, float]:
    """Hull of the narrow-beam centers in (sin local azimuth, cos elevation)."""
    upa = codebook.upa
    s_az = [math.sin(cw.center.local_azimuth(upa)) for cw in codebook.narrow_stage]
    c_el = [math.cos(cw.center.elevation) for cw in codebook.narrow_stage]
    return min(s_az), max(s_az), min(c_el), max(c_el)


def worst_case_gain_bruteforce(
    codebook, resolution: int = 512, region: str = "sector"
) -> float:
    """Scan a dense mapped-coordinate grid for the worst best-beam amplitude.

    ``region="sector"`` scans the UPA's whole coverage square including its
    boundary; ``region="crossover"`` restricts the scan to the hull of the
    narrow-beam centers (clipped to the sector), the region the crossover
    analysis describes.  The grid has ``resolution`` uniform cells per mapped
    axis with the endpoints included, so even resolutions sample the sector
    center exactly.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    geom = codebook.config.geom
    weights = _narrow_weights(codebook)
    lim = SECTOR_HALF_WIDTH
    if region == "sector":
        az_lo, az_hi, el_lo, el_hi = -lim, lim, -lim, lim
    elif region == "crossover":
        az_lo, az_hi, el_lo, el_hi = _mapped_center_bounds(codebook)
        az_lo, az_hi = max(az_lo, -lim), min(az_hi, lim)
        el_lo, el_hi = max(el_lo, -lim), min(el_hi, lim)
    else:
        raise ValueError(f"unknown region {region!r}")
    sin_az = np.linspace(az_lo, az_hi, resolution + 1)
    cos_el = np.linspace(el_lo, el_hi, resolution + 1)
    worst = math.inf
    for v in cos_el:
        u_row = sin_az * math.sqrt(1.0 - v * v)
        responses = steering_matrix(geom, u_row, np.full_like(u_row, v))
        best = np.abs(weights.conj().T @ responses).max(axis=0)
        worst = min(worst, float(best.min()))
    return worst


@dataclass
class PatternRaster:
    """Sampled gain map of one codeword over the UPA's front half-space.

    ``phi_mapped``/``theta_mapped`` are the virtual-angle axes (the azimuth
    axis carries the per-UPA offset ``sqrt(2)*(upa-1)``); ``gain`` holds
    linear power ``|a^H w|^2`` with elevation rows as the first dimension.
    The mapping back to angles is ``phi = arcsin(phi_mapped - offset) +
    (upa-1)*pi/2`` and ``theta = arccos(-theta_mapped)``.
    """

    upa: int
    stage: int
    index: int
    phi_mapped: np.ndarray
    theta_mapped: np.ndarray
    gain: np.ndarray


def beam_pattern(
    codeword: Codeword, geom: ArrayGeometry, resolution: int = 256
) -> PatternRaster:
    """Rasterize ``|a^H w|^2`` on a uniform virtual-angle grid (whole front range)."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    local = np.linspace(-1.0, 1.0, resolution + 1)
    theta_mapped = np.linspace(-1.0, 1.0, resolution + 1)
    gain = np.empty((theta_mapped.size, local.size))
    for row, tm in enumerate(theta_mapped):
        v = -tm  # cos(theta)
        u_row = local * math.sqrt(max(0.0, 1.0 - v * v))
        responses = steering_matrix(geom, u_row, np.full_like(u_row, v))
        gain[row] = np.abs(codeword.weights.conj() @ responses) ** 2
    offset = SQRT2 * (codeword.upa - 1)
    return PatternRaster(
        upa=codeword.upa,
        stage=codeword.stage,
        index=codeword.index,
        phi_mapped=local + offset,
        theta_mapped=theta_mapped,
        gain=gain,
    )


def coverage_gain_stats(
    codebook, stage: int, index: int, samples: int = 33, on_grid: bool = False
) -> tuple[float, float]:
    """(min, max) power of a wide beam sampled over its own coverage rectangle.

    ``on_grid=True`` samples exactly the covered grid-block centers; otherwise
    a ``samples x samples`` uniform raster over the rectangle (boundaries
    included, so the seam shared with the sibling beam is scored).
    """
    cfg = codebook.config
    cov = coverage_set(cfg.stage_count, stage, index)
    grid = codebook.grid
    if on_grid:
        pts = cov.block_pairs()
        s_az = np.array([grid.sin_azimuth[j - 1] for j, _ in pts])
        c_el = np.array([grid.cos_elevation[l - 1] for _, l in pts])
    else:
        edges = grid_mapped_edges(cfg.n_beams)
        az = np.linspace(
            edges[cov.azimuth_blocks.start - 1], edges[cov.azimuth_blocks[-1]], samples
        )
        el = np.linspace(
            edges[cov.elevation_blocks.start - 1], edges[cov.elevation_blocks[-1]], samples
        )
        az_g, el_g = np.meshgrid(az, el)
        s_az, c_el = az_g.ravel(), el_g.ravel()
    u = s_az * np.sqrt(1.0 - c_el**2)
    responses = steering_matrix(cfg.geom, u, c_el)
    weights = codebook.stage_weights(stage)[:, index - 1]
    power = np.abs(weights.conj() @ responses) ** 2
    return float(power.min()), float(power.max())


# ---------------------------------------------------------------------------
# Monte Carlo alignment sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    """Alignment statistics of one codebook kind over an SNR grid."""

    codebook: str
    seed: int
    trials: int
    snr_db: list[float]
    success_rate: list[float]
    ci_halfwidth: list[float]
    mean_norm_gain: list[float]
    slots_per_trial: int
    exhaustive_pairs: int

    def to_dict(self) -> dict:
        return {
            "codebook": self.codebook,
            "seed": self.seed,
            "trials": self.trials,
            "slots_per_trial": self.slots_per_trial,
            "exhaustive_pairs": self.exhaustive_pairs,
            "points": [
                {
                    "snr_db": self.snr_db[i],
                    "success_rate": self.success_rate[i],
                    "ci_halfwidth": self.ci_halfwidth[i],
                    "mean_norm_gain": self.mean_norm_gain[i],
                }
                for i in range(len(self.snr_db))
            ],
        }


def random_los_link(
    rng: np.random.Generator,
    tx_gain_model: ElementGainModel,
    rx_gain_model: ElementGainModel,
) -> LosLink:
    """Draw a link with AoD/AoA uniform in mapped coordinates of random UPAs.

    The path gain has unit magnitude and uniform phase; absolute path loss is
    folded into the sweep's noise level instead.
    """
    lim = SECTOR_HALF_WIDTH
    directions = []
    for _ in range(2):
        upa = int(rng.integers(1, 5))
        s_az = rng.uniform(-lim, lim)
        c_el = rng.uniform(-lim, lim)
        phi = math.asin(s_az) + (upa - 1) * math.pi / 2.0
        directions.append(Direction(phi, math.acos(c_el)))
    alpha = complex(np.exp(1j * rng.uniform(0.0, 2.0 * math.pi)))
    return LosLink(
        aod=directions[0],
        aoa=directions[1],
        alpha=alpha,
        tx_gain_model=tx_gain_model,
        rx_gain_model=rx_gain_model,
    )


def alignment_rate_sweep(
    cfg: CodebookConfig,
    kinds: list[str],
    snr_db: list[float],
    trials: int,
    seed: int,
    tx_gain_model: ElementGainModel | None = None,
    rx_gain_model: ElementGainModel | None = None,
    split_power: bool = False,
) -> list[SweepResult]:
    """Monte Carlo successful-alignment rate of the two-phase training.

    The SNR axis is the pre-beamforming figure ``P*|alpha|^2*G_t*G_r/sigma^2``
    evaluated with the serving pair's element gains; the noise power is set
    from it per point.  Links are drawn once per trial and shared by every
    kind and SNR point, which keeps the between-kind comparison paired.
    Success means the outcome matches the noiseless exhaustive optimum for
    the same link; ``mean_norm_gain`` averages achieved/optimal gain.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for kind in kinds:
        if kind not in HIERARCHICAL_KINDS:
            raise ValueError(
                f"kind {kind!r} has no wide-beam hierarchy; trainable kinds: {HIERARCHICAL_KINDS}"
            )
    tx_gain_model = tx_gain_model or ElementGainModel()
    rx_gain_model = rx_gain_model or ElementGainModel()
    books = {kind: build_codebook_set(kind, cfg) for kind in kinds}
    geom = cfg.geom
    ref_gain = tx_gain_model.sector_gain * rx_gain_model.sector_gain
    noise_powers = [ref_gain / (10.0 ** (s / 10.0)) for s in snr_db]

    hits = {kind: np.zeros(len(snr_db)) for kind in kinds}
    gain_ratio = {kind: np.zeros(len(snr_db)) for kind in kinds}
    for trial in range(trials):
        link_rng = np.random.default_rng([seed, trial])
        link = random_los_link(link_rng, tx_gain_model, rx_gain_model)
        oracle = exhaustive_search(link, books[kinds[0]], geom, noiseless=True)
        for point, sigma2 in enumerate(noise_powers):
            meas = MeasurementConfig(transmit_power=1.0, noise_power=sigma2, rng_seed=seed)
            for kind in kinds:
                rng = np.random.default_rng([seed, trial, point])
                outcome = hierarchical_training(
                    link, books[kind], meas, rng, split_power=split_power, oracle=oracle
                )
                hits[kind][point] += outcome.success
                if oracle.achieved_gain > 0:
                    gain_ratio[kind][point] += outcome.achieved_gain / oracle.achieved_gain

    results = []
    slots = 4 * cfg.stage_count + 2
    pairs = 16 * cfg.n_beams**4
    for kind in kinds:
        rate = hits[kind] / trials
        ci = 1.96 * np.sqrt(np.clip(rate * (1.0 - rate), 0.0, None) / trials)
        results.append(
            SweepResult(
                codebook=kind,
                seed=seed,
                trials=trials,
                snr_db=[float(s) for s in snr_db],
                success_rate=[float(r) for r in rate],
                ci_halfwidth=[float(c) for c in ci],
                mean_norm_gain=[float(g) for g in gain_ratio[kind] / trials],
                slots_per_trial=slots,
                exhaustive_pairs=pairs,
            )
        )
    return results


# ---------------------------------------------------------------------------
# file output
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_raster_csv(path, raster: PatternRaster, config_comment: str | None = None) -> None:
    """Write a raster as CSV rows (elevation-major) with both coordinate systems."""
    offset = SQRT2 * (raster.upa - 1)
    lines = []
    if config_comment:
        lines.append(f"# {config_comment}")
    lines.append("phi_mapped,theta_mapped,phi_rad,theta_rad,gain_linear,gain_db")
    for row, tm in enumerate(raster.theta_mapped):
        theta = math.acos(-tm)
        for col, pm in enumerate(raster.phi_mapped):
            local = min(1.0, max(-1.0, pm - offset))
            phi = math.asin(local) + (raster.upa - 1) * math.pi / 2.0
            g = raster.gain[row, col]
            g_db = 10.0 * math.log10(g) if g > 0.0 else -math.inf
            lines.append(
                f"{_fmt(pm)},{_fmt(tm)},{_fmt(phi)},{_fmt(theta)},{_fmt(g)},{_fmt(g_db)}"
            )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_json(path, results: list[SweepResult], config_doc: dict | None = None) -> None:
    doc = {"results": [r.to_dict() for r in results]}
    if config_doc:
        doc = {"config": config_doc, **doc}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
