"""Exhaustive and two-phase hierarchical beam training.

Terminal A (the AoD side of the link) and terminal B (the AoA side) share the
same four per-UPA codebooks.  The exhaustive baseline scores every narrow-beam
pair; the hierarchical procedure first finds the UPA pair with two wide-beam
slots (phase 1), then walks each terminal's binary beam tree with 2S slots per
side (phase 2), for 4S + 2 measurement slots overall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LosLink, MeasurementConfig, received_power, steering_vector
from .geometry import ArrayGeometry, UPA_INDICES


@dataclass(frozen=True)
class TrainingOutcome:
    """Selected UPA pair and narrow-beam pair plus the accounting around them.

    ``upa_pair`` is (transmit-side UPA, receive-side UPA); ``beam_pair`` the
    1-based narrow indices on those UPAs.  ``achieved_gain`` is the noise-free
    ``|w^H H f|^2`` of the selected pair and ``success`` records agreement
    with the noiseless exhaustive optimum.
    """

    upa_pair: tuple[int, int]
    beam_pair: tuple[int, int]
    measurement_slots: int
    achieved_gain: float
    success: bool


def _side_amplitudes(link, geom, codebooks, transmit: bool) -> np.ndarray:
    """|a^H f| per (UPA, narrow index), element-gain weighted, flattened UPA-major."""
    direction = link.aod if transmit else link.aoa
    model = link.tx_gain_model if transmit else link.rx_gain_model
    per_upa = []
    for upa in UPA_INDICES:
        gain = model.evaluate(upa, direction)
        if gain == 0.0:
            per_upa.append(np.zeros(len(codebooks[upa].narrow_stage)))
            continue
        a = steering_vector(geom, upa, direction)
        weights = np.column_stack([cw.weights for cw in codebooks[upa].narrow_stage])
        per_upa.append(math.sqrt(gain) * np.abs(weights.conj().T @ a))
    return np.concatenate(per_upa)


def exhaustive_search(
    link: LosLink,
    codebooks: dict,
    geom: ArrayGeometry,
    noiseless: bool = True,
    cfg: MeasurementConfig | None = None,
    rng: np.random.Generator | None = None,
) -> TrainingOutcome:
    """Score all 16 N^4 narrow-beam pairs and return the best one.

    The noiseless variant (the oracle used for success accounting) ranks the
    exact received powers; ties break toward the lexicographically smallest
    (tx UPA, tx beam, rx UPA, rx beam).  With ``noiseless=False`` each pair's
    power picks up an independent combiner-noise draw from ``rng``.
    """
    n_beams_sq = len(codebooks[1].narrow_stage)
    tx_amp = _side_amplitudes(link, geom, codebooks, transmit=True)
    rx_amp = _side_amplitudes(link, geom, codebooks, transmit=False)
    pair_amp = abs(link.alpha) * np.multiply.outer(tx_amp, rx_amp)
    if noiseless:
        scores = pair_amp.ravel() ** 2
    else:
        if cfg is None or rng is None:
            raise ValueError("noisy exhaustive search needs cfg and rng")
        signal = math.sqrt(cfg.transmit_power) * pair_amp.ravel()
        scale = math.sqrt(cfg.noise_power / 2.0)
        noise = scale * (
            rng.standard_normal(signal.size) + 1j * rng.standard_normal(signal.size)
        )
        scores = np.abs(signal + noise) ** 2
    flat = int(np.argmax(scores))  # first occurrence = lexicographic tie-break
    tx_flat, rx_flat = divmod(flat, rx_amp.size)
    tx_upa, tx_beam = divmod(tx_flat, n_beams_sq)
    rx_upa, rx_beam = divmod(rx_flat, n_beams_sq)
    achieved = float(pair_amp[tx_flat, rx_flat] ** 2)
    return TrainingOutcome(
        upa_pair=(tx_upa + 1, rx_upa + 1),
        beam_pair=(tx_beam + 1, rx_beam + 1),
        measurement_slots=16 * n_beams_sq**2,
        achieved_gain=achieved,
        success=True,
    )


def _pair_signal(link, geom, codebooks, tx_upa, rx_upa, precoder, combiner, power) -> complex:
    """sqrt(P) * w^H H f for one UPA pair, without forming the full matrix."""
    g_t = link.tx_gain_model.evaluate(tx_upa, link.aod)
    g_r = link.rx_gain_model.evaluate(rx_upa, link.aoa)
    if g_t == 0.0 or g_r == 0.0:
        return 0.0 + 0.0j
    a_t = steering_vector(geom, tx_upa, link.aod)
    a_r = steering_vector(geom, rx_upa, link.aoa)
    coupling = math.sqrt(g_t * g_r) * link.alpha * complex(a_t.conj() @ precoder) * complex(
        combiner.conj() @ a_r
    )
    return math.sqrt(power) * coupling


def phase1(
    link: LosLink,
    codebooks: dict,
    cfg: MeasurementConfig,
    rng: np.random.Generator | None = None,
    split_power: bool = False,
) -> tuple[int, int]:
    """Find the serving UPA pair (terminal A's, terminal B's) in two slots.

    Slot 1: A radiates every UPA's stage-0 beam at once and each of B's UPAs
    records one power of the superposed signal; B keeps the strongest.
    Slot 2: B answers on that UPA alone and A picks its strongest receive UPA.
    Ties break toward the lower UPA index.  ``split_power`` divides the
    transmit power across the four simultaneous UPAs in slot 1.
    """
    geom = codebooks[1].config.geom
    slot1_power = cfg.transmit_power / 4.0 if split_power else cfg.transmit_power
    powers_b = []
    for rx_upa in UPA_INDICES:
        combiner = codebooks[rx_upa].stage_weights(0)[:, 0]
        signal = sum(
            _pair_signal(
                link, geom, codebooks, tx_upa, rx_upa,
                codebooks[tx_upa].stage_weights(0)[:, 0], combiner, slot1_power,
            )
            for tx_upa in UPA_INDICES
        )
        powers_b.append(received_power(signal, combiner, cfg.noise_power, rng))
    b_star = int(np.argmax(powers_b)) + 1

    reverse = link.reverse()
    precoder = codebooks[b_star].stage_weights(0)[:, 0]
    powers_a = []
    for rx_upa in UPA_INDICES:
        combiner = codebooks[rx_upa].stage_weights(0)[:, 0]
        signal = _pair_signal(
            reverse, geom, codebooks, b_star, rx_upa, precoder, combiner, cfg.transmit_power
        )
        powers_a.append(received_power(signal, combiner, cfg.noise_power, rng))
    a_star = int(np.argmax(powers_a)) + 1
    return a_star, b_star


def _descend(
    rx_link: LosLink,
    codebooks: dict,
    rx_upa: int,
    tx_upa: int,
    tx_precoder: np.ndarray,
    cfg: MeasurementConfig,
    rng: np.random.Generator | None,
) -> int:
    """Walk the receive UPA's beam tree from stage 1 down to a narrow beam."""
    geom = codebooks[1].config.geom
    book = codebooks[rx_upa]
    current = 1
    for stage in range(1, book.stage_count + 1):
        candidates = book.children[(stage - 1, current)]
        powers = []
        for index in candidates:
            combiner = book.stage_weights(stage)[:, index - 1]
            signal = _pair_signal(
                rx_link, geom, codebooks, tx_upa, rx_upa, tx_precoder, combiner,
                cfg.transmit_power,
            )
            powers.append(received_power(signal, combiner, cfg.noise_power, rng))
        current = candidates[int(np.argmax(powers))]
    return current


def phase2(
    link: LosLink,
    codebooks: dict,
    a_star: int,
    b_star: int,
    cfg: MeasurementConfig,
    rng: np.random.Generator | None = None,
) -> tuple[int, int]:
    """Refine to a narrow-beam pair on the selected UPAs in 4S slots.

    Step 1: B transmits its stage-0 beam while A's UPA descends its tree, two
    measurements per stage.  Step 2: A transmits the narrow beam it reached
    and B descends the same way.  Power ties break to the lower beam index.
    """
    book_b = codebooks[b_star]
    a_beam = _descend(
        link.reverse(), codebooks, a_star, b_star, book_b.stage_weights(0)[:, 0], cfg, rng
    )
    narrow_a = codebooks[a_star].stage_weights(codebooks[a_star].stage_count)[:, a_beam - 1]
    b_beam = _descend(link, codebooks, b_star, a_star, narrow_a, cfg, rng)
    return a_beam, b_beam


def hierarchical_training(
    link: LosLink,
    codebooks: dict,
    cfg: MeasurementConfig,
    rng: np.random.Generator | None = None,
    split_power: bool = False,
    oracle: TrainingOutcome | None = None,
) -> TrainingOutcome:
    """Run phase 1 then phase 2 and score the outcome against the oracle.

    ``oracle`` may carry a precomputed noiseless exhaustive outcome for the
    same link and codebooks; otherwise it is computed here.  Success means
    the selected (UPA, beam) pairs match the oracle exactly; the achieved
    gain is always evaluated noise-free.
    """
    geom = codebooks[1].config.geom
    stage_count = codebooks[1].stage_count
    a_star, b_star = phase1(link, codebooks, cfg, rng, split_power=split_power)
    a_beam, b_beam = phase2(link, codebooks, a_star, b_star, cfg, rng)

    if oracle is None:
        oracle = exhaustive_search(link, codebooks, geom, noiseless=True)
    precoder = codebooks[a_star].stage_weights(stage_count)[:, a_beam - 1]
    combiner = codebooks[b_star].stage_weights(stage_count)[:, b_beam - 1]
    signal = _pair_signal(link, geom, codebooks, a_star, b_star, precoder, combiner, 1.0)
    achieved = abs(signal) ** 2
    success = (a_star, b_star) == oracle.upa_pair and (a_beam, b_beam) == oracle.beam_pair
    return TrainingOutcome(
        upa_pair=(a_star, b_star),
        beam_pair=(a_beam, b_beam),
        measurement_slots=4 * stage_count + 2,
        achieved_gain=achieved,
        success=success,
    )
