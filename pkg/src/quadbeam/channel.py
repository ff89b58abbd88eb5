"""Line-of-sight link model and noisy power measurements.

The link between a transmit UPA and a receive UPA is the rank-one matrix
``sqrt(G_t * G_r) * alpha * a_rx(aoa) a_tx(aod)^H`` built from the two array
responses, the complex path gain and the directional element power gains
(entering the amplitude as square roots, so a matched steering pair measures
``P * G_t * G_r * |alpha|^2``).  A power measurement applies a
precoder/combiner pair and adds circular complex Gaussian noise at the
combiner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import ArrayGeometry, Direction, coverage_contains, steering_vector

#: Element gain of an ideal sector antenna matched to one UPA's coverage:
#: radiated power concentrated on a solid angle of (pi/2)*sqrt(2) sr.
SECTOR_ELEMENT_GAIN = 4 * math.sqrt(2.0)


@dataclass(frozen=True)
class ElementGainModel:
    """Per-element gain pattern, either sector-limited or isotropic."""

    kind: str = "ideal_sector"
    sector_gain: float = SECTOR_ELEMENT_GAIN

    def __post_init__(self):
        if self.kind not in ("ideal_sector", "isotropic"):
            raise ValueError(f"unknown gain model {self.kind!r}")
        if self.sector_gain <= 0:
            raise ValueError("sector_gain must be positive")

    def evaluate(self, upa: int, direction: Direction) -> float:
        """Linear element power gain of UPA ``upa`` toward ``direction``."""
        if self.kind == "isotropic":
            return self.sector_gain
        return self.sector_gain if coverage_contains(upa, direction) else 0.0


def isotropic_unit_gain() -> ElementGainModel:
    return ElementGainModel(kind="isotropic", sector_gain=1.0)


@dataclass(frozen=True)
class LosLink:
    """Geometry and gain of the direct path between the two terminals."""

    aod: Direction
    aoa: Direction
    alpha: complex = 1.0 + 0.0j
    tx_gain_model: ElementGainModel = ElementGainModel()
    rx_gain_model: ElementGainModel = ElementGainModel()

    def __post_init__(self):
        if abs(self.alpha) <= 0.0:
            raise ValueError("path gain alpha must be nonzero")

    def reverse(self) -> "LosLink":
        """The same path seen from the other terminal."""
        return replace(
            self,
            aod=self.aoa,
            aoa=self.aod,
            tx_gain_model=self.rx_gain_model,
            rx_gain_model=self.tx_gain_model,
        )


@dataclass(frozen=True)
class MeasurementConfig:
    """Transmit power, noise power and the base seed of a measurement run."""

    transmit_power: float = 1.0
    noise_power: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.transmit_power <= 0:
            raise ValueError("transmit_power must be positive")
        if self.noise_power < 0:
            raise ValueError("noise_power must be >= 0")


def los_channel(link: LosLink, geom: ArrayGeometry, tx_upa: int, rx_upa: int) -> np.ndarray:
    """Rank-one channel matrix from ``tx_upa`` to ``rx_upa``.

    Identically zero when either element gain pattern vanishes toward the
    path (direction outside that UPA's sector).
    """
    g_t = link.tx_gain_model.evaluate(tx_upa, link.aod)
    g_r = link.rx_gain_model.evaluate(rx_upa, link.aoa)
    if g_t == 0.0 or g_r == 0.0:
        return np.zeros((geom.n_elements, geom.n_elements), dtype=complex)
    a_tx = steering_vector(geom, tx_upa, link.aod)
    a_rx = steering_vector(geom, rx_upa, link.aoa)
    return math.sqrt(g_t * g_r) * link.alpha * np.outer(a_rx, a_tx.conj())


def combiner_noise(combiner: np.ndarray, noise_power: float, rng: np.random.Generator) -> complex:
    """The combiner's projection of one circular complex Gaussian noise vector."""
    if noise_power == 0.0:
        return 0.0 + 0.0j
    n = combiner.shape[0]
    scale = math.sqrt(noise_power / 2.0)
    noise = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return complex(combiner.conj() @ noise)


def received_power(
    signal: complex,
    combiner: np.ndarray,
    noise_power: float,
    rng: np.random.Generator | None,
) -> float:
    """|signal + combiner^H n|^2 for one measurement slot."""
    if noise_power > 0.0 and rng is None:
        raise ValueError("noisy measurement needs a generator")
    y = signal + (combiner_noise(combiner, noise_power, rng) if noise_power > 0.0 else 0.0)
    return abs(y) ** 2


def measure(
    cfg: MeasurementConfig,
    channel: np.ndarray,
    precoder: np.ndarray,
    combiner: np.ndarray,
    rng: np.random.Generator | None = None,
) -> float:
    """One noisy power measurement of ``combiner^H channel precoder``.

    With ``noise_power == 0`` this returns exactly
    ``transmit_power * |combiner^H channel precoder|^2``.
    """
    signal = math.sqrt(cfg.transmit_power) * complex(combiner.conj() @ channel @ precoder)
    return received_power(signal, combiner, cfg.noise_power, rng)


def beamformed_gain(
    link: LosLink, geom: ArrayGeometry, tx_upa: int, rx_upa: int,
    precoder: np.ndarray, combiner: np.ndarray,
) -> float:
    """Noise-free |combiner^H H precoder|^2 for the link's channel."""
    h = los_channel(link, geom, tx_upa, rx_upa)
    return abs(complex(combiner.conj() @ h @ precoder)) ** 2


def effective_snr(
    cfg: MeasurementConfig,
    link: LosLink,
    precoder: np.ndarray,
    combiner: np.ndarray,
    geom: ArrayGeometry,
    tx_upa: int,
    rx_upa: int,
) -> float:
    """Post-beamforming SNR; ``inf`` when the link is noiseless."""
    power = cfg.transmit_power * beamformed_gain(link, geom, tx_upa, rx_upa, precoder, combiner)
    if cfg.noise_power == 0.0:
        return math.inf
    return power / cfg.noise_power
