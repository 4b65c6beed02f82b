"""Seeded synthetic instances with log-distance path loss, plus dB conversions."""

import logging
from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .core_model import Instance, Receiver, Transmitter

logger = logging.getLogger('wnd_accuracy')

MIN_DISTANCE = 1.0


def db_to_linear(x: float) -> float:
    """10^(x/10)."""
    return 10.0 ** (x / 10.0)


def dbmw_to_mw(x: float) -> float:
    """Power in mW for a level in dBmW."""
    return db_to_linear(x)


@dataclass(frozen=True)
class GenParams:
    """Generator parameters. Distances in meters, levels in dB / dBmW."""

    receivers: int
    transmitters: int
    area_size: float = 10000.0
    pathloss_exponent: float = 3.5
    reference_fading_db: float = -30.0
    noise_dbmw: float = -120.0
    delta_db: float = 8.0
    pmax_dbmw: float = 30.0
    seed: int = 0
    shadowing_sigma_db: float = 0.0
    delta_db_range: Tuple[float, float] = (8.0, 11.0)
    near_receivers: int = 0
    near_radius: float = 5.0

    def __post_init__(self):
        if self.receivers < 1:
            raise ValueError(f"receivers must be positive, got: {self.receivers}")
        if self.transmitters < 1:
            raise ValueError(f"transmitters must be positive, got: {self.transmitters}")
        if self.area_size <= 0:
            raise ValueError(f"area_size must be positive, got: {self.area_size}")
        if self.pathloss_exponent <= 0:
            raise ValueError(f"pathloss_exponent must be positive, got: {self.pathloss_exponent}")
        if self.shadowing_sigma_db < 0:
            raise ValueError(f"shadowing_sigma_db must be nonnegative, got: {self.shadowing_sigma_db}")
        low, high = self.delta_db_range
        if not low <= self.delta_db <= high:
            raise ValueError(f"delta_db {self.delta_db} outside the configured range [{low}, {high}]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got: {self.seed}")
        if not 0 <= self.near_receivers <= self.receivers:
            raise ValueError(f"near_receivers must be in [0, {self.receivers}], got: {self.near_receivers}")
        if self.near_radius < MIN_DISTANCE:
            raise ValueError(f"near_radius must be at least {MIN_DISTANCE}, got: {self.near_radius}")

    def to_meta(self) -> dict:
        meta = asdict(self)
        meta['delta_db_range'] = list(self.delta_db_range)
        return meta


def place_nodes(params: GenParams, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transmitter and receiver coordinates, shape (n, 2).

    Both sets are uniform in the square. The first near_receivers receivers
    are then moved to within near_radius of a randomly drawn transmitter.
    """
    tx_pos = rng.uniform(0.0, params.area_size, size=(params.transmitters, 2))
    rx_pos = rng.uniform(0.0, params.area_size, size=(params.receivers, 2))
    if params.near_receivers:
        k = params.near_receivers
        anchors = rng.integers(0, params.transmitters, size=k)
        radius = rng.uniform(MIN_DISTANCE, params.near_radius, size=k)
        angle = rng.uniform(0.0, 2.0 * np.pi, size=k)
        offset = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        # clipping into the square never moves a point away from its anchor
        rx_pos[:k] = np.clip(tx_pos[anchors] + offset, 0.0, params.area_size)
    return tx_pos, rx_pos


def generate_instance(params: GenParams, revenue: Optional[Fraction] = None) -> Instance:
    """
    Place transmitters and receivers with place_nodes and derive the fading
    matrix from a log-distance path-loss model.

    Fading is a_rt = 10^((ref - 10 gamma log10 d_rt + shadow)/10) clamped to
    [0, 1], with distances floored at 1 m. Each double is frozen as its
    exact rational value.

    Args:
        params: Generator parameters
        revenue: Revenue per receiver, 1 by default

    Returns:
        Instance with meta holding the parameters
    """
    rng = np.random.default_rng(params.seed)
    tx_pos, rx_pos = place_nodes(params, rng)

    distance = np.linalg.norm(rx_pos[:, None, :] - tx_pos[None, :, :], axis=2)
    distance = np.maximum(distance, MIN_DISTANCE)
    fading_db = params.reference_fading_db - 10.0 * params.pathloss_exponent * np.log10(distance)
    if params.shadowing_sigma_db > 0:
        fading_db = fading_db + rng.normal(0.0, params.shadowing_sigma_db, size=fading_db.shape)
    fading = np.clip(10.0 ** (fading_db / 10.0), 0.0, 1.0)

    p_max = Fraction(dbmw_to_mw(params.pmax_dbmw))
    noise = Fraction(dbmw_to_mw(params.noise_dbmw))
    delta = Fraction(db_to_linear(params.delta_db))
    revenue = Fraction(1) if revenue is None else Fraction(revenue)

    width_t = len(str(params.transmitters))
    width_r = len(str(params.receivers))
    transmitters = tuple(
        Transmitter(f"t{i + 1:0{width_t}d}", p_max) for i in range(params.transmitters)
    )
    receivers = tuple(
        Receiver(f"r{i + 1:0{width_r}d}", noise, delta, revenue) for i in range(params.receivers)
    )
    matrix = tuple(tuple(Fraction(float(a)) for a in row) for row in fading)

    logger.debug(
        f"Generated instance {params.receivers}x{params.transmitters} (seed {params.seed}): "
        f"fading in [{fading.min():.1e}, {fading.max():.1e}]"
    )
    return Instance(transmitters, receivers, matrix, {'generator': params.to_meta()})
