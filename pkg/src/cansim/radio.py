"""HC-12 433 MHz link model: log-distance path loss, logistic packet success.

Free space (n = 2) at 433 MHz never gets anywhere near the -117 dBm
sensitivity floor inside a kilometer, which would contradict the observed
~800 m practical range, so the default exponent models near-ground clutter.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

BAUD_RATES = (1200, 2400, 4800, 9600, 19200, 38400, 57600, 115200)
BITS_PER_BYTE_ON_AIR = 10  # 8N1 framing

_TX_POWER_MIN_DBM = 10.0 * math.log10(0.8)   # 0.8 mW
_TX_POWER_MAX_DBM = 20.0                     # 100 mW


@dataclass(frozen=True)
class LinkConfig:
    frequency_hz: float = 433.4e6
    tx_power_dbm: float = 20.0
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 0.0
    path_loss_exponent: float = 3.5
    reference_loss_db: float = 25.18  # free-space loss at 1 m, 433 MHz
    sensitivity_dbm: float = -117.0
    logistic_k: float = 0.8           # per dB of margin
    logistic_margin_db: float = 3.0   # margin at which success = 0.5
    baud: int = 9600
    corrupt_fraction: float = 0.2     # failed packets delivered mangled, not dropped

    def __post_init__(self) -> None:
        if self.baud not in BAUD_RATES:
            raise ValueError(f"baud {self.baud} not one of {BAUD_RATES}")
        if not _TX_POWER_MIN_DBM - 1e-9 <= self.tx_power_dbm <= _TX_POWER_MAX_DBM + 1e-9:
            raise ValueError("tx power must be within 0.8..100 mW "
                             f"({_TX_POWER_MIN_DBM:.2f}..{_TX_POWER_MAX_DBM:.2f} dBm)")
        if self.path_loss_exponent < 2.0:
            raise ValueError("path loss exponent must be >= 2 (free space)")
        if not 0.0 <= self.corrupt_fraction <= 1.0:
            raise ValueError("corrupt_fraction must be in [0, 1]")
        if self.logistic_k <= 0:
            raise ValueError("logistic_k must be > 0")


@dataclass(frozen=True)
class LinkReport:
    distance_m: float
    path_loss_db: float
    received_power_dbm: float
    margin_db: float
    packet_success_prob: float
    airtime_s: float


class Delivery(Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"
    CORRUPTED = "corrupted"


@dataclass(frozen=True)
class TransmitResult:
    status: Delivery
    data: bytes | None  # None only when dropped

    @property
    def arrived(self) -> bool:
        return self.data is not None


def path_loss_db(d_m: float, cfg: LinkConfig) -> float:
    """Log-distance model: PL = PL(1 m) + 10 n log10(d)."""
    if d_m < 1.0:
        raise ValueError("distance must be >= 1 m (reference distance)")
    return cfg.reference_loss_db + 10.0 * cfg.path_loss_exponent * math.log10(d_m)


def received_power_dbm(d_m: float, cfg: LinkConfig) -> float:
    return cfg.tx_power_dbm + cfg.tx_gain_dbi + cfg.rx_gain_dbi - path_loss_db(d_m, cfg)


def link_margin_db(d_m: float, cfg: LinkConfig) -> float:
    return received_power_dbm(d_m, cfg) - cfg.sensitivity_dbm


def packet_success_prob(d_m: float, cfg: LinkConfig) -> float:
    """Logistic curve on link margin; 0.5 exactly at the configured knee."""
    x = cfg.logistic_k * (link_margin_db(d_m, cfg) - cfg.logistic_margin_db)
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    # exp(x) form avoids overflow for deeply negative margins
    e = math.exp(x)
    return e / (1.0 + e)


def airtime_s(frame_len_bytes: int, baud: int) -> float:
    """Serial airtime at 10 bits per byte (8N1)."""
    if baud not in BAUD_RATES:
        raise ValueError(f"baud {baud} not one of {BAUD_RATES}")
    if frame_len_bytes < 0:
        raise ValueError("frame length must be >= 0")
    return frame_len_bytes * BITS_PER_BYTE_ON_AIR / baud


def transmit(frame: bytes, d_m: float, cfg: LinkConfig, rng: random.Random) -> TransmitResult:
    """Send one frame across the modeled channel.

    Succeeds with :func:`packet_success_prob`; a failure is delivered with
    1-3 flipped bits with probability ``corrupt_fraction``, otherwise lost
    outright. Deterministic for a fixed rng state.
    """
    if not frame:
        raise ValueError("frame must be non-empty")
    p = packet_success_prob(d_m, cfg)
    if rng.random() < p:
        return TransmitResult(Delivery.DELIVERED, frame)
    if rng.random() < cfg.corrupt_fraction:
        mangled = bytearray(frame)
        nbits = rng.randint(1, 3)
        for bit in rng.sample(range(len(frame) * 8), nbits):
            mangled[bit // 8] ^= 1 << (bit % 8)
        return TransmitResult(Delivery.CORRUPTED, bytes(mangled))
    return TransmitResult(Delivery.DROPPED, None)


def link_report(d_m: float, cfg: LinkConfig, frame_len_bytes: int = 52) -> LinkReport:
    pl = path_loss_db(d_m, cfg)
    prx = cfg.tx_power_dbm + cfg.tx_gain_dbi + cfg.rx_gain_dbi - pl
    return LinkReport(
        distance_m=d_m,
        path_loss_db=pl,
        received_power_dbm=prx,
        margin_db=prx - cfg.sensitivity_dbm,
        packet_success_prob=packet_success_prob(d_m, cfg),
        airtime_s=airtime_s(frame_len_bytes, cfg.baud),
    )
