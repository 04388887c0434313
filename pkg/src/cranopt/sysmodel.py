"""System configuration, geometry and per-link power budgets.

Everything downstream (channel sampling, estimation, rate computation)
consumes the transmit/receive power diagonals produced here.  All
functions are pure; topology sampling takes an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

# Square coverage area is [-HALF_SIDE, HALF_SIDE]^2 metres.
HALF_SIDE = 500.0 * math.sqrt(2.0)

# Power sharing factors live in the open interval (0, 1); the guard keeps
# candidates away from the endpoints where the amplification 1/P_rx diverges.
ETA_GUARD = 1e-3

# Pathloss model is not valid below 1 m (it would predict a gain).
MIN_DISTANCE_M = 1.0


class InfeasibleBudgetError(ValueError):
    """Raised when the signal-processing power exhausts an RRU's budget."""


def even_partition(num_uds, num_rrus):
    """Split ``num_uds`` over ``num_rrus`` as evenly as possible.

    Larger shares go to the higher-indexed units, so (10, 4) -> (2, 2, 3, 3).
    """
    base, rem = divmod(num_uds, num_rrus)
    return tuple([base] * (num_rrus - rem) + [base + 1] * rem)


@dataclass(frozen=True)
class SystemConfig:
    bandwidth_hz: float = 10e6
    num_uds: int = 10
    num_rrus: int = 4
    uds_per_rru: tuple = (2, 2, 3, 3)
    rru_antennas: int = 32
    bbu_antennas: int = 128
    correlation_rho: float = 0.1
    rician_db: float = 10.0
    receiver_efficiency: float = 0.1
    noise_psd_dbm_hz: float = -174.0
    p_ud_watts: float = 0.2
    p_rru_watts: float = 10.0
    f_access_hz: float = 3.4e9
    f_fronthaul_ghz: float = 26.0

    def __post_init__(self):
        object.__setattr__(self, "uds_per_rru", tuple(int(u) for u in self.uds_per_rru))
        if sum(self.uds_per_rru) != self.num_uds:
            raise ValueError("uds_per_rru must sum to num_uds")
        if len(self.uds_per_rru) != self.num_rrus:
            raise ValueError("uds_per_rru must have one entry per RRU")
        if self.num_uds > self.bbu_antennas:
            raise ValueError("need num_uds <= bbu_antennas")
        if any(u > self.rru_antennas for u in self.uds_per_rru):
            raise ValueError("need uds_per_rru[r] <= rru_antennas for every RRU")
        if not 0.0 <= self.correlation_rho < 1.0:
            raise ValueError("correlation_rho must lie in [0, 1)")
        for name in ("bandwidth_hz", "p_ud_watts", "p_rru_watts",
                     "f_access_hz", "f_fronthaul_ghz"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def noise_variance_watts(self):
        """Noise power over the full bandwidth, PSD [dBm/Hz] * BW in linear W."""
        return 10.0 ** ((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz

    def with_uds(self, num_uds):
        """Copy with a new UD count, re-partitioned evenly over the RRUs."""
        return replace(self, num_uds=num_uds,
                       uds_per_rru=even_partition(num_uds, self.num_rrus))

    def with_rrus(self, num_rrus):
        """Copy with a new RRU count, re-partitioned evenly."""
        return replace(self, num_rrus=num_rrus,
                       uds_per_rru=even_partition(self.num_uds, num_rrus))


def pathloss_access(d, f_c):
    """UD-to-RRU pathloss in dB for distance ``d`` [m] and carrier ``f_c`` [Hz]."""
    if np.any(np.asarray(d) <= 0.0) or f_c <= 0.0:
        raise ValueError("distance and carrier frequency must be positive")
    return -154.0 + 20.0 * np.log10(f_c) + 20.0 * np.log10(d)


def pathloss_fronthaul(d, f_mm):
    """RRU-to-BBU pathloss in dB for distance ``d`` [m] and carrier ``f_mm`` [GHz]."""
    if np.any(np.asarray(d) <= 0.0) or f_mm <= 0.0:
        raise ValueError("distance and carrier frequency must be positive")
    return 3.34 + 18.62 * np.log10(f_mm) + 22.0 * np.log10(d)


def _linear_gain(pathloss_db):
    return 10.0 ** (-pathloss_db / 10.0)


class UdIndexMap:
    """Bijection between the flat UD index k and the pair (rru, slot).

    Indices are 0-based; flat index k = sum(U[:r]) + slot.
    """

    def __init__(self, uds_per_rru):
        self.uds_per_rru = tuple(uds_per_rru)
        self._offsets = np.concatenate(([0], np.cumsum(self.uds_per_rru)))
        self.num_uds = int(self._offsets[-1])
        self.rru_of = np.repeat(np.arange(len(self.uds_per_rru)), self.uds_per_rru)
        self.slot_of = np.concatenate([np.arange(u) for u in self.uds_per_rru])

    def pair(self, k):
        r = int(self.rru_of[k])
        return r, int(self.slot_of[k])

    def flat(self, r, slot):
        if not 0 <= slot < self.uds_per_rru[r]:
            raise IndexError("slot out of range for RRU")
        return int(self._offsets[r]) + slot

    def block(self, r):
        """Slice selecting RRU r's UDs in flat ordering."""
        return slice(int(self._offsets[r]), int(self._offsets[r + 1]))


def ud_index_map(uds_per_rru):
    return UdIndexMap(uds_per_rru)


@dataclass(frozen=True)
class Topology:
    bbu_position: np.ndarray
    rru_positions: np.ndarray
    ud_positions: np.ndarray
    uds_per_rru: tuple
    index_map: UdIndexMap = field(default=None)

    def __post_init__(self):
        if self.index_map is None:
            object.__setattr__(self, "index_map", UdIndexMap(self.uds_per_rru))

    @property
    def num_rrus(self):
        return len(self.rru_positions)

    def rru_bbu_distances(self):
        d = np.linalg.norm(self.rru_positions - self.bbu_position, axis=1)
        return np.maximum(d, MIN_DISTANCE_M)

    def ud_rru_distances(self):
        """(R, K) distances from every UD to every RRU, clamped at 1 m."""
        diff = self.rru_positions[:, None, :] - self.ud_positions[None, :, :]
        return np.maximum(np.linalg.norm(diff, axis=2), MIN_DISTANCE_M)

    def rru_azimuths(self):
        """Azimuth of each RRU as seen from the BBU, in radians."""
        diff = self.rru_positions - self.bbu_position
        return np.arctan2(diff[:, 1], diff[:, 0])


def _subarea_grid(num_rrus):
    """Partition the square into a grid of ``num_rrus`` equal rectangles.

    Uses the smallest divisor of R that is >= sqrt(R) as the column count,
    which reproduces the 2x2 quadrant layout for R=4 and a 4x2 grid for R=8.
    """
    cols = next(c for c in range(int(math.ceil(math.sqrt(num_rrus))), num_rrus + 1)
                if num_rrus % c == 0)
    rows = num_rrus // cols
    return cols, rows


def place_topology(cfg, rng_seed):
    """Place the BBU at the origin, RRUs at subarea centres, UDs uniformly.

    Each RRU's UDs are drawn uniformly inside that RRU's own subarea, at
    least 1 m away from the RRU, so the configured per-RRU UD counts hold.
    """
    rng = np.random.default_rng(rng_seed)
    cols, rows = _subarea_grid(cfg.num_rrus)
    w = 2.0 * HALF_SIDE / cols
    h = 2.0 * HALF_SIDE / rows

    centres = []
    for r in range(cfg.num_rrus):
        i, j = r % cols, r // cols
        centres.append([-HALF_SIDE + (i + 0.5) * w, -HALF_SIDE + (j + 0.5) * h])
    centres = np.asarray(centres)
    # Degenerate layouts (R=1) put a centre on the BBU; nudge it off.
    on_bbu = np.linalg.norm(centres, axis=1) < MIN_DISTANCE_M
    centres[on_bbu] += np.array([MIN_DISTANCE_M, 0.0])

    ud_positions = []
    for r, u_r in enumerate(cfg.uds_per_rru):
        placed = 0
        while placed < u_r:
            i, j = r % cols, r // cols
            lo = np.array([-HALF_SIDE + i * w, -HALF_SIDE + j * h])
            p = lo + rng.random(2) * np.array([w, h])
            if np.linalg.norm(p - centres[r]) >= MIN_DISTANCE_M:
                ud_positions.append(p)
                placed += 1
    return Topology(
        bbu_position=np.zeros(2),
        rru_positions=centres,
        ud_positions=np.asarray(ud_positions),
        uds_per_rru=cfg.uds_per_rru,
    )


@dataclass(frozen=True)
class PowerSharingVector:
    """The 2K decision variables: pilot fractions per UD and per forwarding TA."""

    eta_access: np.ndarray
    eta_fronthaul: np.ndarray

    def __post_init__(self):
        ea = np.asarray(self.eta_access, dtype=float)
        ef = np.asarray(self.eta_fronthaul, dtype=float)
        object.__setattr__(self, "eta_access", ea)
        object.__setattr__(self, "eta_fronthaul", ef)
        if ea.shape != ef.shape:
            raise ValueError("eta_access and eta_fronthaul must have equal length")
        for v in (ea, ef):
            if np.any(v < ETA_GUARD) or np.any(v > 1.0 - ETA_GUARD):
                raise ValueError("power sharing factors must lie in the guarded box")

    @classmethod
    def uniform(cls, num_uds, value=0.5):
        return cls(np.full(num_uds, value), np.full(num_uds, value))

    @classmethod
    def from_flat(cls, genes):
        genes = np.asarray(genes, dtype=float)
        k = genes.size // 2
        return cls(genes[:k], genes[k:])

    def flatten(self):
        return np.concatenate([self.eta_access, self.eta_fronthaul])


@dataclass(frozen=True)
class LinkBudget:
    """All transmit/receive power diagonals plus noise variances, in watts.

    ``p_rx_access`` has shape (R, K): receive power of every UD's data at
    every RRU; the serving entries are also exposed as ``p_rx_ud_*``.
    """

    p_tx_pilot: np.ndarray          # (K,) UD pilot transmit power
    p_tx_data: np.ndarray           # (K,) UD data transmit power
    p_sp: np.ndarray                # (R,) RRU signal-processing power
    p_ta_pilot: np.ndarray          # (K,) forwarding-TA pilot power
    p_ta_data: np.ndarray           # (K,) forwarding-TA data power
    p_rx_ud_pilot: np.ndarray       # (K,) UD pilot power at serving RRU
    p_rx_ud_data: np.ndarray        # (K,) UD data power at serving RRU
    p_rx_access_pilot: np.ndarray   # (R, K) UD pilot power at each RRU
    p_rx_access_data: np.ndarray    # (R, K) UD data power at each RRU
    p_rx_ta_pilot: np.ndarray       # (K,) forwarded pilot power at the BBU
    p_rx_ta_data: np.ndarray        # (K,) forwarded data power at the BBU
    noise_variance_access: float
    noise_variance_fronthaul: float

    @property
    def amplification(self):
        """Diagonal of the RRU amplify-and-forward gain, 1 / P_rx_data."""
        return 1.0 / self.p_rx_ud_data


def build_link_budget(cfg, topo, eta):
    """Evaluate every pilot/data split and receive power for one η vector."""
    imap = topo.index_map
    k_total = cfg.num_uds
    if len(eta.eta_access) != k_total:
        raise ValueError("power sharing vector length mismatch")

    p_tx_pilot = eta.eta_access * cfg.p_ud_watts
    p_tx_data = (1.0 - eta.eta_access) * cfg.p_ud_watts

    u = np.asarray(cfg.uds_per_rru, dtype=float)
    p_sp = cfg.receiver_efficiency * u * cfg.p_ud_watts
    if np.any(p_sp >= cfg.p_rru_watts):
        raise InfeasibleBudgetError(
            "signal-processing power leaves nothing for forwarding")
    per_ta = (cfg.p_rru_watts - p_sp[imap.rru_of]) / u[imap.rru_of]
    p_ta_pilot = eta.eta_fronthaul * per_ta
    p_ta_data = (1.0 - eta.eta_fronthaul) * per_ta

    gain_access = _linear_gain(
        pathloss_access(topo.ud_rru_distances(), cfg.f_access_hz))  # (R, K)
    gain_fronthaul = _linear_gain(
        pathloss_fronthaul(topo.rru_bbu_distances(), cfg.f_fronthaul_ghz))  # (R,)

    serving_gain = gain_access[imap.rru_of, np.arange(k_total)]
    stream_gain = gain_fronthaul[imap.rru_of]

    sigma2 = cfg.noise_variance_watts
    return LinkBudget(
        p_tx_pilot=p_tx_pilot,
        p_tx_data=p_tx_data,
        p_sp=p_sp,
        p_ta_pilot=p_ta_pilot,
        p_ta_data=p_ta_data,
        p_rx_ud_pilot=p_tx_pilot * serving_gain,
        p_rx_ud_data=p_tx_data * serving_gain,
        p_rx_access_pilot=gain_access * p_tx_pilot[None, :],
        p_rx_access_data=gain_access * p_tx_data[None, :],
        p_rx_ta_pilot=p_ta_pilot * stream_gain,
        p_rx_ta_data=p_ta_data * stream_gain,
        noise_variance_access=sigma2,
        noise_variance_fronthaul=sigma2,
    )


# --- configuration file ----------------------------------------------------

_INT_KEYS = {"num_uds", "num_rrus", "rru_antennas", "bbu_antennas"}


def parse_config_text(text):
    """Parse flat ``key = value`` lines into a SystemConfig.

    '#' starts a comment; missing keys take the default values.
    ``uds_per_rru`` is a comma-separated list; if absent but num_uds or
    num_rrus changed, an even partition is used.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in SystemConfig.__dataclass_fields__:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key == "uds_per_rru":
            values[key] = tuple(int(x) for x in val.split(","))
        elif key in _INT_KEYS:
            values[key] = int(val)
        else:
            values[key] = float(val)
    if "uds_per_rru" not in values and ("num_uds" in values or "num_rrus" in values):
        k = values.get("num_uds", SystemConfig.num_uds)
        r = values.get("num_rrus", SystemConfig.num_rrus)
        values["uds_per_rru"] = even_partition(k, r)
    return SystemConfig(**values)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
