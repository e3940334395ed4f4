"""Link outage model for Rayleigh-faded links under jammer interference.

All channels (desired and jamming) fade independently with unit-mean
exponential power gains. Reception fails when the signal-to-interference
ratio drops below the threshold implied by the link's spectral efficiency;
thermal noise is neglected. Under these assumptions the outage probability
of a single link has a closed form: one factor ``1 / (1 + ratio_k)`` per
jammer, where ``ratio_k`` is the jammer-to-signal received power ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError

# Above this many jammers the outage product is evaluated in log space to
# dodge overflow/underflow in the running product.
_LOG_SPACE_JAMMER_COUNT = 64

# Monte Carlo sampling is chunked to bound peak memory.
_MC_CHUNK = 1 << 17


def sir_threshold(spectral_efficiency: float) -> float:
    """SIR needed to sustain ``spectral_efficiency`` bits/s/Hz: ``2**rho - 1``."""
    if spectral_efficiency < 0.0 or not math.isfinite(spectral_efficiency):
        raise ConfigurationError(
            f"spectral efficiency must be >= 0 and finite, got {spectral_efficiency}"
        )
    return 2.0**spectral_efficiency - 1.0


@dataclass(frozen=True)
class QosParams:
    """Quality-of-service contract shared by every link of a route.

    ``sir_threshold`` is derived from ``spectral_efficiency`` unless given
    explicitly. ``max_power_w`` may be ``math.inf`` to lift the cap.
    """

    spectral_efficiency: float
    path_loss_exponent: float
    outage_budget: float
    max_power_w: float
    sir_threshold: Optional[float] = None

    def __post_init__(self) -> None:
        if self.spectral_efficiency <= 0.0 or not math.isfinite(self.spectral_efficiency):
            raise ConfigurationError(
                f"spectral_efficiency must be positive, got {self.spectral_efficiency}"
            )
        if self.path_loss_exponent < 2.0 or not math.isfinite(self.path_loss_exponent):
            raise ConfigurationError(
                f"path_loss_exponent must be >= 2, got {self.path_loss_exponent}"
            )
        if not 0.0 < self.outage_budget < 1.0:
            raise ConfigurationError(
                f"outage_budget must lie in (0, 1), got {self.outage_budget}"
            )
        if not self.max_power_w > 0.0 or math.isnan(self.max_power_w):
            raise ConfigurationError(f"max_power_w must be positive, got {self.max_power_w}")
        if self.sir_threshold is None:
            object.__setattr__(self, "sir_threshold", sir_threshold(self.spectral_efficiency))
        elif self.sir_threshold <= 0.0 or not math.isfinite(self.sir_threshold):
            raise ConfigurationError(f"sir_threshold must be positive, got {self.sir_threshold}")


@dataclass(frozen=True)
class LinkGeometry:
    """Distances defining one link: transmitter-receiver plus every jammer.

    ``jammers`` holds ``(power_w, distance_m)`` pairs measured to the
    receiver.
    """

    tx_rx_distance: float
    jammers: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.tx_rx_distance <= 0.0 or not math.isfinite(self.tx_rx_distance):
            raise ConfigurationError(
                f"tx_rx_distance must be positive and finite, got {self.tx_rx_distance}"
            )
        for power, dist in self.jammers:
            if power < 0.0 or not math.isfinite(power):
                raise ConfigurationError(f"jammer power must be >= 0 and finite, got {power}")
            if dist <= 0.0 or not math.isfinite(dist):
                raise ConfigurationError(f"jammer distance must be positive, got {dist}")

    def jammer_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.jammers:
            return np.empty(0), np.empty(0)
        arr = np.asarray(self.jammers, dtype=float)
        return arr[:, 0], arr[:, 1]


def _interference_ratios(power_w: float, link: LinkGeometry, qos: QosParams) -> np.ndarray:
    """Per-jammer ratio ``gamma * P_k * d_k**-alpha / (P * d**-alpha)``."""
    powers, dists = link.jammer_arrays()
    alpha = qos.path_loss_exponent
    return qos.sir_threshold * powers * dists ** (-alpha) * link.tx_rx_distance**alpha / power_w


def link_outage(power_w: float, link: LinkGeometry, qos: QosParams) -> float:
    """Exact outage probability of the link at transmit power ``power_w``.

    With no jammers the SIR is unbounded and the outage is exactly zero.
    """
    if power_w <= 0.0 or not math.isfinite(power_w):
        raise ConfigurationError(f"transmit power must be positive and finite, got {power_w}")
    if not link.jammers:
        return 0.0
    ratios = _interference_ratios(power_w, link, qos)
    if len(ratios) <= _LOG_SPACE_JAMMER_COUNT:
        return float(1.0 - 1.0 / np.prod(1.0 + ratios))
    return float(-np.expm1(-np.log1p(ratios).sum()))


def approx_link_outage(power_w: float, link: LinkGeometry, qos: QosParams) -> float:
    """First-order upper bound on the outage: ``1 - exp(-sum of ratios)``.

    Follows from ``1 + r <= exp(r)``, so this never falls below
    ``link_outage`` at the same power.
    """
    if power_w <= 0.0 or not math.isfinite(power_w):
        raise ConfigurationError(f"transmit power must be positive and finite, got {power_w}")
    if not link.jammers:
        return 0.0
    return float(-np.expm1(-_interference_ratios(power_w, link, qos).sum()))


def mc_link_outage(
    power_w: float,
    link: LinkGeometry,
    qos: QosParams,
    samples: int,
    seed: int,
) -> float:
    """Monte Carlo outage estimate over independent Rayleigh fades.

    Deterministic for a given seed. Used as the simulation cross-check for
    the closed form, never inside the planner.
    """
    if power_w <= 0.0 or not math.isfinite(power_w):
        raise ConfigurationError(f"transmit power must be positive and finite, got {power_w}")
    if samples <= 0:
        raise ConfigurationError(f"sample count must be positive, got {samples}")
    powers, dists = link.jammer_arrays()
    if len(powers) == 0:
        return 0.0
    alpha = qos.path_loss_exponent
    signal_scale = power_w * link.tx_rx_distance ** (-alpha)
    jam_scales = powers * dists ** (-alpha)
    rng = np.random.default_rng(seed)
    failures = 0
    remaining = samples
    while remaining > 0:
        n = min(remaining, _MC_CHUNK)
        signal = signal_scale * rng.exponential(size=n)
        interference = rng.exponential(size=(n, len(jam_scales))) @ jam_scales
        failures += int(np.count_nonzero(signal < qos.sir_threshold * interference))
        remaining -= n
    return failures / samples


def end_to_end_outage(per_link: Sequence[float]) -> float:
    """Outage of a route whose links fail independently: ``1 - prod(1 - p_i)``."""
    for p in per_link:
        if not 0.0 <= p <= 1.0:
            raise ConfigurationError(f"link outage probabilities must lie in [0, 1], got {p}")
    if len(per_link) == 1:
        # a lone link keeps its outage bit-for-bit
        return float(per_link[0])
    survival = 1.0
    for p in per_link:
        survival *= 1.0 - p
    return 1.0 - survival
