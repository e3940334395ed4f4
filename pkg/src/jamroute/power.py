"""Per-link outage budgeting and minimum-power inversion.

An end-to-end outage budget is split evenly across the hops of a route:
every link gets the same target, chosen so that composing the targets over
all hops reproduces the budget exactly. The outage model is monotone in
transmit power, so the cheapest power meeting a target is found by
bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .channel import LinkGeometry, QosParams, approx_link_outage, link_outage
from .errors import ConfigurationError

# Default bracket floor and convergence for the bisection, relative to the
# power cap.
BRACKET_FLOOR_FACTOR = 1e-12
DEFAULT_TOL = 1e-9
DEFAULT_POWER_FLOOR_W = 1e-6

# Bound on bracket-expansion steps when the power cap is infinite.
_MAX_BRACKET_STEPS = 4096


def per_link_target(outage_budget: float, hop_count: int) -> float:
    """Equal per-link outage target: ``1 - (1 - budget)**(1 / hop_count)``.

    Composing ``hop_count`` links at this target yields the budget exactly.
    """
    if not 0.0 < outage_budget < 1.0:
        raise ConfigurationError(f"outage budget must lie in (0, 1), got {outage_budget}")
    if hop_count < 1:
        raise ConfigurationError(f"hop count must be a positive integer, got {hop_count}")
    return -math.expm1(math.log1p(-outage_budget) / hop_count)


@dataclass(frozen=True)
class MessageSpec:
    """Payload size and rate; fixes the transmit duration of every hop."""

    bits: float
    spectral_efficiency: float

    def __post_init__(self) -> None:
        if self.bits <= 0.0 or not math.isfinite(self.bits):
            raise ConfigurationError(f"message size must be positive, got {self.bits}")
        if self.spectral_efficiency <= 0.0 or not math.isfinite(self.spectral_efficiency):
            raise ConfigurationError(
                f"spectral_efficiency must be positive, got {self.spectral_efficiency}"
            )

    @property
    def tx_duration(self) -> float:
        """Seconds on air per hop: bits / (bits/s/Hz), unit bandwidth."""
        return self.bits / self.spectral_efficiency


def link_energy(power_w: float, msg: MessageSpec) -> float:
    """Energy spent transmitting the message once at ``power_w`` watts."""
    return power_w * msg.tx_duration


@dataclass(frozen=True)
class PowerSolveResult:
    """Outcome of a minimum-power search; ``power_w`` is set iff feasible."""

    feasible: bool
    power_w: Optional[float]
    achieved_outage: float


def min_power_for_outage(
    target: float,
    link: LinkGeometry,
    qos: QosParams,
    *,
    tol: float = DEFAULT_TOL,
    power_floor_w: float = DEFAULT_POWER_FLOOR_W,
    approximate: bool = False,
) -> PowerSolveResult:
    """Least transmit power whose outage does not exceed ``target``.

    Bisects the monotone outage curve to relative tolerance ``tol`` and
    returns the feasible (upper) end of the bracket, so the achieved outage
    never exceeds the target. Links without active jammers have zero outage
    at any power and are priced at ``power_floor_w``. Infeasible means the
    target is unreachable even at the power cap.
    """
    if not 0.0 < target < 1.0:
        raise ConfigurationError(f"outage target must lie in (0, 1), got {target}")
    if tol <= 0.0 or not math.isfinite(tol):
        raise ConfigurationError(f"tolerance must be positive and finite, got {tol}")
    if not 0.0 < power_floor_w < qos.max_power_w:
        raise ConfigurationError(
            f"power floor must lie in (0, max_power_w), got {power_floor_w}"
        )
    outage = approx_link_outage if approximate else link_outage
    if not link.jammers or all(p == 0.0 for p, _ in link.jammers):
        return PowerSolveResult(feasible=True, power_w=power_floor_w, achieved_outage=0.0)

    if math.isinf(qos.max_power_w):
        hi = 1.0
        for _ in range(_MAX_BRACKET_STEPS):
            if outage(hi, link, qos) <= target:
                break
            hi *= 2.0
        else:
            raise ConfigurationError("minimum-power bracket expansion failed to converge")
        lo = hi / 2.0
        for _ in range(_MAX_BRACKET_STEPS):
            if outage(lo, link, qos) > target or lo < 1e-300:
                break
            lo /= 2.0
        if outage(lo, link, qos) <= target:
            return PowerSolveResult(feasible=True, power_w=lo, achieved_outage=outage(lo, link, qos))
    else:
        hi = qos.max_power_w
        worst_case = outage(hi, link, qos)
        if worst_case > target:
            return PowerSolveResult(feasible=False, power_w=None, achieved_outage=worst_case)
        lo = qos.max_power_w * BRACKET_FLOOR_FACTOR
        if outage(lo, link, qos) <= target:
            return PowerSolveResult(feasible=True, power_w=lo, achieved_outage=outage(lo, link, qos))

    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if outage(mid, link, qos) > target:
            lo = mid
        else:
            hi = mid
    return PowerSolveResult(feasible=True, power_w=hi, achieved_outage=outage(hi, link, qos))
