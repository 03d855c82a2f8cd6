"""Closed-form mixing-time upper bounds for the four samplers.

Factorials and powers are evaluated in log space (``math.lgamma``) so that
bounds far beyond float or int64 range still produce a usable log value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

MAX_STEPS = 2**62


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class BoundInputs:
    k: int
    delta: int
    diam: int
    n: int
    epsilon: float = 0.05

    def __post_init__(self):
        if self.k < 2:
            raise BoundError("k must be >= 2")
        if self.delta < 1:
            raise BoundError("max degree must be >= 1")
        if self.diam < 1:
            raise BoundError("diameter must be >= 1")
        if self.n <= self.k:
            raise BoundError("need |V| > k")
        if not 0 < self.epsilon <= 1:
            raise BoundError("epsilon must lie in (0, 1]")

    @classmethod
    def from_graph(cls, g, k: int, epsilon: float = 0.05, diam: int | None = None):
        from .graph import diameter, max_degree
        return cls(k, max_degree(g), diameter(g) if diam is None else diam, g.n, epsilon)


class Bound(NamedTuple):
    """A bound as ``value`` (inf on overflow), ``log_value`` and ``ceil`` steps.

    ``ceil`` is None when the step count does not fit in 2**62.
    """

    value: float
    log_value: float
    ceil: int | None
    overflow: bool

    def steps(self, ratio: float = 1.0, cap: int | None = None) -> int:
        """``ceil(ratio * bound)``, optionally capped; raises if unrepresentable."""
        if ratio == 0:
            scaled = 0
        else:
            log_scaled = self.log_value + math.log(ratio)
            if log_scaled > math.log(MAX_STEPS):
                if cap is None:
                    raise BoundError(
                        f"step count exp({log_scaled:.1f}) exceeds 2**62; lower step_ratio "
                        "or set an explicit step cap"
                    )
                return int(cap)
            scaled = math.ceil(math.exp(log_scaled))
        return scaled if cap is None else min(scaled, int(cap))


def _make(log_value: float) -> Bound:
    try:
        value = math.exp(log_value)
    except OverflowError:
        value = math.inf
    if log_value > math.log(MAX_STEPS):
        return Bound(value, log_value, None, True)
    return Bound(value, log_value, math.ceil(value), False)


def _lnfact(x: int) -> float:
    return math.lgamma(x + 1)


def bound_mcmc(b: BoundInputs) -> Bound:
    """1/2 k! Delta^k (D+k-1) |V| (k ln|V| + ln 1/eps)."""
    k, lnV = b.k, math.log(b.n)
    tail = k * lnV - math.log(b.epsilon)
    return _make(math.log(0.5) + _lnfact(k) + k * math.log(b.delta)
                 + math.log(b.diam + k - 1) + lnV + math.log(tail))


def bound_degree_prop(b: BoundInputs) -> Bound:
    """2 k Delta (ln k + ln Delta + k ln|V| + ln 1/eps); diameter unused."""
    k = b.k
    tail = math.log(k) + math.log(b.delta) + k * math.log(b.n) - math.log(b.epsilon)
    return _make(math.log(2 * k * b.delta) + math.log(tail))


def bound_rss_plus(b: BoundInputs) -> Bound:
    """2 k Delta (k ln|V| + 3 ln k + ln Delta + ln 1/eps); diameter unused."""
    k = b.k
    tail = k * math.log(b.n) + 3 * math.log(k) + math.log(b.delta) - math.log(b.epsilon)
    return _make(math.log(2 * k * b.delta) + math.log(tail))


def bound_psrw(b: BoundInputs) -> Bound:
    """1/2 (k-1)! (k-1) Delta^k (D+k-2) |V| ((k-1) ln|V| + ln(k-1) + ln Delta + ln 1/eps)."""
    k = b.k
    if k < 3:
        raise BoundError("PSRW walks on the (k-1)-state graph and needs k >= 3")
    lnV = math.log(b.n)
    tail = (k - 1) * lnV + math.log(k - 1) + math.log(b.delta) - math.log(b.epsilon)
    return _make(math.log(0.5) + _lnfact(k - 1) + math.log(k - 1) + k * math.log(b.delta)
                 + math.log(b.diam + k - 2) + lnV + math.log(tail))


def all_bounds(b: BoundInputs) -> dict[str, Bound]:
    out = {"mcmc": bound_mcmc(b), "rss": bound_degree_prop(b), "rss+": bound_rss_plus(b)}
    if b.k >= 3:
        out["psrw"] = bound_psrw(b)
    return out
