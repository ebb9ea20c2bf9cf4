"""Competitive order-arrival intensities and per-step fill probabilities.

The aggregate market-order rate on one side of the book is

    Lambda = A * exp(-k * sum_j beta_j * delta_j)

i.e. every dealer's offset dampens total flow in proportion to their
influence weight.  Two per-dealer rates are derived from it:

  * dealer_rate    -- the power-law execution rate
                      Lambda * exp(-(1 - 1/N) * beta_i * delta_i),
                      used by the value-function machinery (the quote
                      optimality conditions differentiate this form);
  * flow_share_rate -- beta_i * Lambda, the dealer's proportional share
                      of aggregate flow, used by the simulation engine
                      (this is the split that reproduces the reference
                      profit tables; see the engine module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class IntensityInputs:
    """One side's offsets and weights for all N dealers."""

    deltas: tuple[float, ...]
    betas: tuple[float, ...]
    a_rate: float
    k: float

    def __post_init__(self):
        if len(self.deltas) != len(self.betas) or not self.deltas:
            raise ValueError("deltas and betas must be equal-length, non-empty")

    @property
    def n_dealers(self) -> int:
        return len(self.deltas)


@dataclass
class ClampCounter:
    """Counts how often a fill probability had to be clamped at 1."""

    count: int = 0


_EXP_CAP = 700.0  # exp(709) overflows a double; beyond this the rate is "always fills"


def _safe_exp(arg: float) -> float:
    return math.exp(min(arg, _EXP_CAP))


def aggregate_rate(inputs: IntensityInputs) -> float:
    """Total market-order arrival rate given every dealer's offset."""
    s = sum(b * d for b, d in zip(inputs.betas, inputs.deltas))
    return inputs.a_rate * _safe_exp(-inputs.k * s)


def dealer_rate(i: int, inputs: IntensityInputs) -> float:
    """Dealer i's power-law execution rate.

    Collapses to the aggregate rate when N = 1 (the extra exponent
    vanishes).  Strictly decreasing in every offset, fastest in the
    dealer's own.
    """
    if not 0 <= i < inputs.n_dealers:
        raise IndexError(f"dealer index {i} out of range [0, {inputs.n_dealers})")
    n = inputs.n_dealers
    own = (1.0 - 1.0 / n) * inputs.betas[i] * inputs.deltas[i]
    return aggregate_rate(inputs) * _safe_exp(-own)


def flow_share_rate(i: int, inputs: IntensityInputs) -> float:
    """Dealer i's proportional share beta_i * Lambda of aggregate flow."""
    if not 0 <= i < inputs.n_dealers:
        raise IndexError(f"dealer index {i} out of range [0, {inputs.n_dealers})")
    return inputs.betas[i] * aggregate_rate(inputs)


def fill_probability(rate: float, dt: float, clamp: ClampCounter | None = None) -> float:
    """Bernoulli fill probability min(rate * dt, 1) for one step.

    rate * dt > 1 is possible under extreme quote skews; the probability
    is clamped rather than rejected and the event is counted.
    """
    p = rate * dt
    if p > 1.0:
        if clamp is not None:
            clamp.count += 1
        return 1.0
    return p
