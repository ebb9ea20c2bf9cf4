"""Closed-form reservation prices and optimal competitive quotes.

Everything here is a pure function of a QuoteContext.  The optimal
offsets decompose into an inventory-independent half-spread plus an
inventory skew; quotes are built from exactly that decomposition so the
structural identities (spread independent of q, ask/bid mirror symmetry,
reservation chaining) hold at machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import QuotePair


@dataclass(frozen=True)
class QuoteContext:
    """Everything one dealer's quote depends on at a single instant.

    tau is time remaining to the horizon, evaluated at the quoting
    instant (left endpoint of the step).
    """

    q: int
    gamma: float
    beta: float
    k: float
    n_dealers: int
    sigma: float
    tau: float

    @property
    def kappa(self) -> float:
        """Effective own-offset decay (k + 1 - 1/N) * beta."""
        return (self.k + 1.0 - 1.0 / self.n_dealers) * self.beta


def base_offset(ctx: QuoteContext) -> float:
    """The competitive markup (1/gamma) * ln(1 + gamma/kappa).

    This is the distance of each quote beyond its reservation price; it
    does not depend on inventory or time.
    """
    return math.log1p(ctx.gamma / ctx.kappa) / ctx.gamma


def inactive_value(x: float, s: float, ctx: QuoteContext) -> float:
    """Expected utility of freezing inventory q until the horizon.

    Always negative; at tau = 0 it reduces to -exp(-gamma * (x + q*s)).
    """
    g, q = ctx.gamma, ctx.q
    risk = 0.5 * (g * q * ctx.sigma) ** 2 * ctx.tau
    return -math.exp(-g * (x + q * s) + risk)


def reservation_prices(s: float, ctx: QuoteContext) -> tuple[float, float, float]:
    """Indifference prices (r_b, r_a, r_mid) for buying/selling one unit.

    The integer coefficients are formed before multiplying so that
    r_b(q) == r_a(q+1) holds bit-for-bit.
    """
    half = 0.5 * ctx.gamma * ctx.sigma * ctx.sigma * ctx.tau
    r_b = s + (-1 - 2 * ctx.q) * half
    r_a = s + (1 - 2 * ctx.q) * half
    r_mid = s + (-2 * ctx.q) * half
    return r_b, r_a, r_mid


def spread(ctx: QuoteContext) -> float:
    """One dealer's bid-ask spread gamma*sigma^2*tau + (2/gamma)*ln(1 + gamma/kappa).

    Independent of inventory; always positive.
    """
    return ctx.gamma * ctx.sigma * ctx.sigma * ctx.tau + 2.0 * base_offset(ctx)


def price_adjustment(ctx: QuoteContext) -> float:
    """Quote skew m = delta_a - delta_b = -2*q*gamma*sigma^2*tau.

    Negative when long (quotes pushed down to sell), positive when short.
    """
    return (-2 * ctx.q) * ctx.gamma * ctx.sigma * ctx.sigma * ctx.tau


def optimal_quotes(ctx: QuoteContext) -> QuotePair:
    """Optimal bid/ask offsets for one dealer under N-way competition.

    delta_b = base + (gamma*sigma^2*tau/2)(2q + 1)
    delta_a = base + (gamma*sigma^2*tau/2)(-2q + 1)

    Built as half-spread -/+ half-skew, which makes delta_a(q) bitwise
    equal to delta_b(-q).
    """
    half_spread = 0.5 * spread(ctx)
    half_skew = 0.5 * price_adjustment(ctx)
    return QuotePair(delta_b=half_spread - half_skew,
                     delta_a=half_spread + half_skew)
