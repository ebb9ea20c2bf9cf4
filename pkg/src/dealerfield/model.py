"""Core market and dealer types shared by every other module.

All configuration objects are immutable; the only mutable type is
DealerState, which is owned by exactly one simulation run.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

BETA_SUM_TOL = 1e-9
GRID_REL_TOL = 1e-9


class ViolationCode(Enum):
    """Machine-readable reasons a configuration can be rejected."""

    NON_POSITIVE_GAMMA = "NonPositiveGamma"
    NON_POSITIVE_BETA = "NonPositiveBeta"
    BETA_SUM_VIOLATION = "BetaSumViolation"
    BAD_TIME_GRID = "BadTimeGrid"
    BAD_MARKET_PARAM = "BadMarketParam"
    EMPTY_DEALER_LIST = "EmptyDealerList"
    BAD_RUN_COUNT = "BadRunCount"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    message: str


class ConfigError(ValueError):
    """Raised by validate() with the complete list of violated invariants."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(v.message for v in violations))


@dataclass(frozen=True)
class MarketParams:
    """Global market constants.

    s0      initial mid-price
    sigma   mid-price volatility (price per sqrt(time))
    horizon terminal time T
    dt      step length
    a_rate  order-flow intensity scale A
    k       intensity decay per unit price offset
    """

    s0: float
    sigma: float
    horizon: float
    dt: float
    a_rate: float
    k: float

    @property
    def n_steps(self) -> int:
        """Number of quoting steps; quotes are set at t_0 .. t_{n-1}."""
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class DealerSpec:
    """One dealer's static profile.

    beta is the dealer's influence weight on aggregate order flow; None
    means "fill with 1/N" at validation time.
    """

    gamma: float
    beta: float | None = None
    q0: int = 0
    x0: float = 0.0


@dataclass
class DealerState:
    """A dealer's evolving state inside a single run.  Not shared."""

    q: int
    x: float
    fills_ask: int = 0
    fills_bid: int = 0


@dataclass(frozen=True)
class QuotePair:
    """Bid/ask offsets from the mid-price: bid = s - delta_b, ask = s + delta_a.

    Either offset may be negative (a dealer shedding inventory can quote
    through the mid); only the sum delta_b + delta_a is sign-constrained,
    and that only for a single dealer's own quotes.
    """

    delta_b: float
    delta_a: float

    @property
    def spread(self) -> float:
        return self.delta_b + self.delta_a


@dataclass(frozen=True)
class SimConfig:
    """A complete, reproducible experiment description."""

    market: MarketParams
    dealers: tuple[DealerSpec, ...]
    runs: int = 1
    seed: int = 0
    beta_sum_override: bool = False
    trace: bool = False
    alt_denominator: bool = False

    @property
    def n_dealers(self) -> int:
        return len(self.dealers)


def validate(config: SimConfig) -> SimConfig:
    """Check every invariant and return the resolved configuration.

    Unspecified betas are filled with 1/N.  All violations are collected
    before raising, so a bad config reports everything wrong at once.
    Idempotent: validate(validate(c)) == validate(c).
    """
    violations: list[Violation] = []
    m = config.market

    if not config.dealers:
        violations.append(Violation(ViolationCode.EMPTY_DEALER_LIST,
                                    "at least one dealer is required"))
    if config.runs < 1:
        violations.append(Violation(ViolationCode.BAD_RUN_COUNT,
                                    f"runs must be >= 1, got {config.runs}"))

    if m.sigma < 0:
        violations.append(Violation(ViolationCode.BAD_MARKET_PARAM,
                                    f"sigma must be >= 0, got {m.sigma}"))
    if m.a_rate < 0:
        violations.append(Violation(ViolationCode.BAD_MARKET_PARAM,
                                    f"a_rate must be >= 0, got {m.a_rate}"))
    if m.k <= 0:
        violations.append(Violation(ViolationCode.BAD_MARKET_PARAM,
                                    f"k must be > 0, got {m.k}"))
    if m.horizon <= 0:
        violations.append(Violation(ViolationCode.BAD_TIME_GRID,
                                    f"horizon must be > 0, got {m.horizon}"))
    elif not 0 < m.dt <= m.horizon:
        violations.append(Violation(ViolationCode.BAD_TIME_GRID,
                                    f"dt must satisfy 0 < dt <= horizon, got {m.dt}"))
    else:
        n = m.n_steps
        if n < 1 or abs(n * m.dt - m.horizon) > GRID_REL_TOL * m.horizon:
            violations.append(Violation(
                ViolationCode.BAD_TIME_GRID,
                f"horizon {m.horizon} is not an integer number of dt {m.dt} steps"))

    n_dealers = len(config.dealers)
    resolved: list[DealerSpec] = []
    for i, d in enumerate(config.dealers):
        if d.gamma <= 0:
            violations.append(Violation(ViolationCode.NON_POSITIVE_GAMMA,
                                        f"dealer {i}: gamma must be > 0, got {d.gamma}"))
        beta = d.beta if d.beta is not None else 1.0 / n_dealers
        if beta <= 0:
            violations.append(Violation(ViolationCode.NON_POSITIVE_BETA,
                                        f"dealer {i}: beta must be > 0, got {beta}"))
        resolved.append(replace(d, beta=beta) if d.beta is None else d)

    if n_dealers and not config.beta_sum_override:
        total = sum(d.beta if d.beta is not None else 1.0 / n_dealers
                    for d in config.dealers)
        if abs(total - 1.0) > BETA_SUM_TOL:
            violations.append(Violation(
                ViolationCode.BETA_SUM_VIOLATION,
                f"dealer betas sum to {total}, expected 1 (set beta_sum_override to allow)"))

    if violations:
        raise ConfigError(violations)
    return replace(config, dealers=tuple(resolved))


def time_grid(market: MarketParams) -> list[float]:
    """Full step-time grid t_0 = 0 < t_1 < ... < t_n = horizon.

    Quotes are set at t_0 .. t_{n-1}; no quoting happens at t_n.
    Times are computed as l * dt directly, never by accumulation.
    """
    return [l * market.dt for l in range(market.n_steps + 1)]


def quoting_times(market: MarketParams) -> list[float]:
    """The n quoting instants t_0 .. t_{n-1}."""
    return time_grid(market)[:-1]
