"""Ensemble statistics in the reference table layout, plus the analytic
values for the deterministic columns."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import RunResult
from .model import DealerSpec, MarketParams


class EmptyEnsemble(ValueError):
    """ensemble_stats needs at least one run."""


def profit(run: RunResult, i: int) -> float:
    """Mark-to-market gain: x_T + q_T * s_T - (x_0 + q_0 * s_0).

    Terminal inventory is marked at the terminal mid-price (no forced
    liquidation), and the initial mark is subtracted so the arbitrary
    starting cash drops out.
    """
    d = run.dealers[i]
    return d.x_t + d.q_t * run.s_last - (d.x0 + d.q0 * run.s_first)


def _log_markup(dealer: DealerSpec, market: MarketParams, n_dealers: int) -> float:
    kappa = (market.k + 1.0 - 1.0 / n_dealers) * dealer.beta
    return math.log1p(dealer.gamma / kappa) / dealer.gamma


def analytic_average_spread(dealer: DealerSpec, market: MarketParams,
                            n_dealers: int) -> float:
    """Time average of the quoted spread over [0, T]:

        (2/gamma) * ln(1 + gamma/kappa) + gamma * sigma^2 * T / 2
    """
    return (2.0 * _log_markup(dealer, market, n_dealers)
            + 0.5 * dealer.gamma * market.sigma ** 2 * market.horizon)


def grid_average_spread(dealer: DealerSpec, market: MarketParams,
                        n_dealers: int) -> float:
    """Equal-weight mean of the quoted spread over the quoting instants.

    This is what a simulated run reports; it exceeds the continuous time
    average by gamma * sigma^2 * dt / 2 because quotes are evaluated at
    left endpoints.
    """
    n = market.n_steps
    mean_tau = market.horizon - 0.5 * market.dt * (n - 1)
    return (2.0 * _log_markup(dealer, market, n_dealers)
            + dealer.gamma * market.sigma ** 2 * mean_tau)


@dataclass(frozen=True)
class DealerStats:
    average_spread: float
    mean_profit: float
    std_profit: float
    mean_q_t: float
    std_q_t: float


@dataclass(frozen=True)
class EnsembleStats:
    dealers: tuple[DealerStats, ...]
    n_runs: int
    clamp_total: int
    std_defined: bool  # False for a single run, where std is reported as 0


def ensemble_stats(results: list[RunResult]) -> EnsembleStats:
    """Per-dealer mean/std of profit and terminal inventory (ddof=1)."""
    if not results:
        raise EmptyEnsemble("no runs to aggregate")
    n_runs = len(results)
    n_dealers = len(results[0].dealers)
    std_defined = n_runs > 1

    rows = []
    for i in range(n_dealers):
        profits = np.array([profit(r, i) for r in results])
        q_t = np.array([r.dealers[i].q_t for r in results], dtype=float)
        spreads = np.array([r.dealers[i].avg_spread for r in results])
        rows.append(DealerStats(
            average_spread=float(spreads.mean()),
            mean_profit=float(profits.mean()),
            std_profit=float(profits.std(ddof=1)) if std_defined else 0.0,
            mean_q_t=float(q_t.mean()),
            std_q_t=float(q_t.std(ddof=1)) if std_defined else 0.0))
    return EnsembleStats(dealers=tuple(rows), n_runs=n_runs,
                         clamp_total=sum(r.clamp_count for r in results),
                         std_defined=std_defined)
