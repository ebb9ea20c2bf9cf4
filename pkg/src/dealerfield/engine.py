"""Seeded Monte Carlo simulation of N dealers quoting against shared flow.

Each step: every dealer's quotes are computed from their current
inventory, both sides' aggregate arrival rates follow from all quotes,
each dealer draws an independent Bernoulli fill per side at their
flow-share rate, and the mid-price takes a +/- sigma*sqrt(dt) step.

The per-dealer fill rate is beta_i times the aggregate rate (the
dealer's proportional share of market-order flow).  The power-law form
with the extra own-offset exponent over-counts executions several-fold
once N > 1 and cannot reproduce the reference profit tables; it remains
available in the orderflow module for the pricing machinery, which is
where its derivative matters.

Replication r of an ensemble uses seed master ^ splitmix64(r), so runs
are reproducible individually and independent of execution order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import DealerState, MarketParams, DealerSpec, QuotePair, SimConfig, validate, quoting_times
from .orderflow import ClampCounter, IntensityInputs, aggregate_rate, fill_probability
from .quoting import QuoteContext, optimal_quotes

_MASK64 = (1 << 64) - 1


def splitmix64(z: int) -> int:
    """One step of the splitmix64 mixing function (public-domain constants)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def replication_seed(master: int, r: int) -> int:
    """Seed for replication r: master xor splitmix64(r)."""
    return (master ^ splitmix64(r)) & _MASK64


@dataclass(frozen=True)
class StepTrace:
    """One step's snapshot: quotes set at t, fills drawn, end-of-step state."""

    t: float
    s: float  # mid-price the quotes were set against
    quotes: tuple[QuotePair, ...]
    q: tuple[int, ...]
    x: tuple[float, ...]
    fill_a: tuple[bool, ...]
    fill_b: tuple[bool, ...]


@dataclass(frozen=True)
class DealerRunStats:
    q0: int
    x0: float
    q_t: int
    x_t: float
    fills_ask: int
    fills_bid: int
    avg_spread: float  # equal-weight mean of quoted spread over quoting times


@dataclass(frozen=True)
class RunResult:
    seed: int
    clamp_count: int
    s_first: float
    s_last: float
    s_min: float
    s_max: float
    dealers: tuple[DealerRunStats, ...]
    trace: tuple[StepTrace, ...] | None = None


def step(states: list[DealerState], s: float, t: float, market: MarketParams,
         dealers: tuple[DealerSpec, ...], rng: np.random.Generator,
         clamp: ClampCounter | None = None,
         ) -> tuple[float, tuple[QuotePair, ...], list[bool], list[bool]]:
    """Advance one quoting step, mutating the dealer states.

    Draw order is fixed: per dealer (index order) one uniform for the
    ask side then one for the bid side, then one uniform for the
    mid-price direction.  Fill cash uses the quotes set at the step
    start; an ask fill pays the dealer s + delta_a, a bid fill costs
    s - delta_b.  Returns the next mid-price plus the step's quotes and
    fill flags.
    """
    n = len(dealers)
    tau = market.horizon - t
    quotes = tuple(
        optimal_quotes(QuoteContext(q=st.q, gamma=d.gamma, beta=d.beta, k=market.k,
                                    n_dealers=n, sigma=market.sigma, tau=tau))
        for st, d in zip(states, dealers))
    betas = tuple(d.beta for d in dealers)
    agg_a = aggregate_rate(IntensityInputs(
        deltas=tuple(qp.delta_a for qp in quotes), betas=betas,
        a_rate=market.a_rate, k=market.k))
    agg_b = aggregate_rate(IntensityInputs(
        deltas=tuple(qp.delta_b for qp in quotes), betas=betas,
        a_rate=market.a_rate, k=market.k))

    fill_a: list[bool] = []
    fill_b: list[bool] = []
    for i, (st, d) in enumerate(zip(states, dealers)):
        p_a = fill_probability(d.beta * agg_a, market.dt, clamp)
        p_b = fill_probability(d.beta * agg_b, market.dt, clamp)
        hit_a = rng.random() < p_a
        hit_b = rng.random() < p_b
        if hit_a:
            st.x += s + quotes[i].delta_a
            st.q -= 1
            st.fills_ask += 1
        if hit_b:
            st.x -= s - quotes[i].delta_b
            st.q += 1
            st.fills_bid += 1
        fill_a.append(hit_a)
        fill_b.append(hit_b)

    move = market.sigma * math.sqrt(market.dt)
    s_next = s + move if rng.random() < 0.5 else s - move
    return s_next, quotes, fill_a, fill_b


def simulate_run(config: SimConfig, seed: int) -> RunResult:
    """One full run over the time grid; deterministic in (config, seed)."""
    config = validate(config)
    market, dealers = config.market, config.dealers
    rng = np.random.Generator(np.random.PCG64(seed))
    states = [DealerState(q=d.q0, x=d.x0) for d in dealers]
    clamp = ClampCounter()

    s = market.s0
    s_min = s_max = s
    spread_sums = [0.0] * len(dealers)
    trace: list[StepTrace] | None = [] if config.trace else None

    times = quoting_times(market)
    for t in times:
        s_next, quotes, fa, fb = step(states, s, t, market, dealers, rng, clamp)
        for i, qp in enumerate(quotes):
            spread_sums[i] += qp.delta_b + qp.delta_a
        if trace is not None:
            trace.append(StepTrace(t=t, s=s, quotes=quotes,
                                   q=tuple(st.q for st in states),
                                   x=tuple(st.x for st in states),
                                   fill_a=tuple(fa), fill_b=tuple(fb)))
        s = s_next
        s_min = min(s_min, s)
        s_max = max(s_max, s)

    n = len(times)
    per_dealer = tuple(
        DealerRunStats(q0=d.q0, x0=d.x0, q_t=st.q, x_t=st.x,
                       fills_ask=st.fills_ask, fills_bid=st.fills_bid,
                       avg_spread=spread_sums[i] / n if n else 0.0)
        for i, (st, d) in enumerate(zip(states, dealers)))
    return RunResult(seed=seed, clamp_count=clamp.count,
                     s_first=market.s0, s_last=s, s_min=s_min, s_max=s_max,
                     dealers=per_dealer,
                     trace=tuple(trace) if trace is not None else None)


def _thread_budget(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("DEALERFIELD_THREADS", "0") or 0)
    if threads <= 0:
        return min(32, os.cpu_count() or 1)
    return threads


def simulate_ensemble(config: SimConfig, threads: int | None = None) -> list[RunResult]:
    """Run the configured number of independent replications.

    Per-replication seeds are derived from the master seed, so results
    are bit-identical however the replications are scheduled.  Thread
    budget: explicit argument, else DEALERFIELD_THREADS, else auto.
    """
    config = validate(config)
    seeds = [replication_seed(config.seed, r) for r in range(config.runs)]
    workers = _thread_budget(threads)
    if workers == 1 or config.runs == 1:
        return [simulate_run(config, sd) for sd in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sd: simulate_run(config, sd), seeds))
