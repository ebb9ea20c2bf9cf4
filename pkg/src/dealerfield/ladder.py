"""Discrete dynamic-programming value ladder and verification oracles.

Three layers live here:

  * the per-step correction factors h and the one/n-period closed-form
    value approximations built from them;
  * a brute-force argmax oracle that maximizes the exact one-period
    expected-utility expression numerically, used to verify the
    closed-form quotes;
  * an exact small-grid backward induction (policy evaluation under the
    closed-form quotes, without linearizing the arrival terms) used to
    quantify the approximation gap and check the active-beats-inactive
    ordering cell by cell.

The bracket denominator is (k + 1 - 1/N)*beta_i + gamma_i everywhere;
the variant without + gamma_i is available through ``alt_denominator``
for comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DealerSpec, MarketParams, QuotePair, quoting_times
from .orderflow import IntensityInputs, dealer_rate
from .quoting import QuoteContext, inactive_value, optimal_quotes, spread


class BracketOutOfRange(ValueError):
    """The one-period bracket left (0, 1]; the step is too large."""


class MaximumOnBoundary(RuntimeError):
    """The oracle's argmax landed on the search-window edge; widen it."""


class InventoryBoundHit(ValueError):
    """The inventory grid cannot contain every reachable state; enlarge it."""


def _ctx(d: DealerSpec, market: MarketParams, n_dealers: int, q: int, tau: float) -> QuoteContext:
    return QuoteContext(q=q, gamma=d.gamma, beta=d.beta, k=market.k,
                        n_dealers=n_dealers, sigma=market.sigma, tau=tau)


def _kappa(d: DealerSpec, market: MarketParams, n_dealers: int) -> float:
    return (market.k + 1.0 - 1.0 / n_dealers) * d.beta


def h_factor(i: int, l: int, market: MarketParams, dealers: tuple[DealerSpec, ...]) -> float:
    """Step-l correction factor for dealer i.

    h = 1 - A*gamma_i*dt / (kappa_i + gamma_i)
          * [2 - kappa_i * S_i(tau_l) - k * sum_{j != i} beta_j * S_j(tau_l)]

    where S_j is dealer j's (inventory-independent) spread at time
    remaining tau_l.  Equals 1 when there is no order flow.
    """
    n = len(dealers)
    d = dealers[i]
    tau = market.horizon - l * market.dt
    kap = _kappa(d, market, n)
    term = 2.0 - kap * spread(_ctx(d, market, n, 0, tau))
    for j, other in enumerate(dealers):
        if j != i:
            term -= market.k * other.beta * spread(_ctx(other, market, n, 0, tau))
    return 1.0 - (market.a_rate * d.gamma * market.dt) / (kap + d.gamma) * term


@dataclass(frozen=True)
class PeriodLadder:
    """Precomputed h factors for every dealer at every quoting step."""

    market: MarketParams
    dealers: tuple[DealerSpec, ...]
    step_times: tuple[float, ...]
    h_factors: tuple[tuple[float, ...], ...]  # [dealer][step]

    @property
    def n_steps(self) -> int:
        return len(self.step_times)


def build_ladder(market: MarketParams, dealers: tuple[DealerSpec, ...]) -> PeriodLadder:
    times = tuple(quoting_times(market))
    h = tuple(tuple(h_factor(i, l, market, dealers) for l in range(len(times)))
              for i in range(len(dealers)))
    return PeriodLadder(market=market, dealers=dealers, step_times=times, h_factors=h)


def _rates_from_quotes(i: int, quotes: list[QuotePair] | tuple[QuotePair, ...],
                       market: MarketParams,
                       dealers: tuple[DealerSpec, ...]) -> tuple[float, float]:
    betas = tuple(d.beta for d in dealers)
    ask = IntensityInputs(deltas=tuple(qp.delta_a for qp in quotes), betas=betas,
                          a_rate=market.a_rate, k=market.k)
    bid = IntensityInputs(deltas=tuple(qp.delta_b for qp in quotes), betas=betas,
                          a_rate=market.a_rate, k=market.k)
    return dealer_rate(i, ask), dealer_rate(i, bid)


def _bracket(i: int, lam_sum: float, dt: float, market: MarketParams,
             dealers: tuple[DealerSpec, ...], alt_denominator: bool) -> float:
    d = dealers[i]
    denom = _kappa(d, market, len(dealers))
    if not alt_denominator:
        denom += d.gamma
    b = 1.0 - d.gamma * dt * lam_sum / denom
    if b <= 0.0:
        raise BracketOutOfRange(
            f"one-period bracket {b:.6g} <= 0: step dt={dt} too large for the linearization")
    return b


def one_period_value(i: int, x: float, q: int, s: float,
                     quotes: list[QuotePair] | tuple[QuotePair, ...], t: float,
                     market: MarketParams, dealers: tuple[DealerSpec, ...],
                     alt_denominator: bool = False) -> float:
    """Dealer i's expected utility when only the step starting at t trades.

    Equals the frozen-inventory value times the one-period bracket; with
    zero flow or a zero-length step it reduces to the frozen value.
    """
    tau = market.horizon - t
    lam_a, lam_b = _rates_from_quotes(i, quotes, market, dealers)
    b = _bracket(i, lam_a + lam_b, market.dt, market, dealers, alt_denominator)
    return inactive_value(x, s, _ctx(dealers[i], market, len(dealers), q, tau)) * b


def n_period_value(i: int, x: float, q: int, s: float, l: int, ladder: PeriodLadder,
                   other_q: tuple[int, ...] | None = None,
                   alt_denominator: bool = False) -> float:
    """Dealer i's multi-period value approximation at quoting step l.

    One-period bracket at step l, times the product of the downstream h
    factors, times the frozen-inventory kernel at (q, tau_l).  Competitor
    quotes are taken at their initial inventories unless other_q is given.
    """
    market, dealers = ladder.market, ladder.dealers
    n = len(dealers)
    tau = market.horizon - ladder.step_times[l]
    qs = list(other_q) if other_q is not None else [d.q0 for d in dealers]
    qs[i] = q
    quotes = [optimal_quotes(_ctx(d, market, n, qs[j], tau)) for j, d in enumerate(dealers)]
    lam_a, lam_b = _rates_from_quotes(i, quotes, market, dealers)
    b = _bracket(i, lam_a + lam_b, market.dt, market, dealers, alt_denominator)
    tail = math.prod(ladder.h_factors[i][l + 1:], start=1.0)
    return inactive_value(x, s, _ctx(dealers[i], market, n, q, tau)) * b * tail


# ---------------------------------------------------------------------------
# Brute-force one-period argmax oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    delta_b: float
    delta_a: float
    degenerate: bool = False


def _refine_min(f, xs: np.ndarray, ys: np.ndarray, tol: float) -> float:
    """Iteratively shrink a grid minimum down to resolution tol."""
    j = int(np.argmin(ys))
    best = float(xs[j])
    step = float(xs[1] - xs[0])
    while step > tol:
        step /= 10.0
        local = best + step * np.arange(-10, 11, dtype=float)
        vals = f(local)
        best = float(local[int(np.argmin(vals))])
    return best


def oracle_one_period_argmax(i: int, q: int, t: float, market: MarketParams,
                             dealers: tuple[DealerSpec, ...],
                             quotes: list[QuotePair] | tuple[QuotePair, ...],
                             window: tuple[float, float] = (-10.0, 10.0),
                             coarse_step: float = 0.01,
                             tol: float = 1e-6,
                             dt: float | None = None) -> OracleResult:
    """Numerically maximize the exact one-period expected utility.

    The objective is the three-outcome expectation over (ask fill, bid
    fill, no fill) of the frozen-inventory continuation; competitors'
    quotes are held fixed (their contribution scales the objective
    without moving its argmax).  The two offsets enter additively
    separable terms, so each side is a one-dimensional search: a coarse
    grid over ``window`` followed by tenfold refinement to ``tol``.

    Raises MaximumOnBoundary when the coarse argmin touches the window
    edge.  With no order flow the objective is flat and the result is
    flagged degenerate instead.
    """
    n = len(dealers)
    d = dealers[i]
    g = d.gamma
    tau = market.horizon - t
    dt = market.dt if dt is None else dt
    kap = _kappa(d, market, n)
    others_a = sum(dealers[j].beta * quotes[j].delta_a for j in range(n) if j != i)
    others_b = sum(dealers[j].beta * quotes[j].delta_b for j in range(n) if j != i)
    c_a = market.a_rate * math.exp(-market.k * others_a)
    c_b = market.a_rate * math.exp(-market.k * others_b)

    if c_a * dt == 0.0 and c_b * dt == 0.0:
        return OracleResult(delta_b=math.nan, delta_a=math.nan, degenerate=True)

    e_down = math.exp(0.5 * (g * market.sigma) ** 2 * (q - 1) ** 2 * tau)
    e_same = math.exp(0.5 * (g * market.sigma) ** 2 * q ** 2 * tau)
    e_up = math.exp(0.5 * (g * market.sigma) ** 2 * (q + 1) ** 2 * tau)

    def side_objective(c: float, e_next: float):
        # contribution of one side to the (negated) utility; minimized
        def f(delta):
            lam = c * np.exp(-kap * np.asarray(delta, dtype=float))
            return lam * dt * (np.exp(-g * np.asarray(delta, dtype=float)) * e_next - e_same)
        return f

    lo, hi = window
    xs = np.arange(lo, hi + 0.5 * coarse_step, coarse_step)
    out = []
    for c, e_next in ((c_a, e_down), (c_b, e_up)):
        f = side_objective(c, e_next)
        ys = f(xs)
        j = int(np.argmin(ys))
        if j == 0 or j == len(xs) - 1:
            raise MaximumOnBoundary(
                f"argmax at window edge {xs[j]:.3g}; widen the search window {window}")
        out.append(_refine_min(f, xs, ys, tol))
    return OracleResult(delta_a=out[0], delta_b=out[1])


# ---------------------------------------------------------------------------
# Exact small-grid backward induction (policy evaluation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DpTable:
    """Exact policy value V(x, s, q, t_l) = -exp(-gamma (x + q s)) * G(q, t_l).

    The kernel G is stored in log space so deep inventories at large
    risk aversion do not overflow.  Index l runs over the quoting steps
    plus the terminal time.
    """

    dealer: int
    market: MarketParams
    dealers: tuple[DealerSpec, ...]
    q_values: tuple[int, ...]
    step_times: tuple[float, ...]
    log_kernel: np.ndarray  # shape (len(q_values), len(step_times))
    saturated_cells: int    # cells where p_a + p_b had to be renormalized

    def _qi(self, q: int) -> int:
        if q not in self.q_values:
            raise KeyError(f"inventory {q} outside table window {self.q_values[0]}..{self.q_values[-1]}")
        return q - self.q_values[0]

    def log_kernel_at(self, q: int, l: int) -> float:
        v = float(self.log_kernel[self._qi(q), l])
        if math.isnan(v):
            raise KeyError(f"cell (q={q}, l={l}) not exactly computable on this grid")
        return v

    def value(self, x: float, s: float, q: int, l: int) -> float:
        g = self.dealers[self.dealer].gamma
        return -math.exp(-g * (x + q * s) + self.log_kernel_at(q, l))

    def log_inactive_kernel(self, q: int, l: int) -> float:
        d = self.dealers[self.dealer]
        tau = self.market.horizon - self.step_times[l]
        return 0.5 * (d.gamma * q * self.market.sigma) ** 2 * tau

    def beats_inactive(self, q: int, l: int) -> bool:
        return self.log_kernel_at(q, l) < self.log_inactive_kernel(q, l)

    def relative_gap_vs_approx(self, ladder: PeriodLadder, q: int, l: int) -> float:
        """(V_exact - V_approx) / |V_exact| for cell (q, t_l), signed."""
        v_exact = self.value(0.0, 0.0, q, l)
        v_approx = n_period_value(self.dealer, 0.0, q, 0.0, l, ladder)
        return (v_exact - v_approx) / abs(v_exact)


def exact_small_dp(i: int, market: MarketParams, dealers: tuple[DealerSpec, ...],
                   q_window: int = 5, q_max: int = 10,
                   other_q: tuple[int, ...] | None = None) -> DpTable:
    """Backward induction with exact (non-linearized) arrival terms.

    Policy evaluation: every dealer quotes the closed form; competitor
    inventories are held at their initial values so their quote schedule
    is deterministic and the state is dealer i's own inventory alone.
    The three step outcomes (ask fill, bid fill, none) are mutually
    exclusive; when lambda*dt sums past one the two fill probabilities
    are renormalized and the cell counted as saturated.

    Cells reported for |q| <= q_window are exact: each backward step can
    move inventory by one, so the grid is padded by the number of
    quoting steps.  Raises InventoryBoundHit when q_window plus the
    padding would exceed q_max.
    """
    n = len(dealers)
    d = dealers[i]
    g = d.gamma
    times = quoting_times(market)
    n_steps = len(times)
    pad = n_steps if market.a_rate * market.dt > 0 else 0
    if q_window + pad > q_max:
        raise InventoryBoundHit(
            f"grid needs |q| <= {q_window + pad} to keep every reported cell exact; "
            f"enlarge q_max (got {q_max})")

    half = q_window + pad
    qs = np.arange(-half, half + 1)
    n_cells = len(qs)
    dt = market.dt
    var_step = 0.5 * (g * market.sigma) ** 2 * dt  # per-step diffusion exponent scale

    comp_q = list(other_q) if other_q is not None else [dd.q0 for dd in dealers]

    log_g = np.full((n_cells, n_steps + 1), np.nan)
    t_n = times[-1] + dt if times else 0.0
    log_g[:, n_steps] = 0.5 * (g * qs * market.sigma) ** 2 * (market.horizon - t_n)

    saturated = 0
    valid_half = half  # shrinks by one per backward step while fills can occur
    shrink = 1 if pad else 0
    for l in range(n_steps - 1, -1, -1):
        tau = market.horizon - times[l]
        # competitor offsets are fixed within the step
        others_a = sum(dealers[j].beta *
                       optimal_quotes(_ctx(dealers[j], market, n, comp_q[j], tau)).delta_a
                       for j in range(n) if j != i)
        others_b = sum(dealers[j].beta *
                       optimal_quotes(_ctx(dealers[j], market, n, comp_q[j], tau)).delta_b
                       for j in range(n) if j != i)
        valid_half -= shrink
        for q in range(-valid_half, valid_half + 1):
            qi = q + half
            own = optimal_quotes(_ctx(d, market, n, q, tau))
            lam_a = market.a_rate * math.exp(min(
                -market.k * (d.beta * own.delta_a + others_a)
                - (1.0 - 1.0 / n) * d.beta * own.delta_a, 700.0))
            lam_b = market.a_rate * math.exp(min(
                -market.k * (d.beta * own.delta_b + others_b)
                - (1.0 - 1.0 / n) * d.beta * own.delta_b, 700.0))
            p_a = min(lam_a * dt, 1.0)
            p_b = min(lam_b * dt, 1.0)
            if p_a + p_b > 1.0:
                scale = 1.0 / (p_a + p_b)
                p_a *= scale
                p_b *= scale
                saturated += 1
            terms = []
            if p_a > 0.0:
                terms.append(math.log(p_a) - g * own.delta_a
                             + var_step * (q - 1) ** 2 + log_g[qi - 1, l + 1])
            if p_b > 0.0:
                terms.append(math.log(p_b) - g * own.delta_b
                             + var_step * (q + 1) ** 2 + log_g[qi + 1, l + 1])
            p_none = 1.0 - p_a - p_b
            if p_none > 0.0:
                terms.append(math.log(p_none) + var_step * q * q + log_g[qi, l + 1])
            log_g[qi, l] = float(np.logaddexp.reduce(terms))

    keep = np.abs(qs) <= q_window
    return DpTable(dealer=i, market=market, dealers=dealers,
                   q_values=tuple(int(v) for v in qs[keep]),
                   step_times=tuple(times) + (t_n,),
                   log_kernel=log_g[keep, :], saturated_cells=saturated)
