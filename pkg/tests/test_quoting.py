import math

import pytest

from dealerfield.quoting import (QuoteContext, base_offset, inactive_value,
                                 optimal_quotes, price_adjustment,
                                 reservation_prices, spread)


def ctx(q=0, gamma=0.1, beta=1.0, k=1.5, n=1, sigma=2.0, tau=1.0):
    return QuoteContext(q=q, gamma=gamma, beta=beta, k=k, n_dealers=n,
                        sigma=sigma, tau=tau)


# --- inactive (frozen inventory) value -------------------------------------

def test_inactive_value_at_origin():
    assert inactive_value(0.0, 100.0, ctx(q=0)) == -1.0


def test_inactive_value_one_share():
    # -exp(-gamma*q*s) * exp(gamma^2 q^2 sigma^2 tau / 2) at x=0
    want = -math.exp(-0.1 * 100.0) * math.exp(0.5 * (0.1 * 2.0) ** 2)
    got = inactive_value(0.0, 100.0, ctx(q=1))
    assert got == pytest.approx(want, rel=1e-12)
    assert got == pytest.approx(-4.6317e-5, rel=1e-4)


@pytest.mark.parametrize("q", [-3, 0, 2, 7])
def test_inactive_terminal_condition(q):
    got = inactive_value(5.0, 100.0, ctx(q=q, tau=0.0))
    assert got == pytest.approx(-math.exp(-0.1 * (5.0 + q * 100.0)), rel=1e-12)


def test_inactive_always_negative():
    for q in range(-10, 11):
        assert inactive_value(3.0, 50.0, ctx(q=q, gamma=0.3, tau=0.4)) < 0.0


# --- reservation prices ------------------------------------------------------

def test_reservation_symmetric_at_zero_inventory():
    r_b, r_a, r_mid = reservation_prices(100.0, ctx(q=0))
    assert r_mid == 100.0
    assert r_a - r_b == pytest.approx(0.1 * 4.0, rel=1e-12)  # gamma sigma^2 tau


def test_reservation_worked_example():
    r_b, r_a, r_mid = reservation_prices(100.0, ctx(q=1))
    assert (r_b, r_a, r_mid) == (pytest.approx(99.4), pytest.approx(99.8),
                                 pytest.approx(99.6))


def test_reservation_chaining_is_bitwise():
    for q in range(-50, 51):
        r_b, _, _ = reservation_prices(100.0, ctx(q=q, gamma=0.7, tau=0.31))
        _, r_a_next, _ = reservation_prices(100.0, ctx(q=q + 1, gamma=0.7, tau=0.31))
        assert r_b == r_a_next


# --- optimal quotes ----------------------------------------------------------

def closed_form_offsets(c: QuoteContext):
    # independent spelling of the closed form, term by term
    kappa = (c.k + 1.0 - 1.0 / c.n_dealers) * c.beta
    base = math.log(1.0 + c.gamma / kappa) / c.gamma
    skew = 0.5 * c.gamma * c.sigma ** 2 * c.tau
    return base + skew * (2 * c.q + 1), base + skew * (-2 * c.q + 1)


def test_monopolist_zero_inventory_quote():
    qp = optimal_quotes(ctx())
    assert qp.delta_b == pytest.approx(0.8453852113757117, rel=1e-12)
    assert qp.delta_a == qp.delta_b


def test_two_dealer_skewed_quote():
    qp = optimal_quotes(ctx(q=3, beta=0.5, n=2))
    want_b, want_a = closed_form_offsets(ctx(q=3, beta=0.5, n=2))
    assert qp.delta_b == pytest.approx(want_b, rel=1e-12)
    assert qp.delta_a == pytest.approx(want_a, rel=1e-12)
    assert qp.delta_b == pytest.approx(2.35310, abs=1e-5)
    assert qp.delta_a == pytest.approx(-0.04690, abs=1e-5)  # undercuts the mid


@pytest.mark.parametrize("q", [-6, -1, 0, 4, 9])
def test_terminal_quotes_lose_inventory_term(q):
    qp = optimal_quotes(ctx(q=q, tau=0.0))
    assert qp.delta_b == qp.delta_a == pytest.approx(base_offset(ctx(q=q, tau=0.0)),
                                                     rel=1e-12)


@pytest.mark.parametrize("n,beta,gamma,tau", [(1, 1.0, 0.1, 1.0), (2, 0.5, 1.0, 0.42),
                                              (7, 1.0 / 7, 0.01, 0.8)])
def test_quotes_match_closed_form(n, beta, gamma, tau):
    for q in range(-8, 9):
        c = ctx(q=q, gamma=gamma, beta=beta, n=n, tau=tau)
        qp = optimal_quotes(c)
        want_b, want_a = closed_form_offsets(c)
        assert qp.delta_b == pytest.approx(want_b, rel=1e-12, abs=1e-12)
        assert qp.delta_a == pytest.approx(want_a, rel=1e-12, abs=1e-12)


# --- spread and price adjustment ---------------------------------------------

def test_monopolist_spread_value():
    assert spread(ctx()) == pytest.approx(1.69077, abs=1e-5)


def test_two_dealer_terminal_spread():
    got = spread(ctx(beta=0.5, n=2, tau=0.0))
    assert got == pytest.approx(20.0 * math.log(1.1), rel=1e-12)
    assert got == pytest.approx(1.90620, abs=1e-5)


@pytest.mark.parametrize("tau", [0.0, 0.25, 1.0])
def test_zero_volatility_spread_is_pure_markup(tau):
    c = ctx(sigma=0.0, tau=tau, beta=0.5, n=2)
    assert spread(c) == pytest.approx(2.0 * base_offset(c), rel=1e-15)


def test_price_adjustment_values():
    assert price_adjustment(ctx(q=0)) == 0.0
    assert price_adjustment(ctx(q=5)) == pytest.approx(-4.0, rel=1e-12)
    assert price_adjustment(ctx(q=-5)) == pytest.approx(4.0, rel=1e-12)


def test_price_adjustment_equals_quote_asymmetry():
    for q in (-7, -1, 0, 2, 11):
        c = ctx(q=q, beta=0.5, n=2, tau=0.6)
        qp = optimal_quotes(c)
        assert qp.delta_a - qp.delta_b == pytest.approx(price_adjustment(c),
                                                        rel=1e-12, abs=1e-12)


# --- structural invariants ----------------------------------------------------

def test_spread_independent_of_inventory():
    # machine-precision identity: the only q-dependence left is the
    # rounding of the two halves
    for q in range(-50, 51):
        c = ctx(q=q, beta=0.5, n=2, tau=0.73)
        qp = optimal_quotes(c)
        s = spread(c)
        assert abs(qp.delta_b + qp.delta_a - s) <= 4 * math.ulp(max(abs(qp.delta_b),
                                                                    abs(qp.delta_a), s))


def test_mirror_symmetry_is_bitwise():
    for q in range(-50, 51):
        assert (optimal_quotes(ctx(q=q, tau=0.37)).delta_a
                == optimal_quotes(ctx(q=-q, tau=0.37)).delta_b)


def test_quote_slopes_in_inventory():
    c0 = ctx(q=0, tau=0.5)
    slope = c0.gamma * c0.sigma ** 2 * c0.tau
    prev = optimal_quotes(ctx(q=-10, tau=0.5))
    for q in range(-9, 11):
        cur = optimal_quotes(ctx(q=q, tau=0.5))
        assert cur.delta_b - prev.delta_b == pytest.approx(slope, rel=1e-9)
        assert cur.delta_a - prev.delta_a == pytest.approx(-slope, rel=1e-9)
        prev = cur


def test_quote_reservation_consistency():
    # delta_b - (s - r_b) == delta_a - (r_a - s) == base_offset
    s = 100.0
    for q in (-4, 0, 3):
        c = ctx(q=q, beta=0.5, n=2, tau=0.8)
        qp = optimal_quotes(c)
        r_b, r_a, _ = reservation_prices(s, c)
        assert qp.delta_b - (s - r_b) == pytest.approx(base_offset(c), rel=1e-12)
        assert qp.delta_a - (r_a - s) == pytest.approx(base_offset(c), rel=1e-12)


def test_competition_widens_the_markup():
    # with beta = 1/N the log term increases strictly in N
    def log_term(n):
        return 2.0 * base_offset(ctx(beta=1.0 / n, n=n))
    values = [log_term(n) for n in range(1, 11)]
    assert all(b > a for a, b in zip(values, values[1:]))
    # reference points from the table family
    assert log_term(1) + 0.2 == pytest.approx(1.4908, abs=1e-4)
    assert log_term(2) + 0.2 == pytest.approx(2.1062, abs=1e-4)
    assert log_term(7) + 0.2 == pytest.approx(5.4006, abs=1e-4)
