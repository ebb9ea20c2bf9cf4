"""Competitive multi-dealer market-making: closed-form quotes, order-flow
intensities, a seeded Monte Carlo engine and the verification ladder."""

from .engine import (RunResult, StepTrace, replication_seed, simulate_ensemble,
                     simulate_run, step)
from .ladder import (BracketOutOfRange, DpTable, InventoryBoundHit,
                     MaximumOnBoundary, OracleResult, PeriodLadder, build_ladder,
                     exact_small_dp, h_factor, n_period_value,
                     one_period_value, oracle_one_period_argmax)
from .metrics import (EmptyEnsemble, EnsembleStats, analytic_average_spread,
                      ensemble_stats, grid_average_spread, profit)
from .model import (ConfigError, DealerSpec, DealerState, MarketParams,
                    QuotePair, SimConfig, Violation, ViolationCode, quoting_times,
                    time_grid, validate)
from .orderflow import (ClampCounter, IntensityInputs, aggregate_rate,
                        dealer_rate, fill_probability, flow_share_rate)
from .presets import PRESET_NAMES, UnknownPreset, build_preset
from .quoting import (QuoteContext, base_offset, inactive_value, optimal_quotes,
                      price_adjustment, reservation_prices, spread)

__version__ = "0.1.0"
