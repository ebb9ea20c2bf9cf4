"""Named experiment presets matching the reference result tables.

All presets share the baseline market: s0 = 100, sigma = 2, T = 1,
dt = 0.005, A = 140, k = 1.5.  They differ only in dealer count, risk
aversion and initial inventory.
"""

from __future__ import annotations

from .model import DealerSpec, MarketParams, SimConfig, validate

BASE_MARKET = MarketParams(s0=100.0, sigma=2.0, horizon=1.0, dt=0.005,
                           a_rate=140.0, k=1.5)

DEFAULT_RUNS = 1000
DEFAULT_SEED = 42

# (gamma, q0) per dealer; betas are the symmetric 1/N default.
_PRESET_DEALERS: dict[str, tuple[tuple[float, int], ...]] = {
    "table1": ((0.1, 0),),
    "table2": ((0.1, 0), (0.1, 0)),
    "table3": ((0.1, 0), (0.1, 0), (0.1, 0)),
    "table4": tuple((0.1, 0) for _ in range(7)),
    "table5": ((0.01, 0), (1.0, 0)),
    "table6": ((0.01, 0), (0.1, 0), (1.0, 0)),
    "table7": ((0.1, 10), (0.1, 1)),
    "table8": ((0.1, 50), (0.1, 0)),
    "table9": ((0.01, 50), (0.01, 0)),
}

PRESET_NAMES = tuple(_PRESET_DEALERS)


class UnknownPreset(KeyError):
    pass


def build_preset(name: str, runs: int = DEFAULT_RUNS, seed: int = DEFAULT_SEED,
                 trace: bool = False) -> SimConfig:
    """Resolve a preset name to a validated configuration."""
    try:
        spec = _PRESET_DEALERS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    n = len(spec)
    dealers = tuple(DealerSpec(gamma=g, beta=1.0 / n, q0=q0) for g, q0 in spec)
    return validate(SimConfig(market=BASE_MARKET, dealers=dealers,
                              runs=runs, seed=seed, trace=trace))
