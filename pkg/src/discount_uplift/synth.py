"""Synthetic ground truth: a seeded demand process with a planted uplift, and
a replenishment-cycle simulator showing how miscounting discounted sales
inflates forecasts and stock.

Randomness comes from numpy's Philox counter-based bit generator (4x64),
which produces identical streams on every platform for a fixed numpy
version. Streams are derived deterministically:

* panel generation uses ``key = (seed XOR sku_id) mod 2**64``, one stream
  per SKU, with per-day quantities drawn in fixed blocks (forecast noise,
  discount-active flags, raw discount counts, regular demand, rounding
  uniforms, in that order);
* the cycle simulator uses two streams, ``key = [seed, 1]`` for regular
  demand and ``key = [seed, 2]`` for discount outcomes, so paired runs that
  differ only in the assumed regular share face identical demand.

Fractional uplift is materialised by unbiased stochastic rounding
(``floor(x)`` plus a Bernoulli on the fractional part), so expected sales
are exactly linear in the discounted-sales count and the two-step estimator
is correctly specified. Replenishment is order-up-to with a one-day delay:
the day's opening stock is the order-up-to level minus the previous day's
sales. (An instantaneous daily top-up would pin stock to a constant, which
the weekday dummies already span.)
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .domain import Observation, SkuPanel, panel_from_observations

_MASK64 = (1 << 64) - 1

GAUSSIAN = "gaussian"
POISSON = "poisson"


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class DgpConfig:
    """Parameters of the panel-generating process.

    ``weekday_effects`` is the latent regular demand (units/day) for Monday
    through Sunday; ``gamma_true`` the planted uplift per discounted sale.
    ``demand_noise`` selects the regular-demand draw: ``"gaussian"`` rounds a
    normal with ``demand_noise_sd`` (sd 0 makes demand deterministic),
    ``"poisson"`` draws a Poisson at the weekday mean.
    """

    seed: int = 0
    n_days: int = 400
    weekday_effects: tuple[float, ...] = (8.0, 8.5, 9.0, 9.5, 10.0, 12.0, 11.0)
    forecast_noise_sd: float = 0.5
    order_up_to: int = 40
    discount_probability: float = 0.25
    discount_intensity: float = 3.5
    gamma_true: float = 0.6
    demand_noise: str = GAUSSIAN
    demand_noise_sd: float = 0.5
    start_date: dt.date = dt.date(2024, 1, 1)

    def validate(self) -> None:
        if self.n_days < 0:
            raise InvalidConfig("n_days must be non-negative")
        if len(self.weekday_effects) != 7:
            raise InvalidConfig("weekday_effects needs one value per weekday")
        if any(v < 0 for v in self.weekday_effects):
            raise InvalidConfig("weekday_effects must be non-negative")
        if self.forecast_noise_sd < 0:
            raise InvalidConfig("forecast_noise_sd must be non-negative")
        if self.order_up_to < 0:
            raise InvalidConfig("order_up_to must be non-negative")
        if not 0.0 <= self.discount_probability <= 1.0:
            raise InvalidConfig("discount_probability must be in [0, 1]")
        if self.discount_intensity < 0:
            raise InvalidConfig("discount_intensity must be non-negative")
        if not math.isfinite(self.gamma_true):
            raise InvalidConfig("gamma_true must be finite")
        if self.demand_noise not in (GAUSSIAN, POISSON):
            raise InvalidConfig(f"unknown demand_noise {self.demand_noise!r}")
        if self.demand_noise_sd < 0:
            raise InvalidConfig("demand_noise_sd must be non-negative")


def _stream(key_words: Sequence[int]) -> np.random.Generator:
    words = np.array([w & _MASK64 for w in key_words], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=words))


def _stochastic_round(x: float, u: float) -> int:
    base = math.floor(x)
    return base + (1 if u < x - base else 0)


def generate_panel(config: DgpConfig, sku_id: int) -> SkuPanel:
    """Generate one SKU's panel; a pure function of (seed, config, sku_id)."""
    config.validate()
    rng = _stream([config.seed ^ (sku_id & _MASK64), 0])
    n = config.n_days
    s_level = config.order_up_to

    dates = [config.start_date + dt.timedelta(days=d) for d in range(n)]
    weekdays = np.array([date.isoweekday() for date in dates], dtype=np.int64)
    lam = np.asarray(config.weekday_effects, dtype=np.float64)[weekdays - 1]

    forecast_noise = rng.normal(0.0, config.forecast_noise_sd, size=n)
    active = rng.random(n) < config.discount_probability
    ds_raw = np.where(active, rng.poisson(config.discount_intensity, size=n), 0)
    if config.demand_noise == GAUSSIAN:
        regular = np.maximum(
            np.rint(rng.normal(lam, config.demand_noise_sd)), 0.0
        ).astype(np.int64)
    else:
        regular = rng.poisson(lam)
    round_u = rng.random(n)

    forecasts = np.maximum(lam + forecast_noise, 0.0)
    observations = []
    prev_sales = 0
    for d in range(n):
        stock = s_level if d == 0 else s_level - prev_sales
        ds = min(int(ds_raw[d]), stock)
        uplift = _stochastic_round(config.gamma_true * ds, float(round_u[d]))
        sales = min(stock, max(0, int(regular[d]) + uplift))
        observations.append(Observation(
            store_id=1, sku_id=sku_id, date=dates[d], weekday=int(weekdays[d]),
            stock=stock, forecast=float(forecasts[d]), sales=sales,
            discounted_sales=min(ds, sales)))
        prev_sales = sales
    return panel_from_observations(sku_id, observations)


def generate_study(config: DgpConfig, n_skus: int,
                   gammas: Sequence[float] | None = None,
                   first_sku: int = 1) -> tuple[SkuPanel, ...]:
    """Generate a batch of SKU panels, optionally with per-SKU uplifts.

    ``gammas`` is cycled over the SKUs; None keeps ``config.gamma_true``
    everywhere. SKU ids run from ``first_sku`` upward and fix each SKU's
    random stream together with the seed.
    """
    if n_skus < 0:
        raise InvalidConfig("n_skus must be non-negative")
    panels = []
    for i in range(n_skus):
        sku_id = first_sku + i
        cfg = config if gammas is None else replace(
            config, gamma_true=float(gammas[i % len(gammas)]))
        panels.append(generate_panel(cfg, sku_id))
    return tuple(panels)


@dataclass(frozen=True)
class CycleConfig:
    """Parameters of the forecast-discount feedback simulation.

    ``true_regular_share`` is the fraction of discounted sales that is
    regular demand in truth; ``assumed_share`` the fixed fraction the
    forecaster counts. Units spend ``shelf_life_days`` sellable days on the
    shelf, get a discount sticker on the last one, and spoil overnight if
    still unsold.
    """

    seed: int = 0
    n_days: int = 365
    true_regular_share: float = 0.3
    assumed_share: float = 1.0
    smoothing_weight: float = 0.2
    shelf_life_days: int = 3
    order_up_to_multiplier: float = 2.0
    base_demand: float = 5.0
    discount_sell_prob: float = 0.85

    def validate(self) -> None:
        if self.n_days < 0:
            raise InvalidConfig("n_days must be non-negative")
        if not 0.0 <= self.true_regular_share <= 1.0:
            raise InvalidConfig("true_regular_share must be in [0, 1]")
        if not 0.0 <= self.assumed_share <= 1.0:
            raise InvalidConfig("assumed_share must be in [0, 1]")
        if not 0.0 < self.smoothing_weight < 1.0:
            raise InvalidConfig("smoothing_weight must be in (0, 1)")
        if self.shelf_life_days < 1:
            raise InvalidConfig("shelf_life_days must be at least 1")
        if self.order_up_to_multiplier <= 0:
            raise InvalidConfig("order_up_to_multiplier must be positive")
        if self.base_demand < 0:
            raise InvalidConfig("base_demand must be non-negative")
        if not 0.0 <= self.discount_sell_prob <= 1.0:
            raise InvalidConfig("discount_sell_prob must be in [0, 1]")


@dataclass(frozen=True)
class CycleDay:
    """One day of the cycle trace. ``stock`` is the post-receipt opening
    stock; ``forecast`` the smoothed estimate after the day's update, i.e.
    the one driving that evening's order."""

    day: int
    stock: int
    forecast: float
    stickered: int
    sales: int
    discounted_sales: int
    spoilage: int
    order_placed: int


@dataclass(frozen=True)
class CycleTrace:
    config: CycleConfig
    days: tuple[CycleDay, ...]


def simulate_cycle(config: CycleConfig) -> CycleTrace:
    """Simulate the replenish-discount-forecast loop day by day.

    Each morning the pending order arrives and units on their last sellable
    day are stickered. Stickered units sell at the discount with
    ``discount_sell_prob`` each; a ``true_regular_share`` portion of those
    discounted sales is absorbed from regular demand, the rest is extra
    demand created by the discount. Remaining regular demand consumes
    unstickered stock oldest-first and spills onto leftover stickered units
    (still counted as discounted) before going unmet. The forecaster
    exponentially smooths non-discounted sales plus ``assumed_share`` times
    discounted sales and orders up to ``order_up_to_multiplier`` times the
    forecast. Ordering on an inflated forecast enlarges tomorrow's stock,
    tomorrow's stickering and hence tomorrow's discounted sales.
    """
    config.validate()
    rng_demand = _stream([config.seed, 1])
    rng_discount = _stream([config.seed, 2])

    forecast = config.base_demand
    pending = int(round(config.order_up_to_multiplier * forecast))
    batches: list[list[int]] = []  # [remaining sellable days, units], oldest first
    trace = []
    for day in range(config.n_days):
        if pending > 0:
            batches.append([config.shelf_life_days, pending])
        pending = 0
        stock = sum(units for _, units in batches)
        stickered = sum(units for life, units in batches if life == 1)

        regular = int(rng_demand.poisson(config.base_demand))
        ds = int(rng_discount.binomial(stickered, config.discount_sell_prob))
        absorbed = min(_stochastic_round(config.true_regular_share * ds,
                                         float(rng_discount.random())),
                       regular)

        fresh_demand = regular - absorbed
        fresh_sales = 0
        for batch in batches:
            if batch[0] == 1:
                continue
            take = min(fresh_demand - fresh_sales, batch[1])
            batch[1] -= take
            fresh_sales += take
            if fresh_sales == fresh_demand:
                break
        spill = min(fresh_demand - fresh_sales, stickered - ds)

        discounted = ds + spill
        sales = discounted + fresh_sales
        to_deplete = discounted
        for batch in batches:
            if batch[0] == 1:
                take = min(to_deplete, batch[1])
                batch[1] -= take
                to_deplete -= take
        spoilage = stickered - discounted  # stickered units nobody bought
        batches = [[life - 1, units] for life, units in batches
                   if life > 1 and units > 0]

        observed = fresh_sales + config.assumed_share * (sales - fresh_sales)
        forecast = ((1.0 - config.smoothing_weight) * forecast
                    + config.smoothing_weight * observed)
        position = sum(units for _, units in batches)
        order = max(0, int(round(config.order_up_to_multiplier * forecast))
                    - position)

        trace.append(CycleDay(day=day, stock=stock, forecast=forecast,
                              stickered=stickered, sales=sales,
                              discounted_sales=sales - fresh_sales,
                              spoilage=spoilage, order_placed=order))
        pending = order
    return CycleTrace(config=config, days=tuple(trace))


def cycle_summary(trace: CycleTrace) -> dict:
    """Whole-run and last-half averages of the key trace quantities."""
    days = trace.days
    half = days[len(days) // 2:]

    def averages(window: Sequence[CycleDay]) -> dict:
        n = max(len(window), 1)
        return {
            "mean_stock": sum(d.stock for d in window) / n,
            "mean_sales": sum(d.sales for d in window) / n,
            "mean_discounted_sales":
                sum(d.discounted_sales for d in window) / n,
            "mean_spoilage": sum(d.spoilage for d in window) / n,
            "mean_forecast": sum(d.forecast for d in window) / n,
        }

    return {"n_days": len(days), "overall": averages(days),
            "last_half": averages(half),
            "total_spoilage": sum(d.spoilage for d in days)}
