from __future__ import annotations

import datetime as dt
import sys
from pathlib import Path
from typing import Sequence

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from discount_uplift.domain import Observation, SkuPanel, panel_from_observations
from discount_uplift.two_step import ReportStatus, SkuUpliftReport


def build_panel(sales: Sequence[int], discounted: Sequence[int],
                forecast: Sequence[float] | None = None,
                stock: Sequence[int] | None = None,
                sku_id: int = 1,
                start: dt.date = dt.date(2024, 1, 1)) -> SkuPanel:
    """Hand-crafted panel: one observation per consecutive day.

    Bypasses ingestion validation on purpose so tests can construct
    counterfactual data (e.g. shifted sales) freely.
    """
    n = len(sales)
    assert len(discounted) == n
    if forecast is None:
        forecast = [1.0 + 0.1 * (d % 9) for d in range(n)]
    if stock is None:
        stock = [sales[d] + 3 + (d % 4) for d in range(n)]
    observations = []
    for d in range(n):
        date = start + dt.timedelta(days=d)
        observations.append(Observation(
            store_id=1, sku_id=sku_id, date=date, weekday=date.isoweekday(),
            stock=int(stock[d]), forecast=float(forecast[d]),
            sales=int(sales[d]), discounted_sales=int(discounted[d])))
    return panel_from_observations(sku_id, observations)


@pytest.fixture
def panel_builder():
    return build_panel


def make_report(sku_id, mean_residual=None, gamma10=None, significant=None,
                failed=False):
    """Synthetic per-SKU report for aggregate-level tests."""
    if failed:
        return SkuUpliftReport(sku_id=sku_id, store_id=None,
                               status=ReportStatus.ESTIMATION_FAILED,
                               n_plain=100, n_disc=50,
                               failure_reason="synthetic failure")
    return SkuUpliftReport(sku_id=sku_id, store_id=None,
                           status=ReportStatus.OK, n_plain=100, n_disc=50,
                           mean_residual=mean_residual, gamma10=gamma10,
                           gamma10_se=0.1, gamma10_t=gamma10 / 0.1,
                           gamma10_p=0.01,
                           significant_positive=bool(significant))
