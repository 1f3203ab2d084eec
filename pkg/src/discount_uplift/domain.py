"""Core data types, CSV ingestion and SKU-panel construction.

A dataset is a flat collection of store/SKU/day records. Panels group the
records of one SKU (optionally one store-SKU pair), split the days into
discount-free days and days with at least one discounted sale, and are the
unit of work for the two-step estimation.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

WEEKDAY_NAMES = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday",
                 "Saturday", "Sunday")
_WEEKDAY_BY_NAME = {name.lower(): i + 1 for i, name in enumerate(WEEKDAY_NAMES)}

CSV_COLUMNS = ("store", "sku", "date", "weekday", "stock", "forecast",
               "sales", "discounted_sales")


class DomainError(ValueError):
    """Invalid input to a domain operation."""


@dataclass(frozen=True, slots=True)
class Observation:
    """One store-SKU-day record.

    ``stock`` is the number of units available at the start of the day,
    ``forecast`` the externally supplied demand forecast for the day,
    ``sales`` the units sold and ``discounted_sales`` the subset of sales
    made at a reduced price. ``weekday`` is 1 (Monday) .. 7 (Sunday) and is
    the model's source of truth, not the calendar date.
    """

    store_id: int
    sku_id: int
    date: dt.date
    weekday: int
    stock: int
    forecast: float
    sales: int
    discounted_sales: int


def observation_violations(obs: Observation) -> list[tuple[str, str]]:
    """Return (field, message) pairs for every violated record invariant."""
    problems: list[tuple[str, str]] = []
    if not 1 <= obs.weekday <= 7:
        problems.append(("weekday", f"weekday {obs.weekday} outside 1..7"))
    if obs.stock < 0:
        problems.append(("stock", "stock must be non-negative"))
    if not math.isfinite(obs.forecast):
        problems.append(("forecast", "forecast must be finite"))
    elif obs.forecast < 0:
        problems.append(("forecast", "forecast must be non-negative"))
    if obs.sales < 0:
        problems.append(("sales", "sales must be non-negative"))
    if obs.discounted_sales < 0:
        problems.append(("discounted_sales",
                         "discounted sales must be non-negative"))
    if obs.discounted_sales > obs.sales:
        problems.append(("discounted_sales",
                         f"discounted sales {obs.discounted_sales} exceed "
                         f"sales {obs.sales}"))
    if obs.sales > obs.stock:
        problems.append(("sales",
                         f"sales {obs.sales} exceed opening stock {obs.stock}"))
    return problems


@dataclass(frozen=True, slots=True)
class RowIssue:
    """A line-numbered problem found during ingestion."""

    line: int
    field: str
    message: str

    def __str__(self) -> str:
        return f"line:{self.line} field:{self.field} {self.message}"


@dataclass(frozen=True, slots=True)
class ParseResult:
    observations: tuple[Observation, ...]
    errors: tuple[RowIssue, ...]
    warnings: tuple[RowIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def _parse_weekday(raw: str) -> int:
    text = raw.strip()
    if text.lower() in _WEEKDAY_BY_NAME:
        return _WEEKDAY_BY_NAME[text.lower()]
    value = int(text)
    if not 1 <= value <= 7:
        raise ValueError(f"weekday {value} outside 1..7")
    return value


def parse_csv(source: str | bytes | io.TextIOBase,
              schema: Mapping[str, str] | None = None) -> ParseResult:
    """Parse a CSV of observations, collecting errors instead of failing fast.

    ``schema`` maps the canonical column names (:data:`CSV_COLUMNS`) to the
    actual header names; omitted entries default to the canonical name.
    Header matching is case-insensitive. Every row independently yields an
    :class:`Observation` or a line-numbered :class:`RowIssue`; a weekday
    column that disagrees with the calendar date is reported as a warning
    only, because the weekday column is authoritative.
    """
    if isinstance(source, bytes):
        text: io.TextIOBase = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        text = io.StringIO(source)
    else:
        text = source

    colmap = {name: name for name in CSV_COLUMNS}
    if schema:
        unknown = set(schema) - set(CSV_COLUMNS)
        if unknown:
            raise DomainError(f"unknown schema keys: {sorted(unknown)}")
        colmap.update(schema)

    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        return ParseResult((), (RowIssue(1, "header", "empty file"),), ())

    position: dict[str, int] = {}
    lowered = [h.strip().lower() for h in header]
    errors: list[RowIssue] = []
    for field, column in colmap.items():
        try:
            position[field] = lowered.index(column.lower())
        except ValueError:
            errors.append(RowIssue(1, column, "missing column"))
    if errors:
        return ParseResult((), tuple(errors), ())

    observations: list[Observation] = []
    warnings: list[RowIssue] = []
    seen: set[tuple[int, int, dt.date]] = set()
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(position.values()):
            errors.append(RowIssue(line, "row",
                                   f"expected {len(header)} fields, got {len(row)}"))
            continue

        def cell(field: str) -> str:
            return row[position[field]].strip()

        try:
            store_id = int(cell("store"))
            sku_id = int(cell("sku"))
        except ValueError as exc:
            errors.append(RowIssue(line, "store/sku", f"malformed id: {exc}"))
            continue
        try:
            date = dt.date.fromisoformat(cell("date"))
        except ValueError as exc:
            errors.append(RowIssue(line, "date", f"malformed date: {exc}"))
            continue
        try:
            weekday = _parse_weekday(cell("weekday"))
        except ValueError as exc:
            errors.append(RowIssue(line, "weekday", f"malformed weekday: {exc}"))
            continue
        numbers: dict[str, int | float] = {}
        bad = False
        for field in ("stock", "sales", "discounted_sales"):
            try:
                numbers[field] = int(cell(field))
            except ValueError as exc:
                errors.append(RowIssue(line, field, f"malformed integer: {exc}"))
                bad = True
        try:
            numbers["forecast"] = float(cell("forecast"))
        except ValueError as exc:
            errors.append(RowIssue(line, "forecast", f"malformed number: {exc}"))
            bad = True
        if bad:
            continue

        obs = Observation(store_id=store_id, sku_id=sku_id, date=date,
                          weekday=weekday, stock=int(numbers["stock"]),
                          forecast=float(numbers["forecast"]),
                          sales=int(numbers["sales"]),
                          discounted_sales=int(numbers["discounted_sales"]))
        problems = observation_violations(obs)
        if problems:
            for field, message in problems:
                errors.append(RowIssue(line, field, message))
            continue
        key = (store_id, sku_id, date)
        if key in seen:
            errors.append(RowIssue(line, "row",
                                   f"duplicate entry for store {store_id} "
                                   f"sku {sku_id} date {date.isoformat()}"))
            continue
        seen.add(key)
        if obs.weekday != date.isoweekday():
            warnings.append(RowIssue(
                line, "weekday",
                f"weekday column says {WEEKDAY_NAMES[obs.weekday - 1]} but "
                f"{date.isoformat()} is a "
                f"{WEEKDAY_NAMES[date.isoweekday() - 1]}; using the column"))
        observations.append(obs)

    return ParseResult(tuple(observations), tuple(errors), tuple(warnings))


def serialize_csv(observations: Iterable[Observation]) -> str:
    """Render observations in the canonical CSV schema (round-trip safe)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for obs in observations:
        writer.writerow([obs.store_id, obs.sku_id, obs.date.isoformat(),
                         WEEKDAY_NAMES[obs.weekday - 1], obs.stock,
                         repr(obs.forecast), obs.sales, obs.discounted_sales])
    return out.getvalue()


@dataclass(frozen=True, slots=True)
class SkuPanel:
    """All observations of one SKU, partitioned by discount activity.

    ``t_plain`` and ``t_disc`` index into ``observations``: a day belongs to
    ``t_disc`` iff it has at least one discounted sale. ``store_id`` is set
    only when panels were grouped per store-SKU pair.
    """

    sku_id: int
    observations: tuple[Observation, ...]
    t_plain: tuple[int, ...]
    t_disc: tuple[int, ...]
    store_id: int | None = None

    @property
    def n_obs(self) -> int:
        return len(self.observations)

    @property
    def n_plain(self) -> int:
        return len(self.t_plain)

    @property
    def n_disc(self) -> int:
        return len(self.t_disc)

    @property
    def key(self) -> tuple[int, int]:
        return (self.sku_id, -1 if self.store_id is None else self.store_id)


def panel_from_observations(sku_id: int,
                            observations: Sequence[Observation],
                            store_id: int | None = None) -> SkuPanel:
    """Build one panel from already-grouped observations (kept in order)."""
    obs = tuple(observations)
    t_plain = tuple(i for i, o in enumerate(obs) if o.discounted_sales == 0)
    t_disc = tuple(i for i, o in enumerate(obs) if o.discounted_sales >= 1)
    return SkuPanel(sku_id=sku_id, observations=obs, t_plain=t_plain,
                    t_disc=t_disc, store_id=store_id)


def build_panels(observations: Iterable[Observation],
                 group_by: str = "sku") -> tuple[SkuPanel, ...]:
    """Group observations into per-SKU (or per store-SKU) panels.

    Observations within a panel are ordered by (date, store); panels are
    ordered by SKU id (then store id). Store-day rows of the same SKU are
    kept as separate observations when pooling stores.
    """
    if group_by not in ("sku", "store-sku"):
        raise DomainError(f"group_by must be 'sku' or 'store-sku', got {group_by!r}")
    groups: dict[tuple[int, int], list[Observation]] = {}
    for obs in observations:
        key = (obs.sku_id, obs.store_id if group_by == "store-sku" else -1)
        groups.setdefault(key, []).append(obs)
    panels = []
    for (sku_id, store), rows in sorted(groups.items()):
        rows.sort(key=lambda o: (o.date, o.store_id))
        panels.append(panel_from_observations(
            sku_id, rows, store_id=None if store == -1 else store))
    return tuple(panels)


@dataclass(frozen=True, slots=True)
class EligibilityRule:
    """Minimum data requirements for a panel to enter the study."""

    min_entries: int = 100
    min_discount_days: int = 50

    def __post_init__(self) -> None:
        if not self.min_entries >= self.min_discount_days >= 1:
            raise DomainError(
                "eligibility rule requires min_entries >= min_discount_days >= 1, "
                f"got {self.min_entries} and {self.min_discount_days}")


class ExclusionReason(str, Enum):
    TOO_FEW_ENTRIES = "too_few_entries"
    TOO_FEW_DISCOUNT_DAYS = "too_few_discount_days"


@dataclass(frozen=True, slots=True)
class ExcludedPanel:
    panel: SkuPanel
    reason: ExclusionReason


def filter_eligible(panels: Iterable[SkuPanel],
                    rule: EligibilityRule = EligibilityRule(),
                    ) -> tuple[tuple[SkuPanel, ...], tuple[ExcludedPanel, ...]]:
    """Split panels into eligible ones and excluded ones with a reason.

    A panel is eligible iff it has at least ``min_entries`` observations and
    at least ``min_discount_days`` days with a discounted sale (both bounds
    inclusive). When both conditions fail the entry count is reported.
    """
    eligible: list[SkuPanel] = []
    excluded: list[ExcludedPanel] = []
    for panel in panels:
        if panel.n_obs < rule.min_entries:
            excluded.append(ExcludedPanel(panel, ExclusionReason.TOO_FEW_ENTRIES))
        elif panel.n_disc < rule.min_discount_days:
            excluded.append(ExcludedPanel(panel,
                                          ExclusionReason.TOO_FEW_DISCOUNT_DAYS))
        else:
            eligible.append(panel)
    return tuple(eligible), tuple(excluded)
