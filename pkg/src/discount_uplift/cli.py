"""Command-line front end: ``uplift fit``, ``uplift simulate``, ``uplift cycle``.

``fit`` runs the full pipeline on a CSV dataset and writes machine-readable
reports plus plot-ready summaries; ``simulate`` writes a synthetic dataset
with known ground truth; ``cycle`` runs the replenishment feedback-loop
demonstration. Every output directory gets a ``manifest.json`` sufficient to
re-run the command; all data outputs are deterministic for fixed inputs, the
manifest alone carries the timestamp.

Exit codes: 0 success, 2 invalid input or configuration (including parse
errors and zero eligible SKUs), 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as dt
import hashlib
import io
import json
import os
import sys
import traceback
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .aggregate import StudyAggregate, summarize
from .domain import (EligibilityRule, build_panels, parse_csv, serialize_csv)
from .synth import (CycleConfig, DgpConfig, InvalidConfig, cycle_summary,
                    generate_study, simulate_cycle)
from .two_step import ReportStatus, Sidedness, SkuUpliftReport, run_study


class UserError(Exception):
    """Input problem; reported without a traceback, exit code 2."""


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(value, ".17g")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _manifest(command: str, config: dict, input_digest: str | None) -> dict:
    return {
        "command": command,
        "config": config,
        "input_digest": input_digest,
        "tool_version": __version__,
        "numpy_version": np.__version__,
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, payload: dict) -> None:
    _write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _resolve_threads(flag: int | None) -> int:
    if flag is not None:
        if flag < 1:
            raise UserError("--threads must be at least 1")
        return flag
    env = os.environ.get("UPLIFT_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise UserError(f"UPLIFT_THREADS is not an integer: {env!r}") from exc
        if value < 1:
            raise UserError("UPLIFT_THREADS must be at least 1")
        return value
    return os.cpu_count() or 1


def _reports_csv(reports: Sequence[SkuUpliftReport], with_store: bool) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["sku", "status", "n_plain", "n_disc", "mean_residual", "gamma10",
              "gamma10_se", "gamma10_t", "gamma10_p", "significant"]
    if with_store:
        header.insert(1, "store")
    writer.writerow(header)
    for r in reports:
        significant = "" if r.significant_positive is None else \
            ("true" if r.significant_positive else "false")
        row = [r.sku_id, r.status.value, r.n_plain, r.n_disc,
               _fmt(r.mean_residual), _fmt(r.gamma10), _fmt(r.gamma10_se),
               _fmt(r.gamma10_t), _fmt(r.gamma10_p), significant]
        if with_store:
            row.insert(1, "" if r.store_id is None else r.store_id)
        writer.writerow(row)
    return out.getvalue()


def _histogram_csv(aggregate: StudyAggregate) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["bin_left", "bin_right", "count"])
    edges = aggregate.histogram.edges
    for i, count in enumerate(aggregate.histogram.counts):
        writer.writerow([_fmt(edges[i]), _fmt(edges[i + 1]), count])
    return out.getvalue()


def _boxplot_csv(aggregate: StudyAggregate) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["statistic", "value"])
    box = aggregate.boxplot
    for name in ("minimum", "whisker_low", "q1", "median", "q3",
                 "whisker_high", "maximum"):
        writer.writerow([name, _fmt(getattr(box, name))])
    return out.getvalue()


def _parse_hist_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise UserError(f"--hist-range must be LO:HI, got {text!r}") from exc
    if not lo < hi:
        raise UserError(f"--hist-range must satisfy LO < HI, got {text!r}")
    return lo, hi


def cmd_fit(args: argparse.Namespace) -> int:
    input_path = Path(args.input)
    if not input_path.is_file():
        raise UserError(f"input file not found: {input_path}")
    raw = input_path.read_bytes()
    parsed = parse_csv(raw)
    for warning in parsed.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if parsed.errors:
        for error in parsed.errors:
            print(error, file=sys.stderr)
        raise UserError(f"{len(parsed.errors)} invalid rows in {input_path}")

    try:
        rule = EligibilityRule(min_entries=args.min_entries,
                               min_discount_days=args.min_discount_days)
        sidedness = Sidedness(args.sided)
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    if not 0.0 < args.alpha < 1.0:
        raise UserError(f"--alpha must be in (0, 1), got {args.alpha}")
    if not 0.0 < args.trim <= 1.0:
        raise UserError(f"--trim must be in (0, 1], got {args.trim}")
    hist_range = _parse_hist_range(args.hist_range)
    if args.hist_bins < 1:
        raise UserError("--hist-bins must be at least 1")
    threads = _resolve_threads(args.threads)

    panels = build_panels(parsed.observations, group_by=args.group_by)
    reports = run_study(panels, rule=rule, alpha=args.alpha,
                        sidedness=sidedness, threads=threads)
    if not reports:
        raise UserError("no eligible SKUs")
    n_failed = sum(1 for r in reports if r.status is ReportStatus.ESTIMATION_FAILED)
    if n_failed == len(reports):
        raise UserError("estimation failed for every eligible SKU")
    aggregate = summarize(reports, trim_mass=args.trim, hist_range=hist_range,
                          hist_bins=args.hist_bins)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with_store = args.group_by == "store-sku"
    _write(out_dir / "reports.csv", _reports_csv(reports, with_store))
    _write_json(out_dir / "aggregate.json", dataclasses.asdict(aggregate))
    _write(out_dir / "histogram.csv", _histogram_csv(aggregate))
    _write(out_dir / "boxplot.csv", _boxplot_csv(aggregate))
    _write_json(out_dir / "manifest.json", _manifest(
        "fit",
        {"input": str(input_path), "out_dir": str(out_dir),
         "min_entries": args.min_entries,
         "min_discount_days": args.min_discount_days, "alpha": args.alpha,
         "sided": args.sided, "trim": args.trim, "hist_range": args.hist_range,
         "hist_bins": args.hist_bins, "group_by": args.group_by,
         "threads": threads},
        _sha256(raw)))
    print(f"estimated {len(reports) - n_failed} SKUs "
          f"({n_failed} failed, {len(panels) - len(reports)} ineligible); "
          f"reports in {out_dir}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.skus < 0:
        raise UserError("--skus must be non-negative")
    config = DgpConfig(
        seed=args.seed, n_days=args.days,
        weekday_effects=tuple(args.weekday_effects),
        forecast_noise_sd=args.forecast_noise_sd, order_up_to=args.order_up_to,
        discount_probability=args.discount_prob,
        discount_intensity=args.intensity, gamma_true=args.gamma,
        demand_noise=args.demand_noise, demand_noise_sd=args.demand_noise_sd,
        start_date=dt.date.fromisoformat(args.start_date))
    try:
        config.validate()
    except InvalidConfig as exc:
        raise UserError(str(exc)) from exc

    panels = generate_study(config, args.skus)
    observations = [obs for panel in panels for obs in panel.observations]
    text = serialize_csv(observations)
    out_path = Path(args.out)
    _write(out_path, text)
    config_dict = dataclasses.asdict(config)
    config_dict["start_date"] = config.start_date.isoformat()
    config_dict["skus"] = args.skus
    _write_json(out_path.with_name(out_path.name + ".manifest.json"),
                _manifest("simulate", config_dict,
                          _sha256(text.encode("utf-8"))))
    print(f"wrote {len(observations)} observations for {args.skus} SKUs "
          f"to {out_path}")
    return 0


def cmd_cycle(args: argparse.Namespace) -> int:
    config = CycleConfig(
        seed=args.seed, n_days=args.days,
        true_regular_share=args.true_share, assumed_share=args.assumed_share,
        smoothing_weight=args.smoothing, shelf_life_days=args.shelf_life,
        order_up_to_multiplier=args.multiplier, base_demand=args.base_demand,
        discount_sell_prob=args.sell_prob)
    try:
        config.validate()
    except InvalidConfig as exc:
        raise UserError(str(exc)) from exc

    trace = simulate_cycle(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["day", "stock", "forecast", "stickered", "sales",
                     "discounted_sales", "spoilage", "order_placed"])
    for day in trace.days:
        writer.writerow([day.day, day.stock, _fmt(day.forecast),
                         day.stickered, day.sales, day.discounted_sales,
                         day.spoilage, day.order_placed])
    _write(out_dir / "trace.csv", out.getvalue())
    _write_json(out_dir / "summary.json", cycle_summary(trace))
    _write_json(out_dir / "manifest.json",
                _manifest("cycle", dataclasses.asdict(config), None))
    summary = cycle_summary(trace)["last_half"]
    print(f"simulated {len(trace.days)} days; last-half mean stock "
          f"{summary['mean_stock']:.2f}, mean spoilage "
          f"{summary['mean_spoilage']:.2f}; trace in {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uplift",
        description="Estimate the promotional uplift of discounted sales of "
                    "expiring perishables from store/SKU/day panel data.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="run the two-step estimation on a CSV")
    fit.add_argument("--input", required=True, help="input CSV dataset")
    fit.add_argument("--out-dir", default="uplift-out")
    fit.add_argument("--min-entries", type=int, default=100)
    fit.add_argument("--min-discount-days", type=int, default=50)
    fit.add_argument("--alpha", type=float, default=0.05)
    fit.add_argument("--sided", choices=[s.value for s in Sidedness],
                     default=Sidedness.TWO_SIDED.value)
    fit.add_argument("--trim", type=float, default=0.95,
                     help="central mass kept of the per-SKU mean residuals")
    fit.add_argument("--hist-range", default="0:1.5")
    fit.add_argument("--hist-bins", type=int, default=30)
    fit.add_argument("--group-by", choices=["sku", "store-sku"], default="sku")
    fit.add_argument("--threads", type=int, default=None,
                     help="default: UPLIFT_THREADS or all cores")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="write a synthetic dataset")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--skus", type=int, default=50)
    sim.add_argument("--days", type=int, default=400)
    sim.add_argument("--gamma", type=float, default=0.6,
                     help="planted uplift per discounted sale")
    sim.add_argument("--discount-prob", type=float, default=0.25)
    sim.add_argument("--intensity", type=float, default=3.5)
    sim.add_argument("--weekday-effects", type=float, nargs=7,
                     default=list(DgpConfig().weekday_effects),
                     metavar="LAMBDA")
    sim.add_argument("--forecast-noise-sd", type=float, default=0.5)
    sim.add_argument("--demand-noise", choices=["gaussian", "poisson"],
                     default="gaussian")
    sim.add_argument("--demand-noise-sd", type=float, default=0.5)
    sim.add_argument("--order-up-to", type=int, default=40)
    sim.add_argument("--start-date", default="2024-01-01")
    sim.add_argument("--out", default="synthetic.csv")
    sim.set_defaults(func=cmd_simulate)

    cyc = sub.add_parser("cycle", help="run the feedback-loop simulation")
    cyc.add_argument("--seed", type=int, default=0)
    cyc.add_argument("--days", type=int, default=365)
    cyc.add_argument("--true-share", type=float, default=0.3)
    cyc.add_argument("--assumed-share", type=float, default=1.0)
    cyc.add_argument("--smoothing", type=float, default=0.2)
    cyc.add_argument("--shelf-life", type=int, default=3)
    cyc.add_argument("--multiplier", type=float, default=2.0)
    cyc.add_argument("--base-demand", type=float, default=5.0)
    cyc.add_argument("--sell-prob", type=float, default=0.85)
    cyc.add_argument("--out-dir", default="cycle-out")
    cyc.set_defaults(func=cmd_cycle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
