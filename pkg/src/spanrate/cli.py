"""Command-line entry point: ``spanrate {rate,hotspots,compare,solar}``.

Exit codes: 0 success, 2 input error, 3 infeasible computation.
Summaries go to stdout, diagnostics to stderr.
"""

import argparse
import logging
import sys
from dataclasses import replace
from datetime import date as _date
from pathlib import Path

import numpy as np
import pandas as pd

from . import model_io, solar
from .exceptions import (
    InfeasibleRatingError,
    InputValidationError,
    OutOfModelRangeError,
    SpanrateError,
)
from .ratings import ALL_VARIANTS, DLR_VARIANTS, compare_variants, hotspot_analysis, parse_variants, rate_line

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors already; keep the message on stderr
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="spanrate", description="Span-level dynamic line rating.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("rate", help="rate every span and the line for each forecast hour")
    r.add_argument("--line", required=True, help="line model (CSV or GeoJSON)")
    r.add_argument("--predictions", required=True, help="forecast CSV")
    r.add_argument("--config", help="JSON run configuration")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--variants", help="comma-separated subset of " + ",".join(map(str, ALL_VARIANTS)))

    h = sub.add_parser("hotspots", help="how often each span limits the line")
    h.add_argument("--results", required=True, help="directory written by 'rate'")
    h.add_argument("--out", required=True, help="output CSV")

    c = sub.add_parser("compare", help="per-hour variant table and ordering check")
    c.add_argument("--results", required=True, help="directory written by 'rate'")
    c.add_argument("--out", required=True, help="output CSV")

    s = sub.add_parser("solar", help="hourly clear-sky table for one day")
    s.add_argument("--lat", required=True, type=float)
    s.add_argument("--lon", required=True, type=float)
    s.add_argument("--date", required=True, help="YYYY-MM-DD (UTC day)")
    s.add_argument("--out", required=True, help="output CSV")
    return p


def _diagnose(exc):
    print(f"error: {exc}", file=sys.stderr)


def cmd_rate(args):
    cfg = model_io.load_config(args.config)
    if args.variants:
        cfg = replace(cfg, variants=parse_variants(args.variants))
    catalog = model_io.load_conductor_catalog(cfg.conductor_catalog)
    line = model_io.load_line_model(args.line, catalog)
    preds = model_io.load_predictions(args.predictions, line=line)
    for path, lineno, msg in preds.errors[:50]:
        print(f"{path}:{lineno}: rejected row: {msg}", file=sys.stderr)
    if len(preds.errors) > 50:
        print(f"... {len(preds.errors) - 50} more rejected row(s)", file=sys.stderr)

    result = rate_line(line, preds.frame, cfg.variants, config=cfg, workers=None)
    model_io.write_results(result, args.out)

    violations = "n/a"
    if all(v in cfg.variants for v in DLR_VARIANTS) and len(result.span_ratings):
        violations = len(compare_variants(result.span_ratings))
    print(f"spans: {len(line.spans)}")
    print(f"hours processed: {result.hours}")
    print(f"gaps: {len(result.gaps)}")
    print(f"rejected rows: {len(preds.errors)}")
    print(f"span records: {len(result.span_ratings)}")
    print(f"line records: {len(result.line_ratings)}")
    print(f"violations: {violations}")
    print(f"output: {args.out}")
    return EXIT_OK


def cmd_hotspots(args):
    line = model_io.read_line_results(args.results)
    span_ids = None
    span_path = Path(args.results) / "span_ratings.csv"
    if span_path.exists():
        span_ids = pd.read_csv(span_path, usecols=["span_id"], dtype=str)["span_id"].unique()
    table = hotspot_analysis(line, span_ids)
    table.to_csv(args.out, index=False)
    for variant, grp in table.groupby("variant", sort=False):
        top = grp.sort_values("hours_limiting", ascending=False, kind="stable").iloc[0]
        print(f"{variant}: most limiting span {top.span_id} ({top.fraction:.1%} of hours)")
    return EXIT_OK


def cmd_compare(args):
    line = model_io.read_line_results(args.results)
    present = set(line["variant"].unique())
    if len(present) < 2:
        raise InputValidationError(f"{args.results}: need at least two variants, found {sorted(present)}")
    wide = line.pivot(index="timestamp", columns="variant", values="ampacity_a")
    wide = wide[[str(v) for v in ALL_VARIANTS if str(v) in present]]
    wide.reset_index().to_csv(args.out, index=False, float_format="%.6f")

    for d in DLR_VARIANTS:
        d = str(d)
        if d not in present:
            continue
        for ref in ("AAR", "SR"):
            if ref in present:
                n = int((wide[d] > wide[ref]).sum())
                print(f"{d} > {ref}: {n} hours")

    if all(str(v) in present for v in DLR_VARIANTS):
        span = model_io.read_span_results(args.results)
        violations = len(compare_variants(span))
        print(f"violations: {violations}")
    else:
        missing = [str(v) for v in DLR_VARIANTS if str(v) not in present]
        print(f"violations: n/a (missing {', '.join(missing)})")
    return EXIT_OK


def cmd_solar(args):
    try:
        day = _date.fromisoformat(args.date)
    except ValueError:
        raise InputValidationError(f"invalid date {args.date!r}; expected YYYY-MM-DD") from None
    start = np.datetime64(day.isoformat(), "h")
    times = start + np.arange(24).astype("timedelta64[h]")
    elev, az = solar.solar_position_array(times.astype("datetime64[s]"), args.lat, args.lon)
    irr = solar.clear_sky_ghi(elev)
    table = pd.DataFrame({
        "timestamp": pd.to_datetime(times).strftime(model_io.TIMESTAMP_FORMAT),
        "elevation_deg": elev,
        "azimuth_deg": az,
        "irradiance_wm2": irr,
    })
    table.to_csv(args.out, index=False, float_format="%.4f")
    peak = int(np.argmax(irr))
    print(f"{args.date} at ({args.lat}, {args.lon}): peak {irr[peak]:.1f} W/m^2 at {table.timestamp[peak]}")
    return EXIT_OK


COMMANDS = {"rate": cmd_rate, "hotspots": cmd_hotspots, "compare": cmd_compare, "solar": cmd_solar}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (InfeasibleRatingError, OutOfModelRangeError) as exc:
        _diagnose(exc)
        return EXIT_INFEASIBLE
    except (SpanrateError, FileNotFoundError, ValueError, KeyError) as exc:
        _diagnose(exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
