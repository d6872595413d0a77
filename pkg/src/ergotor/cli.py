"""Experiment runner: configure, validate, execute, and report.

One JSON config drives one experiment; reports are written as CSV and/or
JSON with the fully resolved config and tool version embedded, so any run
can be replayed byte-identically from its own report.  Timestamps and host
info go to a sidecar ``.meta.json`` to keep report bodies reproducible.

Exit codes: 0 success, 2 unusable config or input, 3 numerical failure
(resonance, non-convergence, exhausted budget).
"""

from __future__ import annotations

import argparse
import copy
import csv
import datetime
import io
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .equidistribution import (
    OCCUPATION_COLUMNS,
    JordanRegion,
    anchored_discrepancy,
    occupation_measure,
    weyl_sum,
)
from .ergodic_averages import REPORT_COLUMNS, convergence_sweep, reports_to_rows
from .errors import (
    BudgetError,
    IndeterminateTailError,
    InvalidInputError,
    NoConvergenceError,
    ResonanceError,
)
from .fourier_sparse import FourierSeries, MultiIndex, select_rank_schedule
from .frequencies import FrequencyFamily, check_independence, generate
from .montecarlo_measure import chebyshev_bound, mc_measure_superlevel
from .torus_core import TorusPoint

EXPERIMENTS = (
    "weyl",
    "kronecker",
    "ergodic",
    "select_rk",
    "independence",
    "discrepancy",
    "chebyshev",
)
FORMATS = ("csv", "json", "both")

_NUMERICAL_ERRORS = (ResonanceError, NoConvergenceError, BudgetError, IndeterminateTailError)


# ---------------------------------------------------------------------------
# config loading, validation, resolution
# ---------------------------------------------------------------------------


def load_config(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise InvalidInputError("config root must be a JSON object")
    return doc


def _check_frequencies(doc, violations):
    spec = doc.get("frequencies")
    if spec is None:
        violations.append(("frequencies.missing", "a frequencies spec is required"))
        return
    if not isinstance(spec, dict):
        violations.append(("frequencies.spec", "frequencies must be an object"))
        return
    family = spec.get("family")
    try:
        family = FrequencyFamily(family)
    except ValueError:
        violations.append(("frequencies.family", f"unknown family {family!r}"))
        return
    if family is FrequencyFamily.EXPLICIT:
        values = spec.get("values")
        if not isinstance(values, list) or not values:
            violations.append(("frequencies.values", "explicit family requires values"))
            return
        if any(not isinstance(v, (int, float)) for v in values):
            violations.append(("frequencies.values", "values must be numbers"))
            return
        if values[0] <= 0 or any(b <= a for a, b in zip(values, values[1:])):
            violations.append(
                ("frequencies.order", "values must be positive and strictly increasing")
            )
    else:
        d = spec.get("d")
        if not isinstance(d, int) or d < 1:
            violations.append(("frequencies.d", "d must be a positive integer"))


def _frequency_dim(doc) -> int | None:
    spec = doc.get("frequencies")
    if not isinstance(spec, dict):
        return None
    if spec.get("family") == FrequencyFamily.EXPLICIT.value:
        values = spec.get("values")
        return len(values) if isinstance(values, list) else None
    d = spec.get("d")
    return d if isinstance(d, int) and d >= 1 else None


def _check_t_grid(doc, violations):
    grid = doc.get("T_grid")
    if grid is None:
        violations.append(("T_grid.missing", "a T_grid is required"))
        return
    if not isinstance(grid, list) or not grid or any(
        not isinstance(t, (int, float)) for t in grid
    ):
        violations.append(("T_grid.values", "T_grid must be a nonempty number list"))
        return
    if grid[0] <= 0:
        violations.append(("T_grid.positive", "horizons must be positive"))
    if any(b <= a for a, b in zip(grid, grid[1:])):
        violations.append(("T_grid.monotone", "T_grid must be strictly increasing"))


def _check_region(doc, violations):
    spec = doc.get("region")
    if spec is None:
        violations.append(("region.missing", "a region spec is required"))
        return
    if not isinstance(spec, dict):
        violations.append(("region.spec", "region must be an object"))
        return
    kind = spec.get("kind", "box")
    if kind == "box":
        intervals = spec.get("intervals")
        if not isinstance(intervals, list) or not intervals:
            violations.append(("region.interval", "box regions need an interval list"))
            return
        for pair in intervals:
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or any(not isinstance(v, (int, float)) for v in pair)
                or not (0.0 <= pair[0] <= pair[1] <= 1.0)
            ):
                violations.append(
                    ("region.interval", f"interval {pair!r} must satisfy 0 <= a <= b <= 1")
                )
        n = len(intervals)
    elif kind == "ball_cylinder":
        center, radius = spec.get("center"), spec.get("radius")
        if not isinstance(center, list) or not center or not isinstance(radius, (int, float)) or radius <= 0:
            violations.append(("region.ball", "ball regions need a center list and a positive radius"))
            return
        n = len(center)
    else:
        violations.append(("region.kind", f"unknown region kind {kind!r}"))
        return
    d = _frequency_dim(doc)
    if d is not None and n > d:
        violations.append(("region.dimension", f"region uses {n} coordinates, frequencies give {d}"))


def _load_series(doc, config_dir: Path) -> FourierSeries:
    spec = doc["function"]
    if "path" in spec:
        payload = json.loads((config_dir / spec["path"]).read_text(encoding="utf-8"))
        return FourierSeries.from_json_dict(payload)
    return FourierSeries.from_json_dict(spec)


def _check_function(doc, violations, config_dir: Path):
    spec = doc.get("function")
    if spec is None:
        violations.append(("function.missing", "a function spec is required"))
        return
    if not isinstance(spec, dict):
        violations.append(("function.spec", "function must be an object"))
        return
    if "path" in spec:
        path = config_dir / str(spec["path"])
        if not path.is_file():
            violations.append(("function.path", f"series file {path} not found"))
            return
    try:
        series = _load_series(doc, config_dir)
    except Exception as exc:
        violations.append(("function.terms", f"series does not parse: {exc}"))
        return
    d = _frequency_dim(doc)
    if d is not None and series.max_support > d:
        violations.append(
            ("function.support", f"series reaches coordinate {series.max_support}, frequencies give {d}")
        )


def _check_u(doc, violations, single: bool):
    spec = doc.get("u", "zero")
    if spec == "zero":
        return
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3 or parts[0] != "random":
            violations.append(("u.spec", f"unrecognized u spec {spec!r}"))
            return
        try:
            count, seed = int(parts[1]), int(parts[2])
        except ValueError:
            violations.append(("u.spec", "random u spec must be random:<count>:<seed>"))
            return
        if count < 1:
            violations.append(("u.spec", "random u count must be positive"))
        if single and count != 1:
            violations.append(("u.single", "this experiment uses exactly one starting point"))
        return
    if not isinstance(spec, list) or not spec:
        violations.append(("u.spec", "u must be 'zero', 'random:<n>:<seed>', or a point list"))
        return
    d = _frequency_dim(doc)
    for point in spec:
        if not isinstance(point, list) or any(not isinstance(c, (int, float)) for c in point):
            violations.append(("u.coords", "points must be numeric coordinate lists"))
            return
        if any(not (0.0 <= c < 1.0) for c in point):
            violations.append(("u.coords", "coordinates must lie in [0, 1)"))
        if d is not None and len(point) != d:
            violations.append(("u.dimension", f"points must have {d} coordinates"))
    if single and len(spec) != 1:
        violations.append(("u.single", "this experiment uses exactly one starting point"))


def _check_positive_int(doc, key, name, violations, minimum=1):
    value = doc.get(key)
    if not isinstance(value, int) or value < minimum:
        violations.append((name, f"{key} must be an integer >= {minimum}"))


def validate_config(doc: dict, config_dir: Path | None = None) -> list[tuple[str, str]]:
    """Structural checks; returns every violation as (name, message)."""
    config_dir = Path(".") if config_dir is None else config_dir
    violations: list[tuple[str, str]] = []
    experiment = doc.get("experiment")
    if experiment not in EXPERIMENTS:
        violations.append(("experiment.kind", f"unknown experiment {experiment!r}"))
        return violations

    output = doc.get("output", {})
    if not isinstance(output, dict):
        violations.append(("output.spec", "output must be an object"))
    else:
        fmt = output.get("format", "both")
        if fmt not in FORMATS:
            violations.append(("output.format", f"format must be one of {FORMATS}"))
        if "basename" in output and (
            not isinstance(output["basename"], str) or not output["basename"]
        ):
            violations.append(("output.basename", "basename must be a nonempty string"))

    if experiment in ("weyl", "kronecker", "ergodic", "independence", "discrepancy"):
        _check_frequencies(doc, violations)
    if experiment in ("weyl", "kronecker", "ergodic", "discrepancy"):
        _check_t_grid(doc, violations)
    if experiment in ("ergodic", "select_rk", "chebyshev"):
        _check_function(doc, violations, config_dir)
    if experiment == "kronecker":
        _check_region(doc, violations)
    if experiment in ("weyl", "kronecker", "discrepancy"):
        _check_u(doc, violations, single=True)
    if experiment == "ergodic":
        _check_u(doc, violations, single=False)
    if experiment == "weyl":
        index = doc.get("index")
        if not isinstance(index, dict) or not all(
            str(k).isdigit() and int(k) >= 1 and isinstance(v, int)
            for k, v in (index or {}).items()
        ):
            violations.append(("index.entries", "index must map 1-based coordinates to integers"))
    if experiment in ("select_rk", "chebyshev"):
        _check_positive_int(doc, "K", "K.range", violations, minimum=2)
    if experiment == "independence":
        _check_positive_int(doc, "coeff_bound", "independence.bound", violations)
        tolerance = doc.get("tolerance", 1e-6)
        if not isinstance(tolerance, (int, float)) or tolerance <= 0:
            violations.append(("independence.tolerance", "tolerance must be positive"))
    if experiment == "discrepancy":
        _check_positive_int(doc, "grid_resolution", "discrepancy.grid", violations)
        d = _frequency_dim(doc)
        active = doc.get("active_dim", d)
        if not isinstance(active, int) or active < 1 or (d is not None and active > d):
            violations.append(("discrepancy.active_dim", "active_dim must be in 1..len(frequencies)"))
    if experiment == "chebyshev":
        thresholds = doc.get("thresholds")
        if (
            not isinstance(thresholds, list)
            or not thresholds
            or any(not isinstance(c, (int, float)) or c <= 0 for c in thresholds)
        ):
            violations.append(("thresholds.positive", "thresholds must be positive numbers"))
        samples = doc.get("samples", 100_000)
        if not isinstance(samples, int) or samples < 2:
            violations.append(("samples.range", "samples must be an integer >= 2"))
        seed = doc.get("seed", 0)
        if not isinstance(seed, int):
            violations.append(("seed.value", "seed must be an integer"))
        if "sample_dim" in doc and (
            not isinstance(doc["sample_dim"], int) or doc["sample_dim"] < 1
        ):
            violations.append(("sample_dim.range", "sample_dim must be a positive integer"))
    return violations


def resolve_config(
    doc: dict,
    config_dir: Path,
    seed_override: int | None = None,
    format_override: str | None = None,
) -> dict:
    """Fill defaults, inline any series file, and apply CLI overrides.

    Resolution is idempotent: resolving a resolved config is the identity,
    which is what makes replay-from-report byte-stable.
    """
    resolved = copy.deepcopy(doc)
    experiment = resolved["experiment"]
    output = dict(resolved.get("output", {}))
    output.setdefault("basename", experiment)
    output.setdefault("format", "both")
    if format_override is not None:
        output["format"] = format_override
    resolved["output"] = output

    if experiment in ("weyl", "kronecker", "ergodic", "discrepancy"):
        resolved.setdefault("u", "zero")
    if experiment == "independence":
        resolved.setdefault("tolerance", 1e-6)
    if experiment == "chebyshev":
        resolved.setdefault("samples", 100_000)
        resolved.setdefault("seed", 0)
    if seed_override is not None:
        resolved["seed"] = int(seed_override)

    if experiment in ("ergodic", "select_rk", "chebyshev"):
        series = _load_series(resolved, config_dir)
        resolved["function"] = series.to_json_dict()
        if experiment == "chebyshev":
            resolved.setdefault("sample_dim", max(series.max_support, 1))
    return resolved


# ---------------------------------------------------------------------------
# experiment execution
# ---------------------------------------------------------------------------


def _frequencies_from(resolved):
    spec = resolved["frequencies"]
    family = FrequencyFamily(spec["family"])
    if family is FrequencyFamily.EXPLICIT:
        values = spec["values"]
        return generate(family, len(values), values)
    return generate(family, spec["d"])


def _points_from(resolved, d: int) -> list[TorusPoint]:
    spec = resolved.get("u", "zero")
    if spec == "zero":
        return [TorusPoint.zero(d)]
    if isinstance(spec, str):
        _, count, seed = spec.split(":")
        rng = np.random.Generator(np.random.PCG64(int(seed)))
        return [TorusPoint(row) for row in rng.random((int(count), d))]
    return [TorusPoint(point) for point in spec]


def _run_weyl(resolved):
    lam = _frequencies_from(resolved)
    index = MultiIndex({int(k): int(v) for k, v in resolved["index"].items()})
    u = _points_from(resolved, len(lam))[0]
    rows = []
    for T in resolved["T_grid"]:
        value = weyl_sum(index, u, lam, float(T))
        if index.is_zero():
            bound = 1.0
        else:
            bound = min(1.0, 1.0 / (math.pi * float(T) * abs(index.dot(lam))))
        rows.append(
            [float(T), float(value.real), float(value.imag), float(abs(value)), float(bound)]
        )
    return ("T", "re_value", "im_value", "modulus", "bound"), rows


def _run_kronecker(resolved):
    lam = _frequencies_from(resolved)
    spec = resolved["region"]
    if spec.get("kind", "box") == "box":
        region = JordanRegion.box(spec["intervals"])
    else:
        region = JordanRegion.ball_cylinder(spec["center"], spec["radius"])
    u = _points_from(resolved, len(lam))[0]
    rows = []
    for T in resolved["T_grid"]:
        occ = occupation_measure(u, lam, region, float(T))
        rows.append(
            [
                float(T),
                float(occ.ratio),
                float(occ.volume),
                float(abs(occ.ratio - occ.volume)),
                int(occ.event_count),
            ]
        )
    return OCCUPATION_COLUMNS, rows


def _run_ergodic(resolved):
    lam = _frequencies_from(resolved)
    series = FourierSeries.from_json_dict(resolved["function"])
    u_set = _points_from(resolved, len(lam))
    reports = convergence_sweep(series, u_set, lam, resolved["T_grid"])
    rows = [
        [int(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]), float(r[5])]
        for r in reports_to_rows(reports)
    ]
    return REPORT_COLUMNS, rows


def _run_select_rk(resolved):
    series = FourierSeries.from_json_dict(resolved["function"])
    schedule = select_rank_schedule(series, resolved["K"])
    rows = [[1, int(schedule.ranks[0]), None, None]]
    for k, (rank, bound) in enumerate(zip(schedule.ranks[1:], schedule.tail_bounds), start=2):
        rows.append([int(k), int(rank), float(bound), float(2.0 ** (-2 * k))])
    return ("k", "rank", "tail_bound", "limit"), rows


def _run_independence(resolved):
    lam = _frequencies_from(resolved)
    report = check_independence(lam, resolved["coeff_bound"], resolved["tolerance"])
    verdict = "independent" if report.passed else "dependent"
    rows = [
        [
            float(report.min_combination),
            ";".join(str(c) for c in report.witness),
            int(report.bound),
            float(report.tolerance),
            bool(report.passed),
            verdict,
        ]
    ]
    return (
        "min_combination",
        "witness",
        "coeff_bound",
        "tolerance",
        "passed",
        "verdict",
    ), rows


def _run_discrepancy(resolved):
    lam = _frequencies_from(resolved)
    active = resolved.get("active_dim", len(lam))
    u = _points_from(resolved, len(lam))[0]
    rows = []
    for T in resolved["T_grid"]:
        result = anchored_discrepancy(u, lam, active, float(T), resolved["grid_resolution"])
        rows.append(
            [
                float(T),
                float(result.worst_ratio),
                float(result.worst_volume),
                float(result.value),
                int(result.event_count),
            ]
        )
    return OCCUPATION_COLUMNS, rows


def _run_chebyshev(resolved):
    series = FourierSeries.from_json_dict(resolved["function"])
    schedule = select_rank_schedule(series, resolved["K"])
    d = resolved.get("sample_dim", max(series.max_support, 1))
    n, seed = resolved["samples"], resolved["seed"]
    rows = []
    for c in resolved["thresholds"]:
        estimate = mc_measure_superlevel(series, schedule, float(c), d, n, seed)
        bound = chebyshev_bound(series, schedule, float(c))
        consistent = estimate.mean.real - 4.0 * estimate.std_error <= bound
        rows.append(
            [
                float(c),
                float(estimate.mean.real),
                float(estimate.std_error),
                int(n),
                int(seed),
                float(bound),
                bool(consistent),
            ]
        )
    return ("threshold", "estimate", "std_error", "n", "seed", "bound", "consistent"), rows


_RUNNERS = {
    "weyl": _run_weyl,
    "kronecker": _run_kronecker,
    "ergodic": _run_ergodic,
    "select_rk": _run_select_rk,
    "independence": _run_independence,
    "discrepancy": _run_discrepancy,
    "chebyshev": _run_chebyshev,
}


# ---------------------------------------------------------------------------
# report writing
# ---------------------------------------------------------------------------


def build_report(resolved: dict, columns, rows) -> dict:
    return {
        "version": __version__,
        "experiment": resolved["experiment"],
        "config": resolved,
        "columns": list(columns),
        "rows": rows,
    }


def report_json_bytes(report: dict) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_csv_bytes(report: dict) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(report["columns"])
    for row in report["rows"]:
        writer.writerow([_csv_cell(v) for v in row])
    return buffer.getvalue().encode("utf-8")


def write_reports(report: dict, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    basename = report["config"]["output"]["basename"]
    fmt = report["config"]["output"]["format"]
    written = []
    if fmt in ("json", "both"):
        path = out_dir / f"{basename}.json"
        path.write_bytes(report_json_bytes(report))
        written.append(path)
    if fmt in ("csv", "both"):
        path = out_dir / f"{basename}.csv"
        path.write_bytes(report_csv_bytes(report))
        written.append(path)
    meta = {
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "host": platform.node(),
        "argv": sys.argv,
        "version": __version__,
    }
    meta_path = out_dir / f"{basename}.meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(meta_path)
    return written


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def run_config(
    doc: dict,
    config_dir: Path,
    out_dir: Path,
    seed_override: int | None = None,
    format_override: str | None = None,
) -> list[Path]:
    resolved = resolve_config(doc, config_dir, seed_override, format_override)
    columns, rows = _RUNNERS[resolved["experiment"]](resolved)
    report = build_report(resolved, columns, rows)
    return write_reports(report, out_dir)


def _serialize_error(exc: Exception) -> str:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, BudgetError) and exc.suggestion:
        payload["error"]["suggestion"] = exc.suggestion
    if isinstance(exc, ResonanceError):
        payload["error"]["index"] = repr(exc.index)
    return json.dumps(payload, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ergotor", description="torus-flow verification experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute an experiment config")
    run_parser.add_argument("config", help="path to a JSON experiment config")
    run_parser.add_argument("--out", default=".", help="output directory")
    run_parser.add_argument("--format", choices=FORMATS, default=None)
    run_parser.add_argument("--seed", type=int, default=None, help="override the config seed")

    validate_parser = sub.add_parser("validate", help="check a config without running")
    validate_parser.add_argument("config", help="path to a JSON experiment config")

    args = parser.parse_args(argv)
    config_path = Path(args.config)
    if not config_path.is_file():
        print(f"config file not found: {config_path}", file=sys.stderr)
        return 2
    try:
        doc = load_config(config_path)
    except (json.JSONDecodeError, InvalidInputError, OSError) as exc:
        print(f"config does not parse: {exc}", file=sys.stderr)
        return 2

    violations = validate_config(doc, config_path.parent)
    if args.command == "validate":
        if violations:
            for name, message in violations:
                print(f"{name}: {message}")
            return 2
        print("valid")
        return 0

    if violations:
        for name, message in violations:
            print(f"{name}: {message}", file=sys.stderr)
        return 2
    try:
        written = run_config(
            doc,
            config_path.parent,
            Path(args.out),
            seed_override=args.seed,
            format_override=args.format,
        )
    except _NUMERICAL_ERRORS as exc:
        print(_serialize_error(exc), file=sys.stderr)
        return 3
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
