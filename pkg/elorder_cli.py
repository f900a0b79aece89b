"""
Command-line front end.

    elorder_cli.py k-sample DATA.csv --groups A,B,C [--order simple] [--with-sn]
    elorder_cli.py one-sample DATA.csv --f0 uniform:a=0,b=1 [--star]
    elorder_cli.py critvals --k 2..5 --alphas 0.01,0.05,0.10 --method finite
    elorder_cli.py power CONFIG.json
    elorder_cli.py survcurves DATA.csv --out curves.csv

Reports are written to stdout (text, or the JSON envelope with --json),
logs to stderr. Exit codes: 0 success, 2 input errors, 3 invalid arguments.
"""
import argparse
import csv
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import (
    CACHE_DIR,
    CACHE_ENABLED,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_LIMIT_GRID,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    LOG_FORMAT,
    LOG_LEVEL,
)
from data_io import load_scenarios, read_grouped_csv, read_value_csv, write_survival_csv
from distributions import DistributionSpec
from el_statistics import k_sample_Tn, one_sample_Tn, one_sample_Tn_star
from exceptions import ConfigError, ElorderError, InputDataError, InvalidArgumentError
from isotone import OrderSpec
from null_distribution import (
    NullDistribution,
    critical_value,
    one_sample_statistic_name,
    p_value,
    published_critical_value,
    simulate_limit_k,
    simulate_limit_one,
    simulate_null_finite,
    simulate_null_finite_one,
)
from power_study import PowerResult, power_rows, run_power
from samples import build_pooled_grid
from sequential_ks import DEFAULT_ALPHAS, sn_critical, sn_statistic
from utils.cache import NullDistributionCache, null_cache_key
from utils.report_formatter import error_report, fmt, render_fields, render_table, success_report, to_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_INVALID_ARGUMENT = 3


class UsageError(InvalidArgumentError):
    """Raised instead of exiting when the command line cannot be parsed."""
    pass


class ElorderArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


# --- Report model ---

class TestReport(BaseModel):
    """Outcome of one hypothesis test, with the provenance of its null distribution."""
    model_config = ConfigDict(frozen=True)

    test: str = Field(..., description="Statistic name, e.g. Tn, Tn*, Sn.")
    statistic: float = Field(..., ge=0, description="Observed statistic.")
    p_value: float = Field(..., gt=0, le=1, description="p-value against the reported null.")
    critical_values: Dict[float, float] = Field(default_factory=dict, description="Critical value per alpha.")
    k: int = Field(..., ge=1, description="Number of groups (1 for one-sample tests).")
    groups: Tuple[str, ...] = Field(..., description="Group labels in hypothesis order.")
    n_vec: Tuple[int, ...] = Field(..., description="Group sizes.")
    order: str = Field(..., description="Hypothesized ordering.")
    null: Dict[str, Any] = Field(..., description="How the null distribution was obtained.")
    ties: int = Field(0, ge=0, description="Pooled values with multiplicity above one.")
    details: Dict[str, Any] = Field(default_factory=dict, description="Test-specific extras.")
    companions: Tuple["TestReport", ...] = Field((), description="Further tests run on the same data.")

    @model_validator(mode="after")
    def _complete_provenance(self) -> "TestReport":
        if "method" not in self.null:
            raise ValueError("null provenance needs a method")
        if self.null["method"] != "asymptotic" and not {"reps", "seed"} <= set(self.null):
            raise ValueError("Monte Carlo provenance needs reps and seed")
        return self


TestReport.model_rebuild()


def _monte_carlo_report(
    test: str,
    statistic: float,
    dist: NullDistribution,
    alphas: Sequence[float],
    **fields: Any,
) -> TestReport:
    return TestReport(
        test=test,
        statistic=statistic,
        p_value=p_value(dist, statistic),
        critical_values={a: critical_value(dist, a) for a in alphas},
        null=dist.provenance(),
        **fields,
    )


def render_test_report(report: TestReport) -> str:
    fields = [
        ("Statistic", fmt(report.statistic)),
        ("p-value", fmt(report.p_value)),
        ("Groups", " > ".join(report.groups)),
        ("Sizes", ", ".join(str(n) for n in report.n_vec)),
        ("Order", report.order),
    ]
    fields += [(f"Critical value (alpha={a:g})", fmt(v)) for a, v in sorted(report.critical_values.items())]
    null = report.null
    if null["method"] == "asymptotic":
        fields.append(("Null", "asymptotic"))
    else:
        fields.append(("Null", f"{null['method']}, reps={null['reps']}, seed={null['seed']}"))
    if report.ties:
        fields.append(("Tied values", str(report.ties)))
    for name, value in sorted(report.details.items()):
        shown = ", ".join(fmt(v) for v in value) if isinstance(value, (list, tuple)) else str(value)
        fields.append((name, shown))
    parts = [render_fields(f"{report.test} test", fields)]
    parts += [render_test_report(companion) for companion in report.companions]
    return "\n\n".join(parts)


# --- Argument helpers ---

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def parse_alphas(text: str) -> Tuple[float, ...]:
    try:
        alphas = tuple(float(a) for a in text.split(",") if a.strip())
    except ValueError:
        raise InvalidArgumentError(f"invalid alpha list '{text}'")
    if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
        raise InvalidArgumentError(f"every alpha must lie in (0, 1), got '{text}'")
    return alphas


def parse_k_range(text: str) -> List[int]:
    """``2..5``, ``2,3,4`` or ``3``."""
    try:
        if ".." in text:
            lo, _, hi = text.partition("..")
            ks = list(range(int(lo), int(hi) + 1))
        else:
            ks = [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise InvalidArgumentError(f"invalid k range '{text}'")
    if not ks or any(k < 2 for k in ks):
        raise InvalidArgumentError(f"k values must be at least 2, got '{text}'")
    return ks


def _split_groups(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [g for g in (part.strip() for part in text.split(",")) if g]


def _make_cache(args: argparse.Namespace) -> NullDistributionCache:
    return NullDistributionCache(args.cache_dir, enabled=CACHE_ENABLED and not args.no_cache)


def _emit(args: argparse.Namespace, text: str, data: Any, message: str, meta: Dict[str, Any]) -> None:
    if args.json:
        print(to_json(success_report(data=data, message=message, meta=meta)))
    else:
        print(text)


# --- Commands ---

def _k_sample_null(args: argparse.Namespace, k: int, weights, sizes, order: OrderSpec) -> NullDistribution:
    cache = _make_cache(args)
    if args.null == "finite":
        key = null_cache_key("finite-sample", k, weights, args.reps, None, args.seed, order.describe(), sizes)
        return cache.get_or_create(key, lambda: simulate_null_finite(
            k, sizes, order, reps=args.reps, seed=args.seed, workers=args.workers, chunk_size=args.chunk_size,
        ))
    key = null_cache_key("limit-k", k, weights, args.reps, args.grid, args.seed, order.describe())
    return cache.get_or_create(key, lambda: simulate_limit_k(
        weights, order, reps=args.reps, grid_size=args.grid, seed=args.seed,
        workers=args.workers, chunk_size=args.chunk_size,
    ))


def cmd_k_sample(args: argparse.Namespace) -> TestReport:
    alphas = parse_alphas(args.alphas)
    data, default_order = read_grouped_csv(args.data, _split_groups(args.groups))
    if default_order:
        logger.warning(f"No --groups given; testing {' > '.join(data.labels)} in order of first occurrence")
    order = OrderSpec.parse(args.order, data.k)
    if args.with_sn and order.kind != "simple":
        raise InvalidArgumentError("--with-sn is defined for the simple order only")

    grid = build_pooled_grid(data)
    statistic = k_sample_Tn(data, order)
    dist = _k_sample_null(args, data.k, data.weights, data.sizes, order)

    shared = dict(k=data.k, groups=data.labels, n_vec=data.sizes, order=order.describe(), ties=grid.tie_count)
    companions = ()
    if args.with_sn:
        sn = sn_statistic(data, alphas)
        companions = (TestReport(
            test="Sn",
            statistic=sn.statistic,
            p_value=sn.p_value,
            critical_values=sn.critical_values,
            null={"method": "asymptotic"},
            details={"per_stage": list(sn.per_stage)},
            **shared,
        ),)
    report = _monte_carlo_report("Tn", statistic, dist, alphas, companions=companions, **shared)
    logger.info(f"k-sample Tn={statistic:.6g}, p={report.p_value:.6g}")
    _emit(args, render_test_report(report), report, "k-sample test completed", {"command": "k-sample", **dist.provenance()})
    return report


def _one_sample_null(args: argparse.Namespace, n: int, star: bool, ordered: bool) -> NullDistribution:
    cache = _make_cache(args)
    if args.null == "limit":
        # T_n and T_n* share the limit
        name = "Tn" if ordered else "Tn-unrestricted"
        key = null_cache_key("limit-one-sample", 1, (1.0,), args.reps, args.grid, args.seed, "none", statistic=name)
        return cache.get_or_create(key, lambda: simulate_limit_one(
            reps=args.reps, grid_size=args.grid, seed=args.seed, ordered=ordered,
            workers=args.workers, chunk_size=args.chunk_size,
        ))
    name = one_sample_statistic_name(star, ordered, args.ecdf_side)
    key = null_cache_key("finite-one-sample", 1, (1.0,), args.reps, None, args.seed, "none", (n,), statistic=name)
    return cache.get_or_create(key, lambda: simulate_null_finite_one(
        n, reps=args.reps, seed=args.seed, star=star, ordered=ordered, ecdf_side=args.ecdf_side,
        workers=args.workers, chunk_size=args.chunk_size,
    ))


def cmd_one_sample(args: argparse.Namespace) -> TestReport:
    alphas = parse_alphas(args.alphas)
    sample = read_value_csv(args.data)
    f0 = DistributionSpec.parse(args.f0)
    ordered = not args.unrestricted

    shared = dict(
        k=1,
        groups=(sample.label,),
        n_vec=(sample.n,),
        order=f"stochastically larger than {f0.describe()}" if ordered else f"different from {f0.describe()}",
        ties=sample.n - len(set(sample.values)),
    )
    statistic = one_sample_Tn(sample, f0, ordered=ordered)
    companions = ()
    if args.star:
        star_statistic = one_sample_Tn_star(sample, f0, ordered=ordered, ecdf_side=args.ecdf_side)
        star_dist = _one_sample_null(args, sample.n, True, ordered)
        companions = (_monte_carlo_report(
            "Tn*", star_statistic, star_dist, alphas, details={"ecdf_side": args.ecdf_side}, **shared,
        ),)
    dist = _one_sample_null(args, sample.n, False, ordered)
    report = _monte_carlo_report("Tn", statistic, dist, alphas, companions=companions, **shared)
    logger.info(f"one-sample Tn={statistic:.6g}, p={report.p_value:.6g}")
    _emit(args, render_test_report(report), report, "one-sample test completed", {"command": "one-sample", **dist.provenance()})
    return report


def cmd_critvals(args: argparse.Namespace) -> List[Dict[str, Any]]:
    ks = parse_k_range(args.k)
    alphas = parse_alphas(args.alphas)
    cache = _make_cache(args)

    rows: List[Dict[str, Any]] = []
    table: List[List[Any]] = []
    for k in ks:
        order = OrderSpec.parse(args.order, k)
        if args.method == "finite":
            sizes = (args.n,) * k
            weights = tuple(1.0 / k for _ in range(k))
            key = null_cache_key("finite-sample", k, weights, args.reps, None, args.seed, order.describe(), sizes)
            factory: Callable[[], NullDistribution] = lambda k=k, sizes=sizes, order=order: simulate_null_finite(
                k, sizes, order, reps=args.reps, seed=args.seed, workers=args.workers, chunk_size=args.chunk_size,
            )
        else:
            weights = tuple(1.0 / k for _ in range(k))
            key = null_cache_key("limit-k", k, weights, args.reps, args.grid, args.seed, order.describe())
            factory = lambda weights=weights, order=order: simulate_limit_k(
                weights, order, reps=args.reps, grid_size=args.grid, seed=args.seed,
                workers=args.workers, chunk_size=args.chunk_size,
            )
        dist = cache.get_or_create(key, factory)
        values = [critical_value(dist, a) for a in alphas]
        rows += [{"k": k, "alpha": a, "critical_value": v} for a, v in zip(alphas, values)]
        table.append([k] + values)

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["k", "alpha", "critical_value"])
            for row in rows:
                writer.writerow([row["k"], repr(row["alpha"]), repr(row["critical_value"])])
        logger.info(f"Wrote {len(rows)} critical values to {args.out}")

    meta = {
        "command": "critvals",
        "method": args.method,
        "order": args.order,
        "reps": args.reps,
        "seed": args.seed,
        "grid": args.grid if args.method == "limit" else None,
        "n": args.n if args.method == "finite" else None,
    }
    text = render_table(["k"] + [f"alpha={a:g}" for a in alphas], table)
    _emit(args, text, {"rows": rows}, "critical values computed", meta)
    return rows


def _power_critical_values(
    args: argparse.Namespace,
    scenario,
    crit_reps: int,
) -> Tuple[Optional[float], Optional[float]]:
    crit_tn = crit_sn = None
    if "Tn" in scenario.tests:
        crit_tn = scenario.crit_tn
        if crit_tn is None and scenario.order.kind == "simple":
            crit_tn = published_critical_value(scenario.k, scenario.alpha)
            if crit_tn is not None:
                logger.info(f"Using tabulated T_n critical value {crit_tn} for k={scenario.k}, alpha={scenario.alpha}")
        if crit_tn is None:
            n = sum(scenario.n_vec)
            args_for_null = argparse.Namespace(**{**vars(args), "null": "finite", "reps": crit_reps})
            dist = _k_sample_null(
                args_for_null, scenario.k, [s / n for s in scenario.n_vec], scenario.n_vec, scenario.order,
            )
            crit_tn = critical_value(dist, scenario.alpha)
    if "Sn" in scenario.tests:
        crit_sn = scenario.crit_sn if scenario.crit_sn is not None else sn_critical(scenario.alpha, scenario.k)
    return crit_tn, crit_sn


def cmd_power(args: argparse.Namespace) -> List[Dict[str, Any]]:
    config = load_scenarios(args.config)
    results: List[PowerResult] = []
    for scenario in config.scenarios:
        crit_tn, crit_sn = _power_critical_values(args, scenario, config.crit_reps)
        results.append(run_power(scenario, crit_tn, crit_sn, workers=args.workers, chunk_size=args.chunk_size))
    rows = power_rows(results)

    if args.out:
        fieldnames: List[str] = []
        for row in rows:
            fieldnames += [name for name in row if name not in fieldnames]
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        logger.info(f"Wrote {len(rows)} power rows to {args.out}")

    table = [
        [r.scenario, r.reps]
        + [r.rates.get(t) for t in ("Tn", "Sn")]
        + [r.standard_errors.get(t) for t in ("Tn", "Sn")]
        for r in results
    ]
    text = render_table(["scenario", "reps", "Tn", "Sn", "se(Tn)", "se(Sn)"], table)
    _emit(args, text, {"rows": rows}, "power study completed", {"command": "power", "scenarios": len(rows)})
    return rows


def cmd_survcurves(args: argparse.Namespace) -> int:
    data, default_order = read_grouped_csv(args.data, _split_groups(args.groups))
    if default_order:
        logger.warning(f"No --groups given; writing curves for {', '.join(data.labels)} in order of first occurrence")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            count = write_survival_csv(data, handle)
        logger.info(f"Wrote {count} survival coordinates to {args.out}")
    else:
        count = write_survival_csv(data, sys.stdout)
    return count


# --- Entry point ---

def build_parser() -> ElorderArgumentParser:
    logging_options = ElorderArgumentParser(add_help=False)
    logging_options.add_argument("--log-level", default=LOG_LEVEL, type=str.upper,
                                 choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level (stderr)")

    # survcurves always writes CSV, so only the report commands take --json
    common = ElorderArgumentParser(add_help=False, parents=[logging_options])
    common.add_argument("--json", action="store_true", help="Emit the JSON report envelope instead of text")

    monte_carlo = ElorderArgumentParser(add_help=False)
    monte_carlo.add_argument("--reps", type=_positive_int, default=10_000, help="Monte Carlo replications")
    monte_carlo.add_argument("--seed", type=_non_negative_int, default=DEFAULT_SEED, help="Master seed")
    monte_carlo.add_argument("--grid", type=_positive_int, default=DEFAULT_LIMIT_GRID, help="Grid size m for limit simulation")
    monte_carlo.add_argument("--workers", type=_positive_int, default=DEFAULT_WORKERS, help="Worker processes")
    monte_carlo.add_argument("--chunk-size", type=_positive_int, default=DEFAULT_CHUNK_SIZE, help="Replications per worker task")
    monte_carlo.add_argument("--cache-dir", default=CACHE_DIR, help="Directory of cached null distributions")
    monte_carlo.add_argument("--no-cache", action="store_true", help="Neither read nor write cached null distributions")

    parser = ElorderArgumentParser(
        prog="elorder",
        description="Empirical-likelihood tests for stochastic ordering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    k_sample = sub.add_parser("k-sample", parents=[common, monte_carlo], help="Test F_1 > ... > F_k")
    k_sample.add_argument("data", help="CSV with header group,value")
    k_sample.add_argument("--groups", help="Hypothesis order, largest first, e.g. A,B,C")
    k_sample.add_argument("--order", default="simple", help="simple | tree:root=1 | umbrella:peak=2 | general:1<2,... | unrestricted")
    k_sample.add_argument("--with-sn", action="store_true", help="Also run the sequential Kolmogorov-Smirnov test")
    k_sample.add_argument("--null", choices=["finite", "limit"], default="finite", help="Null distribution recipe")
    k_sample.add_argument("--alphas", default=",".join(f"{a:g}" for a in DEFAULT_ALPHAS), help="Comma-separated levels")
    k_sample.set_defaults(handler=cmd_k_sample)

    one_sample = sub.add_parser("one-sample", parents=[common, monte_carlo], help="Test F > F0")
    one_sample.add_argument("data", help="CSV with a value column")
    one_sample.add_argument("--f0", required=True, help="Hypothesized cdf, e.g. uniform:a=0,b=1 or exponential:rate=2")
    one_sample.add_argument("--star", action="store_true", help="Also report T_n*")
    one_sample.add_argument("--ecdf-side", choices=["right", "left"], default="right", help="Ecdf convention for T_n*")
    one_sample.add_argument("--unrestricted", action="store_true", help="Test F != F0 instead of F > F0")
    one_sample.add_argument("--null", choices=["limit", "finite"], default="limit", help="Null distribution recipe")
    one_sample.add_argument("--alphas", default=",".join(f"{a:g}" for a in DEFAULT_ALPHAS), help="Comma-separated levels")
    one_sample.set_defaults(handler=cmd_one_sample)

    critvals = sub.add_parser("critvals", parents=[common, monte_carlo], help="Tabulate critical values of T_n")
    critvals.add_argument("--k", default="2..5", help="Group counts: 2..5, 2,3 or 4")
    critvals.add_argument("--alphas", default=",".join(f"{a:g}" for a in DEFAULT_ALPHAS), help="Comma-separated levels")
    critvals.add_argument("--method", choices=["finite", "limit"], default="finite", help="Null distribution recipe")
    critvals.add_argument("--n", type=_positive_int, default=100, help="Observations per group (finite method)")
    critvals.add_argument("--order", default="simple", help="Order kind applied for every k")
    critvals.add_argument("--out", help="Also write the table as CSV")
    critvals.set_defaults(handler=cmd_critvals)

    power = sub.add_parser("power", parents=[common, monte_carlo], help="Run a power study")
    power.add_argument("config", help="JSON scenario file")
    power.add_argument("--out", help="Also write result rows as CSV")
    power.set_defaults(handler=cmd_power)

    survcurves = sub.add_parser("survcurves", parents=[logging_options], help="Export empirical survival curves")
    survcurves.add_argument("data", help="CSV with header group,value")
    survcurves.add_argument("--groups", help="Groups to export, in order")
    survcurves.add_argument("--out", help="Output CSV (default stdout)")
    survcurves.set_defaults(handler=cmd_survcurves)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID_ARGUMENT
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        args.handler(args)
        return EXIT_OK
    except (InputDataError, ConfigError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        code, error = EXIT_INPUT_ERROR, str(e)
    except (InvalidArgumentError, ValidationError) as e:
        logger.error(f"{args.command} rejected its arguments: {str(e)}")
        code, error = EXIT_INVALID_ARGUMENT, str(e)
    except ElorderError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        code, error = EXIT_FAILURE, str(e)

    if getattr(args, "json", False):
        print(to_json(error_report(message=f"{args.command} failed", error=error)))
    else:
        print(f"error: {error}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
