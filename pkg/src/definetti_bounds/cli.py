"""Command-line front end.

Exit codes: 0 success, 1 a bound or identity failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from . import __version__
from .arith import DEFAULT_BITS
from .bounds import BOUND_IDS, REGISTRY, BoundParams, evaluate_bound, registry_json, verify_instance
from .divergences import KL, TV_L1
from .exchangeable import DEFAULT_SEED, load_model
from .report import COLUMNS, Row, convention, extras_note, fmt_value, new_row, render, report_rows
from .suites import SCOPES, run_scope
from .urns import UrnComposition, enumerate_compositions, hypergeom_composition, multinom_composition

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_METRIC_NAMES = {"tv": TV_L1, "kl": KL}
_URN_BOUND_IDS = ("df_sampling", "freedman_upper", "freedman_lower", "exact_tv_uniform",
                  "stam", "harremoes_matus", "jgk_urn", "exact_kl_uniform", "yu_converse")
_MODEL_BOUND_IDS = ("df_general", "df_finite", "freedman_upper", "freedman_lower",
                    "exact_tv_uniform", "exact_kl_uniform", "gk_binary", "gkb_entropy",
                    "with_olly", "song", "new1", "new2", "yu_converse")


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """``"2..6"``, ``"3"``, ``"1,2,5"`` or mixtures such as ``"1..3,7"``."""
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(part))
        except ValueError:
            raise UsageError(f"malformed integer range {text!r}") from None
    return sorted(set(values))


def parse_urn(text: str) -> UrnComposition:
    try:
        counts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"malformed urn {text!r}; expected comma-separated counts like 2,2") from None
    try:
        return UrnComposition(counts)
    except ValueError as exc:
        raise UsageError(f"invalid urn {text!r}: {exc}") from None


def parse_metrics(text: str) -> list[str]:
    metrics = []
    for name in text.split(","):
        name = name.strip().lower()
        if name not in _METRIC_NAMES:
            raise UsageError(f"unknown metric {name!r} (choose tv, kl)")
        metrics.append(_METRIC_NAMES[name])
    return [m for m in (TV_L1, KL) if m in metrics]


def parse_bound_ids(text: str | None, default: Sequence[str]) -> list[str]:
    if text is None:
        return list(default)
    ids = [x.strip() for x in text.split(",") if x.strip()]
    for bid in ids:
        if bid not in REGISTRY:
            raise UsageError(f"unknown bound id {bid!r}")
    return ids


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _pmf_rows(urn: UrnComposition, k: int) -> list[Row]:
    rows = []
    for name, dist in (("pmf_H", hypergeom_composition(urn, k)), ("pmf_B", multinom_composition(urn, k))):
        for s, p in dist.probs.items():
            rows.append(new_row(subject_id=f"urn:{urn}", c=urn.c, n=urn.n, k=k, metric=name,
                                value=fmt_value(p), note="s=" + ",".join(map(str, s))))
    return rows


def _failed(rows: Sequence[Row]) -> bool:
    return any(r["pass"] == "false" for r in rows)


def cmd_sampling(args: argparse.Namespace) -> int:
    urn = parse_urn(args.urn)
    if not 1 <= args.k <= urn.n:
        raise UsageError(f"--k must satisfy 1 <= k <= n = {urn.n}, got {args.k}")
    metrics = parse_metrics(args.metric)
    ids = [b for b in parse_bound_ids(args.bounds, _URN_BOUND_IDS) if REGISTRY[b].metric in metrics]
    report = verify_instance(urn, args.k, ids, args.precision_bits)
    rows = _pmf_rows(urn, args.k) + report_rows(report, metrics)
    _emit(render(rows, args.format), args.out)
    return EXIT_FAIL if _failed(rows) else EXIT_OK


def cmd_definetti(args: argparse.Namespace) -> int:
    try:
        model = load_model(args.model)
    except OSError as exc:
        raise UsageError(f"cannot read model: {exc}") from None
    ks = parse_int_list(args.k) if args.k else list(range(1, model.n + 1))
    bad = [k for k in ks if not 1 <= k <= model.n]
    if bad or not ks:
        raise UsageError(f"--k values must lie in 1..{model.n}")
    metrics = parse_metrics(args.metric)
    ids = [b for b in parse_bound_ids(args.bounds, _MODEL_BOUND_IDS) if REGISTRY[b].metric in metrics]
    rows: list[Row] = []
    for k in ks:
        rows.extend(report_rows(verify_instance(model, k, ids, args.precision_bits), metrics))
    _emit(render(rows, args.format), args.out)
    return EXIT_FAIL if _failed(rows) else EXIT_OK


def cmd_bounds_table(args: argparse.Namespace) -> int:
    urn = parse_urn(args.urn) if args.urn else None
    try:
        params = BoundParams(c=args.c, n=args.n, k=args.k, urn=urn.counts if urn else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    subject = "params:" + ",".join(f"{name}={getattr(params, name)}" for name in ("c", "n", "k")
                                    if getattr(params, name) is not None)
    if urn:
        subject += f",urn={urn}"
    rows = []
    for bid in parse_bound_ids(args.bounds, BOUND_IDS):
        spec = REGISTRY[bid]
        result = evaluate_bound(bid, params, min_bits=args.precision_bits)
        notes = [n for n in (result.reason, extras_note(result) if result.valid else "") if n]
        rows.append(new_row(subject_id=subject, c=params.c or "", n=params.n or "", k=params.k or "",
                            metric=spec.metric, bound_id=bid, bound_value=fmt_value(result.value),
                            convention=convention(spec.metric), valid=str(result.valid).lower(),
                            error_bound=_radius_text(result.value), note=" | ".join(notes)))
    _emit(render(rows, args.format), args.out)
    return EXIT_OK


def _radius_text(value) -> str:
    radius = getattr(value, "abs_error_bound", None)
    return "" if radius is None else f"{float(radius):.15g}"


def cmd_registry(args: argparse.Namespace) -> int:
    _emit(json.dumps(registry_json(), indent=2, ensure_ascii=False) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.scope not in SCOPES:
        raise UsageError(f"unknown scope {args.scope!r} (choose from {', '.join(SCOPES)})")
    results = run_scope(args.scope, args.precision_bits)
    cfg = SCOPES[args.scope]
    out = sys.stdout
    out.write(f"# scope={args.scope} seed={cfg.seed} precision_bits={args.precision_bits}\n")
    total_failures = 0
    for res in results:
        out.write(f"[{res.name}] {res.seconds:.1f}s\n")
        for check in sorted(res.checks):
            failed = res.failed[check]
            total_failures += failed
            out.write(f"  {check:<26} {res.checks[check] - failed:>7}/{res.checks[check]:<7}"
                      f" {'FAIL' if failed else 'ok'}\n")
    for res in results:
        for failure in res.failures[: args.max_witnesses]:
            out.write("FAILURE " + json.dumps(failure, sort_keys=True) + "\n")
    out.write(f"# {'FAILED' if total_failures else 'PASSED'}: {total_failures} failing checks\n")
    return EXIT_FAIL if total_failures else EXIT_OK


def _sweep_cells(c_values, n_values, k_values, urns: str):
    """(c, n, urn or None, k) cells in deterministic lexicographic order."""
    if urns == "uniform":
        for n in n_values:
            for k in k_values:
                yield n, n, (UrnComposition((1,) * n) if n >= 1 else None), k
        return
    for c in c_values:
        for n in n_values:
            if c < 1 or n < 1:
                for k in k_values:
                    yield c, n, None, k
                continue
            for counts in enumerate_compositions(c, n):
                for k in k_values:
                    yield c, n, UrnComposition(counts), k


def _sweep_cell(task) -> list[Row]:
    c, n, urn, k, ids, metrics, bits = task
    if urn is None:
        return [new_row(c=c, n=n, k=k, note="skipped: no urn with these sizes")]
    if not 1 <= k <= urn.n:
        return [new_row(subject_id=f"urn:{urn}", c=urn.c, n=urn.n, k=k,
                        note="skipped: requires 1 <= k <= n")]
    return report_rows(verify_instance(urn, k, ids, bits), metrics)


def cmd_sweep(args: argparse.Namespace) -> int:
    c_values = parse_int_list(args.c_range)
    n_values = parse_int_list(args.n_range)
    k_values = parse_int_list(args.k_range)
    metrics = parse_metrics(args.metric)
    ids = [b for b in parse_bound_ids(args.bounds, _URN_BOUND_IDS) if REGISTRY[b].metric in metrics]
    tasks = [(*cell, ids, metrics, args.precision_bits)
             for cell in _sweep_cells(c_values, n_values, k_values, args.urns)]
    if args.jobs > 1:
        # pool.map keeps task order, so output does not depend on scheduling
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            chunks = list(pool.map(_sweep_cell, tasks, chunksize=16))
    else:
        chunks = [_sweep_cell(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    _emit(render(rows, args.format), args.out)
    return EXIT_FAIL if _failed(rows) else EXIT_OK


def _precision(text: str) -> int:
    try:
        bits = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if bits < DEFAULT_BITS:
        raise argparse.ArgumentTypeError(f"precision must be at least {DEFAULT_BITS} bits")
    return bits


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=_precision, default=argparse.SUPPRESS,
                        help=f"logarithm accuracy in bits (default {DEFAULT_BITS}, minimum {DEFAULT_BITS})")
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS,
                        help="report format (default csv)")

    parser = argparse.ArgumentParser(
        prog="definetti-bounds",
        description="Exact sampling and finite de Finetti divergences, checked against closed-form bounds.",
        epilog=f"Report columns: {', '.join(COLUMNS)}. Randomised suites use seed {DEFAULT_SEED}.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--precision-bits", type=_precision, default=DEFAULT_BITS)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sampling", parents=[common], help="H vs B for one urn")
    p.add_argument("--urn", required=True, help="comma-separated colour counts, e.g. 2,2")
    p.add_argument("--k", type=int, required=True, help="number of draws (k >= 1)")
    p.add_argument("--metric", default="tv,kl", help="tv, kl or tv,kl")
    p.add_argument("--bounds", help="comma-separated bound ids (default: all urn bounds)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sampling)

    p = sub.add_parser("definetti", parents=[common], help="de Finetti gap of a JSON model")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--k", help="k values, e.g. 2 or 1..4 or 1,3 (default: 1..n)")
    p.add_argument("--metric", default="tv,kl")
    p.add_argument("--bounds", help="comma-separated bound ids (default: all model bounds)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_definetti)

    p = sub.add_parser("bounds-table", parents=[common], help="evaluate every bound for given parameters")
    p.add_argument("--c", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--urn", help="colour counts; fixes c and n")
    p.add_argument("--bounds")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds_table)

    p = sub.add_parser("verify", parents=[common], help="run the verification grids")
    p.add_argument("--scope", default="fast", help="fast or full")
    p.add_argument("--max-witnesses", type=int, default=20)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="tabulate divergences and bounds over a grid")
    p.add_argument("--c-range", default="1..3")
    p.add_argument("--n-range", required=True)
    p.add_argument("--k-range", required=True)
    p.add_argument("--urns", choices=("all", "uniform"), default="all",
                   help="all compositions of n into c colours, or the n-distinct-colour urn")
    p.add_argument("--metric", default="tv,kl")
    p.add_argument("--bounds")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output path, '-' for stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("registry", help="bound registry as JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_registry)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
