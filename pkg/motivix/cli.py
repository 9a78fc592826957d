"""Command-line front end.

    python -m motivix decide models/c6.json --mode prooftrace
    python -m motivix conv-table models/g2-lattice.json
    python -m motivix motive product --g 10
    python -m motivix fermat degrees
    python -m motivix av exponents models/g3-lattice.json

Exit codes: 0 success or INDECOMPOSABLE, 2 SURVIVING_CANDIDATE or UNDECIDED,
3 when the exponent hypothesis fails, 1 on any other error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

from motivix import __version__, config
from motivix.cmlat import (
    AbelianModel,
    ModelFile,
    exponent,
    exponent_by_scan,
    is_integral,
    liverpool_check,
    matrix_from_json,
    model_from_file_data,
    proper_subsets,
    read_model_file,
    subset_exponent_floor,
)
from motivix.corr import build_grids, conv_table
from motivix.decomp import DecisionMode, Status, TraceLevel, decide, probes_for
from motivix.errors import HypothesisError, InvalidInput, MotivixError, UnsupportedQuery
from motivix.report import Report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2


# ---- commands shared with the HTTP front end ----


def run_decide(
    data: ModelFile, mode: str = "prooftrace", trace: str = "steps", threads: int | None = None
) -> tuple[Report, int]:
    model = model_from_file_data(data)
    verdict = decide(model, DecisionMode(mode), threads=threads)
    report = Report(
        "decide",
        {"model": data.model_dump(mode="json"), "mode": mode},
        verdict.to_json(TraceLevel(trace)),
        __version__,
    )
    return report, EXIT_OK if verdict.status is Status.INDECOMPOSABLE else EXIT_UNDECIDED


def run_conv_table(data: ModelFile) -> Report:
    model = model_from_file_data(data)
    probes = probes_for(model)
    rows = conv_table(build_grids(model), [(p.label, p.endo) for p in probes])
    return Report(
        "conv-table",
        {"model": data.model_dump(mode="json")},
        {"probes": [p.to_json() for p in probes], "rows": rows},
        __version__,
    )


def run_motive(kind: str, params: dict[str, Any]) -> Report:
    from motivix import motcalc

    builders: dict[str, Callable[..., Any]] = {
        "curve": lambda g: motcalc.ck_curve(g),
        "surface": lambda b2, rho, q=0: motcalc.ck_surface(b2, rho, q),
        "product": lambda g: motcalc.product_of_curves(g),
        "elliptic-curve": lambda g: motcalc.elliptic_times_curve(g),
        "hypersurface": lambda n, d: {
            "motive": motcalc.hypersurface_motive(n, d).to_json(),
            "projectors": motcalc.hypersurface_ck(n, d).to_json(),
        },
        "blowup": lambda centers, ambient_dim=4: motcalc.blowup_increments(centers, ambient_dim),
        "cubic-ledger": lambda surfaces, curves=(), points=0: motcalc.cubic_rationality_ledger(
            surfaces, curves, points
        ),
    }
    if kind not in builders:
        raise InvalidInput(f"unknown motive kind {kind!r}; expected one of {sorted(builders)}")
    try:
        result = builders[kind](**params)
    except TypeError as exc:
        raise InvalidInput(f"bad parameters for motive {kind}: {exc}") from exc
    if hasattr(result, "dims"):
        result = {"expr": str(result), "motive": result.to_json(), "weights": motcalc.weight_table(result)}
    return Report("motive", {"kind": kind, **params}, result, __version__)


def _subset(raw: Sequence[int], model: AbelianModel) -> frozenset[int]:
    indices = frozenset(int(k) - 1 for k in raw)
    if not all(0 <= k < model.g for k in indices):
        raise InvalidInput(f"subset {list(raw)} is not inside I = {{1..{model.g}}}")
    return indices


def run_av(query: str, data: ModelFile, params: dict[str, Any]) -> Report:
    model = model_from_file_data(data)
    if query == "exponents":
        rows = []
        for K in proper_subsets(model.g):
            row: dict[str, Any] = {"K": [k + 1 for k in sorted(K)]}
            try:
                row["n_K"] = exponent(model, K)
            except UnsupportedQuery:
                row["n_K"] = None
            if params.get("scan") and model.lattice is not None:
                row["scan"] = exponent_by_scan(model, K)
            rows.append(row)
        result: Any = {"exponents": rows, "floor": subset_exponent_floor(model), "atoms": list(model.atom_exponents)}
    elif query == "integral":
        matrix = matrix_from_json(params.get("matrix") or [], model.d)
        try:
            result = {"integral": is_integral(model, matrix)}
        except UnsupportedQuery as exc:
            result = {"integral": None, "reason": str(exc)}
    elif query == "liverpool":
        A, B = _subset(params.get("A", []), model), _subset(params.get("B", []), model)
        result = {"outcome": liverpool_check(model, A, B).value}
    else:
        raise InvalidInput(f"unknown query {query!r}; expected exponents, integral or liverpool")
    return Report("av", {"query": query, "model": data.model_dump(mode="json"), **params}, result, __version__)


def run_fermat(
    subcommand: str,
    phi: int = 1,
    morphism: dict | None = None,
    decide_instance: bool = False,
    threads: int | None = None,
) -> tuple[Report, int]:
    from motivix import fermat

    exit_code = EXIT_OK
    if subcommand == "pullback":
        target = fermat.morphism_from_json(morphism) if morphism else fermat.PHIS.get(phi)
        if target is None:
            raise InvalidInput(f"phi must be 1, 2 or 3, got {phi}")
        result: Any = {"morphism": target.to_json(), **fermat.pullback(target).to_json()}
        inputs: dict[str, Any] = {"morphism": morphism} if morphism else {"phi": phi}
    elif subcommand == "degrees":
        morphisms = fermat.c6_morphisms()
        result = {"morphisms": [m.name for m in morphisms], "degrees": fermat.c6_degrees(threads=threads)}
        inputs = {}
    elif subcommand == "instance":
        instance = fermat.build_c6_instance(threads=threads)
        result = instance.to_json()
        if decide_instance:
            verdict = decide(instance.model, DecisionMode.PROOFTRACE)
            result["verdict"] = verdict.to_json(TraceLevel.STEPS)
            exit_code = EXIT_OK if verdict.status is Status.INDECOMPOSABLE else EXIT_UNDECIDED
        inputs = {"decide": decide_instance}
    else:
        raise InvalidInput(f"unknown fermat subcommand {subcommand!r}")
    return Report("fermat " + subcommand, inputs, result, __version__), exit_code


# ---- argument parsing ----


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from exc


def _surface(text: str) -> list[int]:
    parts = _int_list(text.replace(":", ","))
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"a surface is b2:rho[:q], got {text!r}")
    return parts + [0] * (3 - len(parts))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    common.add_argument("--trace", choices=[level.value for level in TraceLevel], default="steps")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default MOTIVIX_THREADS)")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    common.add_argument("--log-level", default=None, help="logging level (default MOTIVIX_LOG_LEVEL)")

    parser = argparse.ArgumentParser(prog="motivix", description="Exact correspondence calculus on C x C")
    parser.add_argument("--version", action="version", version=f"motivix {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("decide", parents=[common], help="decide essential indecomposability")
    p.add_argument("model", type=Path)
    p.add_argument("--mode", choices=[mode.value for mode in DecisionMode], default="prooftrace")

    p = commands.add_parser("conv-table", parents=[common], help="convolution values of every grid cell")
    p.add_argument("model", type=Path)

    motive = commands.add_parser("motive", help="Chow-Kunneth dimension tables").add_subparsers(
        dest="kind", required=True
    )
    p = motive.add_parser("curve", parents=[common])
    p.add_argument("--g", type=int, required=True)
    p = motive.add_parser("surface", parents=[common])
    p.add_argument("--b2", type=int, required=True)
    p.add_argument("--rho", type=int, required=True)
    p.add_argument("--q", type=int, default=0)
    p = motive.add_parser("product", parents=[common])
    p.add_argument("--g", type=int, required=True)
    p = motive.add_parser("elliptic-curve", parents=[common], help="E x C with J(C) isogenous to E^g")
    p.add_argument("--g", type=int, required=True)
    p = motive.add_parser("hypersurface", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p = motive.add_parser("blowup", parents=[common])
    p.add_argument("--points", type=int, default=0)
    p.add_argument("--curves", type=_int_list, default=[], help="genera, comma separated")
    p.add_argument("--surface", type=_surface, action="append", default=[], help="b2:rho[:q]")
    p.add_argument("--ambient", type=int, default=4)
    p = motive.add_parser("cubic-ledger", parents=[common])
    p.add_argument("--surface", type=_surface, action="append", default=[], help="b2:rho[:q]")
    p.add_argument("--curves", type=_int_list, default=[])
    p.add_argument("--points", type=int, default=0)

    fermat = commands.add_parser("fermat", help="the Fermat sextic instance").add_subparsers(
        dest="subcommand", required=True
    )
    p = fermat.add_parser("pullback", parents=[common])
    p.add_argument("--phi", type=int, default=1, choices=[1, 2, 3])
    p.add_argument("--morphism", type=Path, help="JSON morphism description instead of --phi")
    fermat.add_parser("degrees", parents=[common])
    p = fermat.add_parser("instance", parents=[common])
    p.add_argument("--decide", action="store_true")

    av = commands.add_parser("av", help="exponent and integrality queries").add_subparsers(dest="query", required=True)
    p = av.add_parser("exponents", parents=[common])
    p.add_argument("model", type=Path)
    p.add_argument("--scan", action="store_true", help="cross-check against the scanning definition")
    p = av.add_parser("integral", parents=[common])
    p.add_argument("model", type=Path)
    p.add_argument("--matrix", required=True, help="JSON rows, inline or @file")
    p = av.add_parser("liverpool", parents=[common])
    p.add_argument("model", type=Path)
    p.add_argument("--A", type=_int_list, default=[], help="1-based indices")
    p.add_argument("--B", type=_int_list, default=[], help="1-based indices")
    return parser


def _read_json_argument(raw: str) -> Any:
    try:
        text = Path(raw[1:]).read_text(encoding="utf-8") if raw.startswith("@") else raw
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read JSON from {raw!r}: {exc}") from exc


def _blowup_centers(args: argparse.Namespace) -> list[Any]:
    centers: list[Any] = ["point"] * args.points
    centers += [{"kind": "curve", "genus": g} for g in args.curves]
    centers += [{"kind": "surface", "b2": b2, "rho": rho, "q": q} for b2, rho, q in args.surface]
    return centers


def dispatch(args: argparse.Namespace) -> tuple[Report, int]:
    if args.command == "decide":
        return run_decide(read_model_file(args.model), args.mode, args.trace, args.threads)
    if args.command == "conv-table":
        return run_conv_table(read_model_file(args.model)), EXIT_OK
    if args.command == "motive":
        params: dict[str, Any] = {
            "curve": lambda: {"g": args.g},
            "surface": lambda: {"b2": args.b2, "rho": args.rho, "q": args.q},
            "product": lambda: {"g": args.g},
            "elliptic-curve": lambda: {"g": args.g},
            "hypersurface": lambda: {"n": args.n, "d": args.d},
            "blowup": lambda: {"centers": _blowup_centers(args), "ambient_dim": args.ambient},
            "cubic-ledger": lambda: {"surfaces": args.surface, "curves": args.curves, "points": args.points},
        }[args.kind]()
        return run_motive(args.kind, params), EXIT_OK
    if args.command == "fermat":
        morphism = _read_json_argument("@" + str(args.morphism)) if getattr(args, "morphism", None) else None
        return run_fermat(args.subcommand, getattr(args, "phi", 1), morphism, getattr(args, "decide", False), args.threads)
    params = {}
    if args.query == "exponents":
        params["scan"] = args.scan
    elif args.query == "integral":
        params["matrix"] = _read_json_argument(args.matrix)
    elif args.query == "liverpool":
        params.update(A=args.A, B=args.B)
    return run_av(args.query, read_model_file(args.model), params), EXIT_OK


def summarize(report: Report) -> str:
    """One human-readable block per command."""
    results = report.to_json()["results"]
    lines = [f"motivix {report.version} {report.command}"]
    if report.command == "decide":
        lines.append(f"status: {results['status']} ({results['mode']})")
        lines += [
            f"  [{step['rule']}]{' ' + step['probe'] if step['probe'] else ''}: {step['outcome']}"
            + (f" ({step['note']})" if step["note"] else "")
            for step in results["steps"]
        ]
    elif report.command == "conv-table":
        for row in results["rows"]:
            cells = "; ".join(
                f"{entry['entry'][0][0]}/{entry['entry'][0][1]}"
                + (f" + {entry['entry'][1][0]}/{entry['entry'][1][1]} sqrt(-d)" if entry["entry"][1][0] else "")
                + f" E{entry['row']}{entry['col']}"
                for entry in row["value"]
            )
            lines.append(f"  {row['probe']:>8} {row['grid']:>5} ({row['cell'][0]},{row['cell'][1]}): {cells or '0'}")
    else:
        lines.append(json.dumps(results, sort_keys=True, indent=2, ensure_ascii=False))
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config.configure_logging(args.log_level)
    started = time.perf_counter()
    try:
        report, exit_code = dispatch(args)
    except HypothesisError as exc:
        print(f"error: hypothesis not satisfied: {exc}", file=sys.stderr)
        return exc.exit_code
    except MotivixError as exc:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code

    if args.timing:
        report.timing = time.perf_counter() - started
    if args.json == "-":
        sys.stdout.write(report.dumps())
    else:
        print(summarize(report))
        if args.json:
            Path(args.json).write_text(report.dumps(), encoding="utf-8")
    return exit_code
