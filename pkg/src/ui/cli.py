"""Command-line front end: subcommands, exit codes and JSON run reports.

Why this design:
- Map the error hierarchy to exit codes in one place so core modules never exit.
- Print exactly one JSON RunReport on stdout; logs go to stderr.
- Read tolerances from settings.json and let explicit flags override them.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from ..core.cauchy import intersect_fixed_point
from ..core.diamond import diamond_membership_oracle, in_flat_diamond
from ..core.errors import ConvergenceError, InstanceFormatError, PqCausalError, PreconditionError
from ..core.lipgraph import GraphMode, GraphSamples, build_inextendible, interpolant_map, lipschitz_constant
from ..core.plateau import solve_plateau
from ..core.pqform import (
    PseudoMetric,
    classify_segment,
    classify_subspace,
    classify_vector,
    metric_leq,
)
from ..core.split import random_foliation, random_level_set, reconstruct, splitting_map, verify_splitting_bijectivity
from ..services import instances
from ..services.render import DiamondSlice, emit_csv, emit_png, emit_svg
from ..services.verification import RunReport, verify_all
from ..utils.plot_loader import PlottingUnavailableError
from ..utils.parsing import parse_points, parse_slice, parse_vector
from ..utils.settings import Settings, load_settings

LOGGER = logging.getLogger("pqcausal.cli")

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_CONVERGENCE = 3
EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    """Unknown subcommand or malformed arguments."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _metric_from_args(args: argparse.Namespace) -> PseudoMetric:
    if args.metric:
        return instances.build_metric(instances.load_instance(args.metric, "metric"))
    if args.signature:
        p, q = (int(v) for v in parse_vector(args.signature))
        return PseudoMetric.standard(p, q)
    raise PreconditionError("classify needs --metric or --signature")


def _cmd_classify(args: argparse.Namespace, settings: Settings) -> dict:
    g = _metric_from_args(args)
    tol = args.tol if args.tol is not None else settings.pqform.tol
    if args.leq:
        other = instances.build_metric(instances.load_instance(args.leq, "metric"))
        return {"metric_leq": metric_leq(g, other, tol)}
    if args.vector:
        return {"class": classify_vector(g, parse_vector(args.vector), tol).value}
    if args.segment:
        ends = parse_points(args.segment)
        if len(ends) != 2:
            raise PreconditionError("--segment needs exactly two points 'x;y'")
        return {"class": classify_segment(g, ends[0], ends[1], tol).value}
    if args.subspace:
        return {"class": classify_subspace(g, parse_points(args.subspace), tol).value}
    raise PreconditionError("classify needs one of --vector, --segment, --subspace or --leq")


def _cmd_extend(args: argparse.Namespace, settings: Settings) -> dict:
    payload = instances.load_instance(args.samples, "samples")
    samples = instances.build_samples(payload)
    tol = args.tol if args.tol is not None else settings.kirszbraun.tol
    if args.mode:
        fmap = build_inextendible(samples, GraphMode(args.mode), tol)
    else:
        if args.lipschitz is not None:
            lipschitz = args.lipschitz
        elif payload.lipschitz is not None:
            lipschitz = payload.lipschitz
        else:
            lipschitz = lipschitz_constant(samples)
        fmap = interpolant_map(samples, lipschitz, tol, settings.kirszbraun.max_iter)
    queries = parse_points(args.query)
    values = fmap.evaluate_many(queries)
    extended = GraphSamples(np.vstack([samples.sources, queries]), np.vstack([samples.targets, values]))
    if args.out:
        instances.save_instance(
            args.out, "samples", {"samples": extended.to_dict(), "lipschitz": fmap.certified_constant}
        )
    return {
        "values": values.tolist(),
        "lipschitz": fmap.certified_constant,
        "augmented_constant": lipschitz_constant(extended),
    }


def _cmd_intersect(args: argparse.Namespace, settings: Settings) -> dict:
    tol = args.tol if args.tol is not None else settings.fixed_point.tol
    f = instances.build_map(instances.load_instance(args.causal, "samples"), settings.kirszbraun.tol)
    level = instances.build_surface(instances.load_instance(args.surface, "surface"), settings.kirszbraun.tol)
    x0 = parse_vector(args.x0) if args.x0 else None
    result = intersect_fixed_point(f, level.surface, x0, tol, settings.fixed_point.max_iter)
    return result.to_dict()


def _cmd_diamond(args: argparse.Namespace, settings: Settings) -> dict:
    cfg = settings.diamond
    out: dict = {"p": args.p, "q": args.q}
    if args.point:
        pt = parse_vector(args.point)
        out["oracle"] = diamond_membership_oracle(pt, args.p, args.q, cfg.sphere_samples, rng_seed=args.seed)
        out["member"] = bool(in_flat_diamond(pt, args.p))
    geometry = DiamondSlice(args.p, args.q, parse_slice(args.slice), args.resolution or cfg.resolution, cfg.extent)
    _, _, mask = geometry.grid()
    out["slice"] = {"fixed": dict(geometry.fixed), "members": int(mask.sum()), "cells": int(mask.size)}
    if args.out:
        out["svg"] = str(emit_svg(geometry, args.out))
    if args.csv:
        out["csv"] = str(emit_csv(geometry, args.csv))
    if args.png:
        out["png"] = str(emit_png(geometry, args.png))
    return out


def _cmd_plateau(args: argparse.Namespace, settings: Settings) -> dict:
    problem = instances.build_problem(instances.load_instance(args.problem, "problem"), settings.plateau)
    result = solve_plateau(problem)
    solution = result.to_dict()
    out = {k: solution[k] for k in ("area", "iterations", "converged", "residuals", "degenerate_cells", "note")}
    if args.out:
        instances.write_atomic(args.out, instances.dump_json(solution))
        out["solution"] = args.out
    if args.svg:
        out["svg"] = str(emit_svg(result.section, args.svg))
    if args.png:
        out["png"] = str(emit_png(result.section, args.png))
    return out


def _cmd_split(args: argparse.Namespace, settings: Settings) -> dict:
    fol = instances.build_foliation(instances.load_instance(args.foliation, "foliation"), settings.kirszbraun.tol)
    level = instances.build_surface(instances.load_instance(args.surface, "surface"), settings.kirszbraun.tol)
    tol = args.tol if args.tol is not None else settings.split.tol
    pt = parse_vector(args.point)
    phi, time_value = splitting_map(fol, level, pt, tol)
    leaf = fol.leaf_id(phi)
    return {
        "phi": phi.tolist(),
        "time": time_value.tolist(),
        "leaf_id": leaf.tolist(),
        "reconstructed": reconstruct(fol, leaf, time_value).tolist(),
    }


def _cmd_verify_split(args: argparse.Namespace, settings: Settings) -> dict:
    tol = args.tol if args.tol is not None else settings.split.tol
    samples = args.samples or settings.split.samples
    if args.foliation and args.surface:
        fol = instances.build_foliation(instances.load_instance(args.foliation, "foliation"))
        level = instances.build_surface(instances.load_instance(args.surface, "surface"))
    else:
        rng = np.random.default_rng(args.seed)
        fol = random_foliation(rng, args.p, args.q, args.constant)
        level = random_level_set(rng, args.p, args.q, args.constant)
    report = verify_splitting_bijectivity(fol, level, samples, args.seed, tol)
    return report.to_dict()


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], dict]] = {
    "classify": _cmd_classify,
    "extend": _cmd_extend,
    "intersect": _cmd_intersect,
    "diamond": _cmd_diamond,
    "plateau": _cmd_plateau,
    "split": _cmd_split,
    "verify-split": _cmd_verify_split,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Seed for every random choice.")
    common.add_argument("--tol", type=float, default=None, help="Override the tolerance from settings.")
    common.add_argument("--log-level", default="WARNING", help="Logging level for stderr.")
    common.add_argument("--settings", default=None, help="Alternative settings.json path.")

    parser = _Parser(prog="pqcausal", description="Causality toolkit for flat signature (p,q) spaces.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    classify = sub.add_parser("classify", parents=[common], help="Classify vectors, segments and subspaces.")
    classify.add_argument("--metric")
    classify.add_argument("--signature", help='"p,q" for the standard metric.')
    classify.add_argument("--vector")
    classify.add_argument("--segment", help='"x;y"')
    classify.add_argument("--subspace", help='"v1;v2;..."')
    classify.add_argument("--leq", help="Compare against a second metric file (metric_leq).")

    extend = sub.add_parser("extend", parents=[common], help="Kirszbraun extension at query points.")
    extend.add_argument("--samples", required=True)
    extend.add_argument("--query", required=True, help='"x1,x2;..."')
    extend.add_argument("--lipschitz", type=float)
    extend.add_argument("--mode", choices=[m.value for m in GraphMode])
    extend.add_argument("--out", help="Write the augmented samples instance here.")

    intersect = sub.add_parser("intersect", parents=[common], help="Causal graph meets spacelike graph.")
    intersect.add_argument("--causal", required=True)
    intersect.add_argument("--surface", required=True)
    intersect.add_argument("--x0")

    diamond = sub.add_parser("diamond", parents=[common], help="Diamond membership and slice rendering.")
    diamond.add_argument("--p", type=int, required=True)
    diamond.add_argument("--q", type=int, required=True)
    diamond.add_argument("--point")
    diamond.add_argument("--slice", default="")
    diamond.add_argument("--resolution", type=int)
    diamond.add_argument("--out", help="SVG output path.")
    diamond.add_argument("--csv")
    diamond.add_argument("--png")

    plateau = sub.add_parser("plateau", parents=[common], help="Solve the discrete Plateau problem.")
    plateau.add_argument("--problem", required=True)
    plateau.add_argument("--out", help="Solution JSON path.")
    plateau.add_argument("--svg")
    plateau.add_argument("--png")

    split = sub.add_parser("split", parents=[common], help="Splitting map of one point.")
    split.add_argument("--foliation", required=True)
    split.add_argument("--surface", required=True)
    split.add_argument("--point", required=True)

    verify_split = sub.add_parser("verify-split", parents=[common], help="Round-trip check of the splitting map.")
    verify_split.add_argument("--samples", type=int)
    verify_split.add_argument("--foliation")
    verify_split.add_argument("--surface")
    verify_split.add_argument("--p", type=int, default=2)
    verify_split.add_argument("--q", type=int, default=2)
    verify_split.add_argument("--constant", type=float, default=0.9)

    verify = sub.add_parser("verify-all", parents=[common], help="Run every invariant suite.")
    verify.add_argument("--full", action="store_true", help="Use the full acceptance counts.")
    return parser


def _emit(report: RunReport) -> None:
    sys.stdout.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    sys.stdout.flush()


def dispatch(argv: Optional[Sequence[str]] = None, configure: Optional[Callable[[str], None]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"pqcausal: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if configure is not None:
        configure(args.log_level)
    settings = load_settings(args.settings)
    report = RunReport(command=argv, seed=args.seed)
    started = time.perf_counter()
    code = EXIT_OK
    try:
        if args.command == "verify-all":
            report = verify_all(args.seed, args.full, argv)
            code = EXIT_OK if report.ok else 1
        else:
            report.result = COMMANDS[args.command](args, settings)
            if "ok" in report.result:
                report.checks = {args.command: bool(report.result["ok"])}
            code = EXIT_OK if report.ok else 1
    except InstanceFormatError as exc:
        report.error, code = str(exc), EXIT_DATA
    except PreconditionError as exc:
        report.error, code = str(exc), EXIT_PRECONDITION
    except ConvergenceError as exc:
        report.error, code = str(exc), EXIT_CONVERGENCE
    except PqCausalError as exc:
        LOGGER.exception("command-failed", extra={"command": args.command})
        report.error, code = str(exc), EXIT_PRECONDITION
    except PlottingUnavailableError as exc:
        report.error, code = str(exc), EXIT_PRECONDITION
    except OSError as exc:
        report.error, code = str(exc), EXIT_DATA
    if args.command != "verify-all":
        report.wall_time = time.perf_counter() - started
    if code not in (EXIT_OK, 1):
        LOGGER.warning("command-error", extra={"command": args.command, "exit": code, "error": report.error})
    _emit(report)
    return code


__all__ = ["dispatch", "build_parser", "EXIT_OK", "EXIT_PRECONDITION", "EXIT_CONVERGENCE", "EXIT_USAGE", "EXIT_DATA"]
