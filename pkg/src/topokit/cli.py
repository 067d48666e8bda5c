"""Command line front end: ``topokit <ph|lpvi|persloss|optimize> [flags]``.

Exit codes: 0 success, 2 unreadable input or bad flags, 3 degenerate
geometry, 4 LPVI precondition, 5 image mismatch, 6 verification failure.
"""
import argparse
import logging
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import formats, svg
from .exceptions import (CloudTooSmall, DegenerateInput, DegenerateSimplex, DimensionMismatch,
                         ImageTooSmall, KTooLarge, NonFiniteLoss, ParseError, RankDeficient)
from .lpvi import LpviConfig, lpvi
from .optimizer import (OptimizerConfig, estimate_constants, optimize, verify_lemma2,
                        verify_lemma3)
from .persistence import alpha_persistence
from .persloss import persloss_gradient

EXIT_OK, EXIT_PARSE, EXIT_GEOMETRY, EXIT_LPVI, EXIT_IMAGE, EXIT_VERIFY = 0, 2, 3, 4, 5, 6

log = logging.getLogger("topokit")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def cmd_ph(args):
    X = formats.read_cloud(args.cloud)
    try:
        diagram = alpha_persistence(X, strict=args.strict)
    except (DegenerateInput, DegenerateSimplex) as exc:
        raise CliError(EXIT_GEOMETRY, f"degenerate geometry: {exc}") from exc
    text = formats.diagram_csv(diagram)
    if args.out:
        formats.write_diagram_csv(args.out, diagram)
    else:
        sys.stdout.write(text)
    if args.svg:
        svg.write_svg(args.svg, svg.diagram_svg(diagram, title=os.path.basename(args.cloud)))
    return EXIT_OK


def cmd_lpvi(args):
    X = formats.read_cloud(args.cloud)
    if X.shape[1] != 3:
        raise CliError(EXIT_PARSE, f"{args.cloud}: LPVI needs 3D points")
    try:
        cfg = LpviConfig(K=args.k, K_prime=args.k_prime, tau=args.tau)
    except ValueError as exc:
        raise CliError(EXIT_LPVI, str(exc)) from exc
    try:
        out, report = lpvi(X, cfg)
    except (CloudTooSmall, KTooLarge) as exc:
        raise CliError(EXIT_LPVI, str(exc)) from exc
    flags = np.r_[np.zeros(len(X), int), np.ones(len(out) - len(X), int)]
    formats.write_xyz(args.out, out, flags)
    summary = [("processed", report.processed), ("accepted_3d", report.accepted_3d),
               ("fallback_2d", report.fallback_2d), ("skipped", report.skipped),
               ("points_added", report.points_added)]
    lines = ["metric,value"] + [f"{k},{v}" for k, v in summary]
    with open(args.report, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if args.neighborhoods:
        rows = ["center,branch,n_neighbors,n_added,topo_diff"]
        for nb in report.neighborhoods:
            td = "" if nb.topo_diff is None else formats.fmt(nb.topo_diff)
            rows.append(f"{nb.center},{nb.branch},{len(nb.neighbors)},{len(nb.added)},{td}")
        with open(args.neighborhoods, "w") as fh:
            fh.write("\n".join(rows) + "\n")
    print(f"lpvi: {report.points_added} points added "
          f"({report.accepted_3d} 3d, {report.fallback_2d} 2d, {report.skipped} skipped)")
    return EXIT_OK


def cmd_persloss(args):
    rendered, gt = formats.read_ppm(args.rendered), formats.read_ppm(args.gt)
    k = (args.k0, args.k1, args.k2)
    try:
        value, grad = persloss_gradient(rendered, gt, k, max_points=args.max_points)
    except (DimensionMismatch, ImageTooSmall) as exc:
        raise CliError(EXIT_IMAGE, str(exc)) from exc
    result = {"total": value.total, "per_dim_terms": list(value.per_dim_terms),
              "weights": list(value.weights), "k": list(k)}
    formats.write_json(args.out, result)
    if args.gradient:
        formats.write_grid_csv(args.gradient, grad.d_pixels)
    print(f"persloss: total {formats.fmt(value.total)}")
    return EXIT_OK


def _eta(text):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--eta takes a positive number or 'auto'") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("--eta must be positive")
    return value


def cmd_optimize(args):
    problem, W0 = formats.read_problem(args.problem)
    if W0 is None and args.seed is not None:
        W0 = np.random.default_rng(args.seed).random(problem.n_vertices)
    try:
        cfg = OptimizerConfig(lambda_topo=args.lambda_topo, epsilon=args.epsilon, eta=args.eta,
                              max_iters=args.max_iters, persloss_period=args.persloss_period)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    try:
        result = optimize(problem, cfg, W0)
        trace = result.trace
    except NonFiniteLoss as exc:
        if exc.trace is not None:
            _write_trace(args, exc.trace)
        raise CliError(EXIT_VERIFY, str(exc)) from exc
    _write_trace(args, trace)
    consts = estimate_constants(problem, cfg.lambda_topo)
    ok2, ok3 = all(verify_lemma2(trace)), all(verify_lemma3(trace, consts))
    print(f"optimize: {result.stop_reason} at t={result.stop_index} "
          f"(bound {consts.iteration_bound(cfg.epsilon)}), eta={formats.fmt(result.eta)}, "
          f"lemma2={'ok' if ok2 else 'FAIL'}, lemma3={'ok' if ok3 else 'FAIL'}")
    if not (ok2 and ok3):
        raise CliError(EXIT_VERIFY, "lemma check failed; trace written")
    return EXIT_OK


def _write_trace(args, trace):
    with open(args.trace, "w") as fh:
        fh.write(trace.to_csv())
    if args.svg:
        svg.write_svg(args.svg, svg.trace_svg(trace))


def build_parser():
    p = argparse.ArgumentParser(prog="topokit", allow_abbrev=False,
                                description="Persistent homology tools for point clouds and images.")
    p.add_argument("--verbose", action="store_true", help="log progress to standard error")
    sub = p.add_subparsers(dest="command", required=True)

    ph = sub.add_parser("ph", allow_abbrev=False, help="alpha persistence diagram of a cloud")
    ph.add_argument("cloud", help="XYZ or ASCII PLY file")
    ph.add_argument("--out", help="diagram CSV (default: standard output)")
    ph.add_argument("--svg", help="persistence diagram plot")
    ph.add_argument("--strict", action="store_true",
                    help="fail on clouds that do not span their ambient space")
    ph.set_defaults(func=cmd_ph)

    lp = sub.add_parser("lpvi", allow_abbrev=False, help="densify a 3D cloud")
    lp.add_argument("cloud")
    lp.add_argument("--out", required=True, help="augmented XYZ; 4th column flags added points")
    lp.add_argument("--report", required=True, help="summary CSV")
    lp.add_argument("--neighborhoods", help="per-neighborhood CSV")
    lp.add_argument("--k", type=int, default=16)
    lp.add_argument("--k-prime", type=int, default=8)
    lp.add_argument("--tau", type=float, default=0.5)
    lp.set_defaults(func=cmd_lpvi)

    pl = sub.add_parser("persloss", allow_abbrev=False, help="topological loss between two images")
    pl.add_argument("rendered", help="PPM (P3)")
    pl.add_argument("gt", help="PPM (P3)")
    pl.add_argument("--out", required=True, help="JSON result")
    pl.add_argument("--gradient", help="gradient as CSV, one row per image row")
    pl.add_argument("--k0", type=int, default=3)
    pl.add_argument("--k1", type=int, default=2)
    pl.add_argument("--k2", type=int, default=1)
    pl.add_argument("--max-points", type=int, default=1024)
    pl.set_defaults(func=cmd_persloss)

    op = sub.add_parser("optimize", allow_abbrev=False, help="topology-aware descent on a toy problem")
    op.add_argument("problem", help="problem JSON")
    op.add_argument("--trace", required=True, help="trace CSV")
    op.add_argument("--svg", help="trace plot")
    op.add_argument("--lambda", dest="lambda_topo", type=float, default=1.0)
    op.add_argument("--epsilon", type=float, default=0.01)
    op.add_argument("--eta", type=_eta, default="auto")
    op.add_argument("--max-iters", type=int, default=10000)
    op.add_argument("--persloss-period", type=int, default=OptimizerConfig.persloss_period)
    op.add_argument("--seed", type=int, help="random initial values when the problem has none")
    op.set_defaults(func=cmd_optimize)
    return p


def _threads():
    raw = os.environ.get("TOPOKIT_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise CliError(EXIT_PARSE, f"TOPOKIT_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise CliError(EXIT_PARSE, "TOPOKIT_THREADS must be >= 1")
    return n


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with threadpool_limits(limits=_threads()):
            return args.func(args)
    except CliError as exc:
        print(f"topokit: error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"topokit: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RankDeficient as exc:
        print(f"topokit: error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except OSError as exc:
        print(f"topokit: error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
