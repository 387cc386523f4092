"""Command-line surface of the FGLSS lab.

Every subcommand writes its results to files and prints a one-line summary. Exit codes: 0 on
success, 2 on validation failures, malformed or missing inputs and invalid colorings, 3 when a
computation is refused by a cap.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .coloring import Coloring, alpha_coloring, good_fraction_curve, verify_coloring
from .config import configure_logging
from .errors import CapExceededError, LabError, format_lab_error
from .fglss import FglssGraph, build_sampled, to_dimacs
from .label_cover import (
    LabelCoverInstance,
    Labeling,
    extend,
    extend_labeling,
    gen_planted,
    gen_random,
    satisfied_fraction,
    solve_exact,
)
from .pcp import (
    VerifierConfig,
    accept_prob_exact_enum,
    accept_prob_exact_product,
    accept_prob_mc,
    random_proof_baseline,
)
from .proofs import Proof, TableProof, make_correct_proof, make_random_proof
from .reports import ARTIFACTS, ReductionParams, assemble_report, mwis_summary, run_pipeline
from .serialization import read_json, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3

# report seed when the planted pipeline runs without --seed (the tiny planted instance seed)
DEFAULT_REPORT_SEED = 7


def _fraction_text(value: Any) -> str:
    return f"{value.numerator}/{value.denominator}"


def _load_instance(path: str) -> LabelCoverInstance:
    return LabelCoverInstance.from_dict(read_json(path, "instance"))


def _load_labeling(path: str) -> Labeling:
    return Labeling.from_dict(read_json(path, "labeling"))


def _load_graph(path: str) -> FglssGraph:
    return FglssGraph.from_dict(read_json(path, "graph"))


def _require_labeling(args: argparse.Namespace) -> Labeling:
    if not args.labeling:
        raise ValueError("--labeling is required for this proof or mode")
    return _load_labeling(args.labeling)


def _build_proof(args: argparse.Namespace) -> Proof:
    """Proof named by --proof: correct, random or table:<file>."""
    if args.proof == "correct":
        return make_correct_proof(_require_labeling(args), args.alpha, args.t)
    if args.proof == "random":
        return make_random_proof(args.seed)
    if args.proof.startswith("table:"):
        path = args.proof.split(":", 1)[1]
        fallback = make_correct_proof(_load_labeling(args.labeling), args.alpha, args.t) \
            if args.labeling else None
        return TableProof.from_dict(read_json(path, "proof table"), fallback=fallback)
    raise ValueError(f"--proof must be correct, random or table:<file>, got: {args.proof}")


def cmd_gen_lc(args: argparse.Namespace) -> str:
    out = Path(args.out)
    if args.planted:
        inst, planted = gen_planted(args.u, args.v, args.labels, args.d, args.edges, args.seed)
        write_json(out / ARTIFACTS["labeling"], planted.to_dict())
    else:
        inst = gen_random(args.u, args.v, args.labels, args.d, args.edges, args.seed)
    path = write_json(out / ARTIFACTS["instance"], inst.to_dict())
    kind = "planted" if args.planted else "random"
    return (f"{kind} instance U={inst.u_count} V={inst.v_count} L={inst.L} R={inst.R} "
            f"d={inst.d} edges={len(inst.edges)} -> {path}")


def cmd_lc_value(args: argparse.Namespace) -> str:
    inst = _load_instance(args.instance)
    value, best = solve_exact(inst)
    result: dict[str, Any] = {"value": _fraction_text(value), "optimal_labeling": best.to_dict()}
    if args.labeling:
        result["labeling_satisfied"] = _fraction_text(
            satisfied_fraction(inst, _load_labeling(args.labeling))
        )
    path = write_json(args.out, result)
    return f"value {result['value']} -> {path}"


def cmd_extend(args: argparse.Namespace) -> str:
    out = Path(args.out)
    ext = extend(_load_instance(args.instance), args.t)
    path = write_json(out / ARTIFACTS["instance"], ext.to_dict())
    if args.labeling:
        extended = extend_labeling(_load_labeling(args.labeling), args.alpha, args.t)
        write_json(out / ARTIFACTS["labeling"], extended.to_dict())
    return f"extended by t={args.t}: L={ext.L} R={ext.R} -> {path}"


def cmd_accept(args: argparse.Namespace) -> str:
    inst = extend(_load_instance(args.instance), args.t)
    cfg = VerifierConfig(r=args.r, eta=args.eta, seed=args.seed or 0)
    result: dict[str, Any] = {
        "mode": args.mode,
        "proof": args.proof,
        "r": cfg.r,
        "eta": str(cfg.eta),
        "t": args.t,
        "random_baseline": _fraction_text(random_proof_baseline(cfg.r)),
    }
    if args.mode == "exact-product":
        if args.proof != "correct":
            raise ValueError("--mode exact-product applies to the correct proof only")
        labeling = _require_labeling(args)
        base = _load_instance(args.instance)
        value = accept_prob_exact_product(base, cfg, labeling, args.alpha, args.t)
        result["exact"] = _fraction_text(value)
        summary = f"exact acceptance {result['exact']}"
    elif args.mode == "exact-enum":
        value = accept_prob_exact_enum(inst, cfg, _build_proof(args))
        result["exact"] = _fraction_text(value)
        summary = f"exact acceptance {result['exact']}"
    else:
        if args.trials is None or args.seed is None:
            raise ValueError("--mode mc requires --trials and --seed")
        estimate = accept_prob_mc(inst, cfg, _build_proof(args), args.trials, args.threads)
        result.update(estimate.to_dict())
        summary = f"acceptance {estimate.estimate:.6f} ± {estimate.stderr:.6f}"
    path = write_json(args.out, result)
    return f"{summary} -> {path}"


def cmd_fglss_build(args: argparse.Namespace) -> str:
    cfg = VerifierConfig(r=args.r, eta=args.eta, seed=args.seed)
    graph = build_sampled(_load_instance(args.instance), cfg, args.queries, args.seed, t=args.t)
    path = write_json(args.out, graph.to_dict())
    if args.format == "dimacs":
        dimacs = Path(args.out).with_suffix(".dimacs")
        dimacs.write_text(to_dimacs(graph), encoding="utf-8")
        path = dimacs
    return (f"FGLSS graph: {graph.graph.number_of_nodes()} vertices, "
            f"{graph.graph.number_of_edges()} edges -> {path}")


def cmd_mwis(args: argparse.Namespace) -> str:
    summary = mwis_summary(_load_graph(args.graph))
    path = write_json(args.out, summary)
    return (f"MWIS weight {summary['weight']}, chromatic lower bound "
            f"{summary['chromatic_lower_bound']} -> {path}")


def cmd_good_fraction(args: argparse.Namespace) -> str:
    cfg = VerifierConfig(r=args.r, eta=args.eta, seed=args.seed)
    ts = args.t or [0]
    points = good_fraction_curve(
        _load_instance(args.instance), cfg, ts, args.queries, args.seed, args.satisfying_only
    )
    path = write_json(args.out, {
        "seed": args.seed,
        "r": cfg.r,
        "eta": str(cfg.eta),
        "satisfying_only": args.satisfying_only,
        "points": [p.to_dict() for p in points],
    })
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        with open(args.csv, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "palette", "not_good", "trials", "estimate", "stderr"])
            for p in points:
                writer.writerow([p.t, 2**p.t, p.not_good, p.trials,
                                 f"{p.estimate:.6f}", f"{p.stderr:.6f}"])
    curve = ", ".join(f"t={p.t}: {p.estimate:.4f}" for p in points)
    return f"not-good fraction {curve} -> {path}"


def cmd_color(args: argparse.Namespace) -> str:
    graph = _load_graph(args.graph)
    coloring = alpha_coloring(graph, _load_labeling(args.labeling))
    path = write_json(args.out, coloring.to_dict())
    return (f"palette {coloring.palette_size} of {2**graph.t}, "
            f"{len(coloring.removed)} removed -> {path}")


def cmd_verify_coloring(args: argparse.Namespace) -> str | tuple[str, int]:
    graph = _load_graph(args.graph)
    coloring = Coloring.from_dict(read_json(args.coloring, "coloring"))
    violations = verify_coloring(graph, coloring)
    if args.out:
        write_json(args.out, {"valid": not violations, "violations": violations})
    if violations:
        return f"INVALID coloring: {len(violations)} violations; first: {violations[0]}", \
            EXIT_INVALID
    return f"valid coloring with palette {coloring.palette_size}"


def cmd_report(args: argparse.Namespace) -> str:
    if args.t is None and not args.auto_t:
        raise ValueError("report needs --t or --auto-t")
    params = ReductionParams.from_r(args.r, None if args.auto_t else args.t, args.C, args.eta)
    given = {
        name: getattr(args, name)
        for name in ARTIFACTS
        if getattr(args, name, None)
    }
    if given:
        artifacts: dict[str, Any] = given
    else:
        seed = args.seed
        if seed is None:
            seed = DEFAULT_REPORT_SEED
            logger.info("report: no --seed given, running the pipeline with seed %d", seed)
        artifacts = dict(run_pipeline(params, args.artifacts_dir, seed))
    report = assemble_report(params, artifacts)
    path = write_json(args.out, report)
    gap = report["gap"]
    return (f"colors {gap['completeness_colors']} (palette {gap['measured_palette']}), "
            f"not-good {gap['measured_not_good_fraction']}, chromatic lower bound "
            f"{gap['measured_chromatic_lower_bound']}, target {gap['target_gap']} -> {path}")


def _add_verifier_args(parser: argparse.ArgumentParser, seed_required: bool = True) -> None:
    parser.add_argument(
        "--r", type=int, required=True, help="Predicate size exponent (K = 2^r - 1)"
    )
    parser.add_argument("--eta", default=None, help="Noise rate as a fraction (default 1/K^2)")
    parser.add_argument("--seed", type=int, required=seed_required, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fglss-lab",
        description="Label Cover -> Hadamard PCP -> FGLSS coloring reduction lab.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-lc", help="Generate a Label Cover instance")
    p.add_argument("--planted", action="store_true", help="Plant a satisfying labeling")
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--labels", type=int, required=True, help="Left label count L")
    p.add_argument("--d", type=int, required=True, help="Projection degree (R = d * L)")
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=".", help="Output directory")
    p.set_defaults(handler=cmd_gen_lc)

    p = sub.add_parser("lc-value", help="Exact Label Cover value")
    p.add_argument("--instance", required=True)
    p.add_argument("--labeling", default=None)
    p.add_argument("--out", default="value.json")
    p.set_defaults(handler=cmd_lc_value)

    p = sub.add_parser("extend", help="Extend labels by t bits")
    p.add_argument("--instance", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--labeling", default=None)
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--out", default="extended", help="Output directory")
    p.set_defaults(handler=cmd_extend)

    p = sub.add_parser("accept", help="Acceptance probability of a proof")
    p.add_argument("--instance", required=True)
    p.add_argument("--proof", default="correct", help="correct, random or table:<file>")
    p.add_argument("--mode", choices=["mc", "exact-enum", "exact-product"], default="mc")
    p.add_argument("--labeling", default=None)
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--threads", type=int, default=1, help="Scheduling hint only")
    p.add_argument("--out", default="acceptance.json")
    _add_verifier_args(p, seed_required=False)
    p.set_defaults(handler=cmd_accept)

    p = sub.add_parser("fglss-build", help="Sample queries and build the FGLSS graph")
    p.add_argument("--instance", required=True)
    p.add_argument("--queries", type=int, required=True)
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--format", choices=["json", "dimacs"], default="json")
    p.add_argument("--out", default="graph.json")
    _add_verifier_args(p)
    p.set_defaults(handler=cmd_fglss_build)

    p = sub.add_parser("mwis", help="Exact maximum-weight independent set")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", default="mwis.json")
    p.set_defaults(handler=cmd_mwis)

    p = sub.add_parser("good-fraction", help="Not-good query fraction per t")
    p.add_argument("--instance", required=True)
    p.add_argument("--t", type=int, action="append", help="Extension length (repeatable)")
    p.add_argument("--queries", type=int, required=True)
    p.add_argument("--satisfying-only", action="store_true")
    p.add_argument("--csv", default=None)
    p.add_argument("--out", default="good_fraction.json")
    _add_verifier_args(p)
    p.set_defaults(handler=cmd_good_fraction)

    p = sub.add_parser("color", help="Alpha-coloring from a planted labeling")
    p.add_argument("--graph", required=True)
    p.add_argument("--labeling", required=True)
    p.add_argument("--out", default="coloring.json")
    p.set_defaults(handler=cmd_color)

    p = sub.add_parser("verify-coloring", help="Check a coloring against a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--coloring", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_verify_coloring)

    p = sub.add_parser("report", help="Assemble the gap report")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--auto-t", action="store_true", help="Smallest t with 2^t >= C*K^3")
    p.add_argument("--C", type=int, default=1)
    p.add_argument("--eta", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--artifacts-dir", default="artifacts")
    for name in ARTIFACTS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None)
    p.add_argument("--out", default="report.json")
    p.set_defaults(handler=cmd_report)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    handler: Callable[[argparse.Namespace], Any] = args.handler
    try:
        outcome = handler(args)
    except CapExceededError as e:
        logger.warning("Refused %s: %s", args.command, e)
        print(json.dumps(format_lab_error(e), sort_keys=True), file=sys.stderr)
        return EXIT_CAP
    except (LabError, ValueError) as e:
        logger.warning("%s failed: %s", args.command, e)
        print(json.dumps(format_lab_error(e), sort_keys=True), file=sys.stderr)
        return EXIT_INVALID

    code = EXIT_OK
    if isinstance(outcome, tuple):
        outcome, code = outcome
    print(outcome)
    return code


def main() -> None:
    """Console entry point for ``fglss-lab``."""
    configure_logging()
    sys.exit(run())
