"""Reduction parameter ledger, the planted pipeline and report assembly.

The soundness-side parameters delta, sigma and the coloring constant C have no known numeric
values; they are carried as symbolic relations and never instantiated.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .coloring import (
    Coloring,
    alpha_coloring,
    good_fraction_curve,
    verify_coloring,
)
from .errors import LabInputError
from .fglss import FglssGraph, build_sampled
from .label_cover import (
    LabelCoverInstance,
    Labeling,
    gen_planted,
    satisfied_fraction,
    validate,
    value_exact,
)
from .mwis import mwis_exact
from .pcp import (
    VerifierConfig,
    accept_prob_exact_product,
    accept_prob_mc,
    random_proof_baseline,
)
from .proofs import make_correct_proof, make_random_proof
from .serialization import read_json, write_json
from .validation import validate_eta, validate_non_negative_int, validate_positive_int, validate_r

logger = logging.getLogger(__name__)

DELTA_EXPR = "delta = poly(K/eta) * sigma^Omega(1)"
SIGMA_EXPR = "sigma = (delta / poly(K/eta))^o(1), delta = 2^-Omega(K)"
TARGET_GAP = "K^3 versus 2^K"
SOUNDNESS_EXPR = "accept > (K+1)/2^K + 2*delta  =>  Label Cover value >= sigma"
NOT_GOOD_EXPR = "not-good weighted fraction <= L^O(K) * K * exp(-O(2^t/K)) = exp(-O(K))"

# Artifact file names written by the pipeline
ARTIFACTS = {
    "instance": "instance.json",
    "labeling": "labeling.json",
    "acceptance_correct": "acceptance_correct.json",
    "acceptance_random": "acceptance_random.json",
    "graph": "graph.json",
    "mwis": "mwis.json",
    "coloring": "coloring.json",
    "good_fraction": "good_fraction.json",
}


def auto_t(K: int, C: int = 1) -> int:
    """Smallest t with 2^t >= C * K^3."""
    target = C * K**3
    t = 0
    while 2**t < target:
        t += 1
    return t


@dataclass(frozen=True)
class ReductionParams:
    r: int
    K: int
    eta: Fraction
    t: int
    C: int
    t_is_auto: bool
    delta_expr: str = DELTA_EXPR
    sigma_expr: str = SIGMA_EXPR

    @classmethod
    def from_r(
        cls, r: int, t: int | None = None, C: int = 1, eta: Any = None
    ) -> "ReductionParams":
        """Parameters for K = 2^r - 1; t defaults to the smallest with 2^t >= C*K^3."""
        r = validate_r(r)
        K = 2**r - 1
        C = validate_positive_int(C, "C")
        eta_value = Fraction(1, K * K) if eta is None else validate_eta(eta)
        if t is None:
            return cls(r, K, eta_value, auto_t(K, C), C, True)
        return cls(r, K, eta_value, validate_non_negative_int(t, "t"), C, False)

    def ledger(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "K": self.K,
            "eta": str(self.eta),
            "t": self.t,
            "palette_2^t": 2**self.t,
            "C": self.C,
            "t_rule": "smallest t with 2^t >= C*K^3 (default C=1, not the large constant)"
            if self.t_is_auto else "given",
            "delta": {"expr": self.delta_expr, "symbolic": True},
            "sigma": {"expr": self.sigma_expr, "symbolic": True},
            "soundness": {"expr": SOUNDNESS_EXPR, "symbolic": True},
            "not_good_bound": {"expr": NOT_GOOD_EXPR, "symbolic": True},
            "completeness_bound": str(1 - self.K**2 * self.eta),
            "random_baseline": str(random_proof_baseline(self.r)),
            "target_gap": TARGET_GAP,
        }


@dataclass(frozen=True)
class PipelineSizes:
    """Default sizes of the planted pipeline (the tiny planted instance)."""

    u_count: int = 2
    v_count: int = 3
    labels: int = 2
    d: int = 2
    edges: int = 4
    trials: int = 20000
    queries: int = 8
    good_queries: int = 64


def _fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def run_pipeline(
    params: ReductionParams, out_dir: str | Path, seed: int, sizes: PipelineSizes | None = None
) -> dict[str, Path]:
    """Run the planted pipeline and write every artifact under ``out_dir``.

    Returns:
        dict: artifact name -> written path
    """
    sizes = sizes or PipelineSizes()
    out = Path(out_dir)
    paths = {name: out / filename for name, filename in ARTIFACTS.items()}
    cfg = VerifierConfig(r=params.r, eta=params.eta, seed=seed)

    inst, planted = gen_planted(
        sizes.u_count, sizes.v_count, sizes.labels, sizes.d, sizes.edges, seed
    )
    write_json(paths["instance"], inst.to_dict())
    write_json(paths["labeling"], planted.to_dict())

    correct = accept_prob_mc(inst, cfg, make_correct_proof(planted), sizes.trials)
    random_ = accept_prob_mc(inst, cfg, make_random_proof(seed), sizes.trials)
    write_json(paths["acceptance_correct"], {
        **correct.to_dict(),
        "proof": "correct",
        "exact_product": _fraction_text(accept_prob_exact_product(inst, cfg, planted)),
    })
    write_json(paths["acceptance_random"], {**random_.to_dict(), "proof": "random"})

    # keep the graph within the exact MWIS range
    queries = max(1, min(sizes.queries, 60 // (params.K + 1)))
    graph = build_sampled(inst, cfg, queries, seed, t=params.t)
    write_json(paths["graph"], graph.to_dict())
    write_json(paths["mwis"], mwis_summary(graph))
    write_json(paths["coloring"], alpha_coloring(graph, planted).to_dict())

    ts = sorted({max(0, params.t - 2), max(0, params.t - 1), params.t})
    curve = good_fraction_curve(inst, cfg, ts, sizes.good_queries, seed)
    write_json(paths["good_fraction"], {
        "seed": seed,
        "r": params.r,
        "eta": str(params.eta),
        "points": [point.to_dict() for point in curve],
    })
    logger.info("Pipeline artifacts written to %s", out)
    return paths


def mwis_summary(graph: FglssGraph) -> dict[str, Any]:
    weight, independent = mwis_exact(graph)
    total = graph.total_weight
    return {
        "weight": _fraction_text(weight),
        "vertices": sorted(v + 1 for v in independent.vertices),
        "total_weight": _fraction_text(total),
        "chromatic_lower_bound": _fraction_text(total / weight),
    }


def assemble_report(params: ReductionParams, artifacts: dict[str, str | Path]) -> dict[str, Any]:
    """Aggregate a report from artifact files alone.

    Required artifacts: instance, graph, mwis, coloring. Optional: labeling,
    acceptance_correct, acceptance_random, good_fraction.

    Raises:
        MissingArtifactError: If a referenced file does not exist
        LabInputError: If a required artifact is not referenced at all
    """
    for name in ("instance", "graph", "mwis", "coloring"):
        if name not in artifacts:
            raise LabInputError(f"report requires the '{name}' artifact")
    loaded = {name: read_json(path, name) for name, path in artifacts.items()}

    inst = LabelCoverInstance.from_dict(loaded["instance"])
    graph = FglssGraph.from_dict(loaded["graph"])
    coloring = Coloring.from_dict(loaded["coloring"])
    mwis = loaded["mwis"]
    if graph.cfg.r != params.r or graph.t != params.t:
        raise LabInputError(
            f"graph was built with r={graph.cfg.r}, t={graph.t}; report asked for "
            f"r={params.r}, t={params.t}"
        )

    instance_section: dict[str, Any] = {
        "u_count": inst.u_count,
        "v_count": inst.v_count,
        "L": inst.L,
        "R": inst.R,
        "d": inst.d,
        "edges": len(inst.edges),
        "violations": validate(inst),
    }
    try:
        instance_section["value_exact"] = _fraction_text(value_exact(inst))
    except Exception as e:  # pylint: disable=broad-exception-caught
        instance_section["value_exact"] = None
        instance_section["value_exact_refused"] = str(e)
    if "labeling" in loaded:
        labeling = Labeling.from_dict(loaded["labeling"])
        instance_section["labeling_satisfied"] = _fraction_text(satisfied_fraction(inst, labeling))

    acceptance: dict[str, Any] = {
        "random_baseline": float(random_proof_baseline(params.r)),
        "completeness_bound": float(1 - params.K**2 * params.eta),
    }
    for name in ("acceptance_correct", "acceptance_random"):
        if name in loaded:
            acceptance[name.split("_", 1)[1]] = loaded[name]

    violations = verify_coloring(graph, coloring)
    report: dict[str, Any] = {
        "params": params.ledger(),
        "instance": instance_section,
        "acceptance": acceptance,
        "fglss": {
            "queries": len(graph.queries),
            "vertices": graph.graph.number_of_nodes(),
            "edges": graph.graph.number_of_edges(),
            "total_weight": _fraction_text(graph.total_weight),
        },
        "mwis": mwis,
        "coloring": {
            "palette_size": coloring.palette_size,
            "palette_bound": 2**params.t,
            "removed": len(coloring.removed),
            "violations": violations,
        },
    }
    not_good = None
    if "good_fraction" in loaded:
        points = loaded["good_fraction"]["points"]
        report["good_fraction"] = points
        not_good = next((p["not_good_estimate"] for p in points if p["t"] == params.t), None)

    report["gap"] = {
        "completeness_colors": 2**params.t,
        "measured_palette": coloring.palette_size,
        "measured_not_good_fraction": not_good,
        "measured_chromatic_lower_bound": mwis["chromatic_lower_bound"],
        "target_gap": TARGET_GAP,
    }
    report["artifacts"] = {name: str(path) for name, path in sorted(artifacts.items())}
    return report
