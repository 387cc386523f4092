"""FGLSS Lab MCP Server - exposes the reduction lab as MCP tools."""

from typing import Any

from mcp.server.fastmcp import FastMCP

from .coloring import alpha_coloring
from .config import configure_logging
from .errors import LabInputError, handle_lab_errors
from .fglss import build_sampled
from .label_cover import (
    LabelCoverInstance,
    Labeling,
    extend,
    gen_planted,
    gen_random,
    solve_exact,
)
from .pcp import VerifierConfig, accept_prob_exact_product, accept_prob_mc
from .predicate import HadamardPredicate, hk_accepting_set
from .proofs import make_correct_proof, make_random_proof
from .reports import ReductionParams, mwis_summary
from .validation import validate_non_negative_int

# Create MCP server instance
mcp = FastMCP("FGLSS Lab")


def _fraction_text(value: Any) -> str:
    return f"{value.numerator}/{value.denominator}"


@mcp.tool()
@handle_lab_errors
def hadamard_accepting_set(r: int) -> dict[str, Any]:
    """List the accepting assignments of the Hadamard predicate H_K, K = 2^r - 1.

    Args:
        r: Predicate size exponent (1-6)

    Returns:
        K, the codewords (±1 lists) and the subset each coordinate stands for
    """
    pred = HadamardPredicate(r)
    return {
        "r": pred.r,
        "K": pred.K,
        "codewords": [list(z) for z in hk_accepting_set(pred)],
        "coordinate_subsets": [sorted(pred.subset_of(i)) for i in range(1, pred.K + 1)],
    }


@mcp.tool()
@handle_lab_errors
def generate_label_cover(
    u_count: int,
    v_count: int,
    labels: int,
    d: int,
    edges: int,
    seed: int,
    planted: bool = True,
) -> dict[str, Any]:
    """Generate a d-to-1 Label Cover instance.

    Args:
        u_count: Number of left vertices
        v_count: Number of right vertices
        labels: Left label count L (R = d * L)
        d: Projection degree
        edges: Number of edges (at least max(u_count, v_count))
        seed: Generator seed
        planted: Plant a satisfying labeling (default: True)

    Returns:
        The instance (1-based JSON form) and, when planted, the planted labeling
    """
    if planted:
        inst, labeling = gen_planted(u_count, v_count, labels, d, edges, seed)
        return {"instance": inst.to_dict(), "labeling": labeling.to_dict()}
    return {"instance": gen_random(u_count, v_count, labels, d, edges, seed).to_dict()}


@mcp.tool()
@handle_lab_errors
def label_cover_value(instance: dict[str, Any]) -> dict[str, Any]:
    """Exact value of a Label Cover instance (brute force under FGLSS_LAB_LC_ENUM_CAP).

    Args:
        instance: Instance in the JSON form returned by generate_label_cover

    Returns:
        The value as a fraction string and one optimal labeling
    """
    value, best = solve_exact(LabelCoverInstance.from_dict(instance))
    return {"value": _fraction_text(value), "optimal_labeling": best.to_dict()}


@mcp.tool()
@handle_lab_errors
def extend_label_cover(instance: dict[str, Any], t: int) -> dict[str, Any]:
    """Append t bits to every label of an instance.

    Args:
        instance: Instance in JSON form
        t: Extension length (non-negative)

    Returns:
        The extended instance
    """
    return {"instance": extend(LabelCoverInstance.from_dict(instance), t).to_dict()}


@mcp.tool()
@handle_lab_errors
def estimate_acceptance(
    instance: dict[str, Any],
    r: int,
    trials: int,
    seed: int,
    proof: str = "correct",
    eta: str | None = None,
    labeling: dict[str, Any] | None = None,
    alpha: int = 0,
    t: int = 0,
) -> dict[str, Any]:
    """Monte Carlo acceptance probability of the Hadamard-predicate verifier.

    Args:
        instance: Base instance in JSON form
        r: Predicate size exponent
        trials: Number of independent verifier runs
        seed: Sampling seed
        proof: "correct" (needs labeling) or "random"
        eta: Noise rate as a fraction string (default 1/K^2)
        labeling: Labeling of the base instance for the correct proof
        alpha: Extension appended to every label of the correct proof
        t: Extension length; queries are sampled on the extended instance

    Returns:
        Estimate, standard error and run parameters
    """
    t = validate_non_negative_int(t, "t")
    inst = extend(LabelCoverInstance.from_dict(instance), t)
    cfg = VerifierConfig(r=r, eta=eta, seed=seed)
    if proof == "correct":
        if labeling is None:
            raise LabInputError("the correct proof needs a labeling")
        chosen = make_correct_proof(Labeling.from_dict(labeling), alpha, t)
    elif proof == "random":
        chosen = make_random_proof(seed)
    else:
        raise LabInputError(f"proof must be 'correct' or 'random', got: {proof}")
    return {**accept_prob_mc(inst, cfg, chosen, trials).to_dict(), "proof": proof, "t": t}


@mcp.tool()
@handle_lab_errors
def exact_product_acceptance(
    instance: dict[str, Any], labeling: dict[str, Any], r: int, eta: str | None = None
) -> dict[str, Any]:
    """Exact acceptance of the correct proof of a satisfying labeling under noise.

    Args:
        instance: Instance in JSON form
        labeling: Labeling satisfying every edge
        r: Predicate size exponent
        eta: Noise rate as a fraction string (default 1/K^2)

    Returns:
        Exact acceptance and the completeness bound 1 - K^2 * eta
    """
    cfg = VerifierConfig(r=r, eta=eta)
    value = accept_prob_exact_product(
        LabelCoverInstance.from_dict(instance), cfg, Labeling.from_dict(labeling)
    )
    return {
        "exact": _fraction_text(value),
        "estimate": float(value),
        "completeness_bound": _fraction_text(1 - cfg.K**2 * cfg.eta),
    }


@mcp.tool()
@handle_lab_errors
def build_fglss_summary(
    instance: dict[str, Any],
    r: int,
    queries: int,
    seed: int,
    eta: str | None = None,
    t: int = 0,
    labeling: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Sample queries, build their FGLSS graph and measure it.

    Args:
        instance: Base instance in JSON form
        r: Predicate size exponent
        queries: Number of sampled queries (weight 1/queries each)
        seed: Sampling seed
        eta: Noise rate as a fraction string (default 1/K^2)
        t: Extension length
        labeling: Planted labeling; when given, the alpha-coloring is reported too

    Returns:
        Graph size, total weight, MWIS weight, chromatic lower bound and palette size
    """
    cfg = VerifierConfig(r=r, eta=eta, seed=seed)
    graph = build_sampled(LabelCoverInstance.from_dict(instance), cfg, queries, seed, t=t)
    result: dict[str, Any] = {
        "vertices": graph.graph.number_of_nodes(),
        "edges": graph.graph.number_of_edges(),
        "mwis": mwis_summary(graph),
    }
    if labeling is not None:
        coloring = alpha_coloring(graph, Labeling.from_dict(labeling))
        result["coloring"] = {
            "palette_size": coloring.palette_size,
            "palette_bound": 2**graph.t,
            "removed": len(coloring.removed),
        }
    return result


@mcp.tool()
@handle_lab_errors
def reduction_parameters(r: int, t: int | None = None) -> dict[str, Any]:
    """Parameter ledger of the reduction for K = 2^r - 1.

    Args:
        r: Predicate size exponent
        t: Extension length (default: smallest t with 2^t >= K^3)

    Returns:
        Numeric parameters and the symbolic soundness relations
    """
    return ReductionParams.from_r(r, t).ledger()


def main() -> None:
    """Main entry point for the server.

    Configures logging from FGLSS_LAB_LOG_LEVEL and runs the MCP server.
    """
    configure_logging()

    # Run the MCP server
    mcp.run()


if __name__ == "__main__":
    main()
