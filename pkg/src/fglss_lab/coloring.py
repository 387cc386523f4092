"""Good queries, the alpha-indexed coloring and coloring verification.

On an instance extended by t bits, every extension alpha gives a correct proof f^(alpha) of the
planted labeling; the vertices it agrees with form an independent set (color alpha). A query
is good when, for every labeling of the 2K vertices it touches and every accepting z, some
alpha makes f^(alpha) answer z.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .config import ENV_GOOD_QUERY_CAP, get_lab_config
from .errors import CapExceededError, LabInputError, PreconditionError
from .fglss import FglssGraph
from .label_cover import LabelCoverInstance, Labeling, extend, satisfied_fraction
from .mwis import mwis_exact
from .pcp import QueryBatch, QueryBundleSet, VerifierConfig, sample_queries
from .predicate import HadamardPredicate
from .proofs import make_correct_proof, slot_offsets
from .validation import validate_non_negative_int, validate_positive_int, validate_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Coloring:
    """Colors (alpha values) per vertex plus the vertices removed as uncovered."""

    colors: dict[int, int]
    removed: frozenset[int]

    @property
    def palette_size(self) -> int:
        return len(set(self.colors.values()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "colors": {str(v + 1): alpha for v, alpha in sorted(self.colors.items())},
            "removed": sorted(v + 1 for v in self.removed),
            "palette_size": self.palette_size,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Coloring":
        try:
            return cls(
                colors={int(v) - 1: int(alpha) for v, alpha in data["colors"].items()},
                removed=frozenset(int(v) - 1 for v in data.get("removed", [])),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise LabInputError(f"malformed coloring: {e!r}") from e


def _predicate_for(K: int) -> HadamardPredicate:
    return HadamardPredicate((K + 1).bit_length() - 1)


def good_query_cost(L: int, R: int, K: int, t: int) -> int:
    """Enumeration cost L^K * R^K * (K+1) * 2^t * K^2 of the good-query check."""
    return L**K * R**K * (K + 1) * 2**t * K * K


def _labeling_answers(
    ext_inst: LabelCoverInstance,
    qs: QueryBundleSet,
    t: int,
    alpha_limit: int,
    satisfying_only: bool,
) -> tuple[np.ndarray, list[int], list[int], np.ndarray, np.ndarray]:
    """Codeword index answered by f^(alpha) for every labeling of the touched vertices.

    Returns:
        tuple: (index array (labelings, alpha_limit) with -1 for non-codewords, touched u ids,
        touched v ids, u-label grid, v-label grid)
    """
    K = qs.K
    block = 2**t
    L0, R0 = ext_inst.L // block, ext_inst.R // block
    pred = _predicate_for(K)
    edges = list(qs.edge_indices)
    us = sorted({ext_inst.edges[e].u for e in edges})
    vs = sorted({ext_inst.edges[e].v for e in edges})

    radix = (L0,) * len(us) + (R0,) * len(vs)
    grid = np.stack(np.unravel_index(np.arange(math.prod(radix)), radix), axis=1)
    u_grid, v_grid = grid[:, : len(us)], grid[:, len(us) :]
    u_col = {u: k for k, u in enumerate(us)}
    v_col = {v: k for k, v in enumerate(vs)}
    slot_u = [u_col[ext_inst.edges[e].u] for e in edges]
    slot_v = [v_col[ext_inst.edges[e].v] for e in edges]

    if satisfying_only:
        keep = np.ones(len(grid), dtype=bool)
        for i, e in enumerate(edges):
            base_projection = ext_inst.projections[e][::block] // block
            keep &= base_projection[v_grid[:, slot_v[i]]] == u_grid[:, slot_u[i]]
        u_grid, v_grid = u_grid[keep], v_grid[keep]

    alphas = np.arange(alpha_limit)
    answers = np.ones((len(u_grid), alpha_limit, K), dtype=np.int8)
    for j in range(K):
        offsets = slot_offsets(K, ext_inst.L, ext_inst.R, j)
        for i in range(K):
            labels = u_grid[:, slot_u[i]] if i == j else v_grid[:, slot_v[i]]
            columns = offsets[i] + labels[:, None] * block + alphas[None, :]
            answers[:, :, j] *= qs.bundles[j][columns]
    return pred.codeword_index(answers), us, vs, u_grid, v_grid


def is_good_query(
    ext_inst: LabelCoverInstance,
    qs: QueryBundleSet,
    t: int,
    alpha_limit: int | None = None,
    satisfying_only: bool = False,
    cap: int | None = None,
) -> tuple[bool, dict[str, Any] | None]:
    """Check whether a query is good.

    Args:
        ext_inst: ``extend(inst, t)``, the instance the query was sampled on
        qs: The query
        t: Extension length
        alpha_limit: Search alpha only in [0, alpha_limit) (default 2^t)
        satisfying_only: Restrict to labelings satisfying the K sampled edges
        cap: Enumeration cap (defaults to FGLSS_LAB_GOOD_QUERY_CAP)

    Returns:
        tuple: (good, witness) where the witness names a failing labeling (1-based vertex ids
        and labels) and the accepting assignment no alpha reaches; None when good

    Raises:
        CapExceededError: If L^K * R^K * (K+1) * 2^t * K^2 exceeds the cap
    """
    t = validate_non_negative_int(t, "t")
    block = 2**t
    if alpha_limit is None:
        alpha_limit = block
    alpha_limit = validate_positive_int(alpha_limit, "alpha_limit")
    if alpha_limit > block:
        raise LabInputError(f"alpha_limit must be <= 2^t = {block}, got: {alpha_limit}")
    if cap is None:
        cap = get_lab_config()["good_query_cap"]
    cost = good_query_cost(ext_inst.L // block, ext_inst.R // block, qs.K, t)
    if cost > cap:
        raise CapExceededError("is_good_query", cost, cap, ENV_GOOD_QUERY_CAP)

    index, us, vs, u_grid, v_grid = _labeling_answers(
        ext_inst, qs, t, alpha_limit, satisfying_only
    )
    hits = _coverage(index, qs.K)
    failing = np.flatnonzero(~hits.all(axis=1))
    if not len(failing):
        return True, None
    row = int(failing[0])
    missing = int(np.flatnonzero(~hits[row])[0])
    pred = _predicate_for(qs.K)
    witness = {
        "u_labels": {str(u + 1): int(label) + 1 for u, label in zip(us, u_grid[row])},
        "v_labels": {str(v + 1): int(label) + 1 for v, label in zip(vs, v_grid[row])},
        "z": [int(b) for b in pred.codeword_matrix[missing]],
        "z_index": missing,
    }
    return False, witness


def _coverage(index: np.ndarray, K: int) -> np.ndarray:
    """(labelings, K+1) table of which accepting assignments some alpha reaches."""
    hits = np.zeros((index.shape[0], K + 1), dtype=bool)
    rows, _ = np.nonzero(index >= 0)
    hits[rows, index[index >= 0]] = True
    return hits


def find_alpha(
    ext_inst: LabelCoverInstance, qs: QueryBundleSet, t: int, labeling: Labeling, z_index: int
) -> int | None:
    """Smallest alpha with f^(alpha)(q) = z for a base-instance labeling, or None."""
    for alpha in range(2**t):
        proof = make_correct_proof(labeling, alpha, t)
        batch = qs.as_batch()
        answers = proof.evaluate(ext_inst, batch.edges, batch.bundles)
        if _predicate_for(qs.K).codeword_index(answers)[0] == z_index:
            return alpha
    return None


@dataclass(frozen=True)
class GoodFractionPoint:
    t: int
    not_good: int
    trials: int

    @property
    def estimate(self) -> float:
        return self.not_good / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.trials)

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "palette": 2**self.t,
            "not_good": self.not_good,
            "trials": self.trials,
            "not_good_estimate": self.estimate,
            "stderr": self.stderr,
        }


def good_fraction_curve(
    inst: LabelCoverInstance,
    cfg: VerifierConfig,
    ts: list[int],
    N: int,
    seed: int,
    satisfying_only: bool = False,
) -> list[GoodFractionPoint]:
    """Not-good fractions for several t on common random numbers.

    N queries are sampled once on ``extend(inst, max(ts))``; the point for t restricts the
    alpha search to [0, 2^t). The label slots l * 2^t_max + alpha with alpha < 2^t carry the
    distribution of a t-query, so each point is an unbiased estimate and the curve is
    non-increasing in t.
    """
    if not ts:
        raise LabInputError("ts must name at least one extension length")
    ts = sorted({validate_non_negative_int(t, "t") for t in ts})
    N = validate_positive_int(N, "N")
    seed = validate_seed(seed)
    t_max = ts[-1]
    ext = extend(inst, t_max)
    cap = get_lab_config()["good_query_cap"]
    cost = good_query_cost(inst.L, inst.R, cfg.K, t_max)
    if cost > cap:
        raise CapExceededError("good_fraction_mc", cost, cap, ENV_GOOD_QUERY_CAP)

    batch = sample_queries(ext, cfg, np.random.default_rng(seed), N)
    not_good = dict.fromkeys(ts, 0)
    for k in range(N):
        index, *_ = _labeling_answers(ext, batch.query(k), t_max, 2**t_max, satisfying_only)
        for t in ts:
            if not _coverage(index[:, : 2**t], cfg.K).all():
                not_good[t] += 1
    points = [GoodFractionPoint(t, not_good[t], N) for t in ts]
    for point in points:
        logger.info("t=%d: not-good fraction %.4f ± %.4f", point.t, point.estimate, point.stderr)
    return points


def good_fraction_mc(
    inst: LabelCoverInstance, cfg: VerifierConfig, t: int, N: int, seed: int,
    satisfying_only: bool = False,
) -> tuple[float, float]:
    """(not-good estimate, stderr) over N queries sampled on ``extend(inst, t)``."""
    point = good_fraction_curve(inst, cfg, [t], N, seed, satisfying_only)[0]
    return point.estimate, point.stderr


def hit_probability_mc(
    inst: LabelCoverInstance,
    cfg: VerifierConfig,
    labeling: Labeling,
    z_index: int,
    alpha: int,
    t: int,
    N: int,
    seed: int,
) -> tuple[float, float]:
    """Measured Pr[f^(alpha)(q) = z] for the correct proof of ``labeling``."""
    N = validate_positive_int(N, "N")
    ext = extend(inst, t)
    batch: QueryBatch = sample_queries(ext, cfg, np.random.default_rng(validate_seed(seed)), N)
    answers = make_correct_proof(labeling, alpha, t).evaluate(ext, batch.edges, batch.bundles)
    p = float((cfg.predicate.codeword_index(answers) == z_index).mean())
    return p, math.sqrt(p * (1 - p) / N)


def union_bound(L: int, R: int, K: int, p_hit: float, t: int) -> float:
    """#labelings * (K+1) * (1 - p_hit)^(2^t) with #labelings = L^K * R^K."""
    return float(L**K * R**K * (K + 1)) * (1.0 - p_hit) ** (2**t)


def alpha_coloring(graph: FglssGraph, planted: Labeling, t: int | None = None) -> Coloring:
    """Color vertex (q, z) with the smallest alpha such that f^(alpha)(q) = z.

    Vertices no alpha reaches are removed. At most 2^t colors are used.

    Raises:
        PreconditionError: If ``planted`` does not satisfy the base instance
    """
    if t is not None and t != graph.t:
        raise LabInputError(f"graph was built with t={graph.t}, got t={t}")
    if satisfied_fraction(graph.base_instance, planted) != 1:
        raise PreconditionError("alpha_coloring requires a labeling satisfying every edge")
    ext = graph.instance
    edges, bundles = graph.stacked()
    K = graph.K
    first_alpha: dict[int, int] = {}
    for alpha in range(2**graph.t):
        answers = make_correct_proof(planted, alpha, graph.t).evaluate(ext, edges, bundles)
        for q, a in enumerate(graph.cfg.predicate.codeword_index(answers)):
            if a >= 0:
                first_alpha.setdefault(graph.vertex_id(q, int(a)), alpha)
    removed = frozenset(
        graph.vertex_id(q, a)
        for q in range(len(graph.queries))
        for a in range(K + 1)
        if graph.vertex_id(q, a) not in first_alpha
    )
    coloring = Coloring(colors=first_alpha, removed=removed)
    logger.info("alpha-coloring: palette %d of %d, %d vertices removed",
                coloring.palette_size, 2**graph.t, len(removed))
    return coloring


def verify_coloring(graph: FglssGraph, coloring: Coloring) -> list[str]:
    """Violations of a coloring (empty iff valid).

    Reports monochromatic conflict edges, colored removed vertices and vertices that are
    neither colored nor removed.
    """
    violations = []
    for a, b in sorted((min(a, b), max(a, b)) for a, b in graph.graph.edges):
        color = coloring.colors.get(a)
        if color is not None and color == coloring.colors.get(b):
            violations.append(
                f"edge ({a + 1}, {b + 1}) is monochromatic with color {color}"
            )
    for v in sorted(coloring.removed & coloring.colors.keys()):
        violations.append(f"removed vertex {v + 1} carries color {coloring.colors[v]}")
    for v in sorted(graph.graph.nodes):
        if v not in coloring.colors and v not in coloring.removed:
            violations.append(f"vertex {v + 1} is neither colored nor removed")
    return violations


def chromatic_lower_bound(graph: FglssGraph, max_vertices: int | None = None) -> Fraction:
    """(total weight) / (MWIS weight): every color class is an independent set."""
    weight, _ = mwis_exact(graph, max_vertices)
    return graph.total_weight / weight


def uncovered_witnesses(
    graph: FglssGraph, coloring: Coloring
) -> dict[int, tuple[bool, dict[str, Any] | None]]:
    """is_good_query verdict for the query of every removed vertex."""
    ext = graph.instance
    verdicts: dict[int, tuple[bool, dict[str, Any] | None]] = {}
    for vertex in sorted(coloring.removed):
        query, _ = graph.split(vertex)
        verdicts[vertex] = is_good_query(ext, graph.queries[query], graph.t)
    return verdicts
