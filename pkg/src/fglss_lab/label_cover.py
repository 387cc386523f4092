"""Label Cover instances: generation, exact value, validation and t-bit label extension.

Labels are 0-based inside the library and 1-based in the JSON format.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any

import numpy as np

from .config import ENV_LC_ENUM_CAP, get_lab_config
from .errors import CapExceededError, LabInputError
from .validation import (
    validate_alpha,
    validate_non_negative_int,
    validate_positive_int,
    validate_seed,
)

logger = logging.getLogger(__name__)

# Rows of the (labelings, u_count, L) score tensor evaluated at once
_SCORE_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class Edge:
    """A weighted Label Cover edge with its d-to-1 projection [R] -> [L]."""

    u: int
    v: int
    weight: Fraction
    projection: tuple[int, ...]


@dataclass(frozen=True)
class LabelCoverInstance:
    u_count: int
    v_count: int
    L: int
    R: int
    d: int
    edges: tuple[Edge, ...]

    @cached_property
    def projections(self) -> np.ndarray:
        """Projection table of shape (edge count, R)."""
        table = np.array([edge.projection for edge in self.edges], dtype=np.int64)
        table.setflags(write=False)
        return table

    @cached_property
    def edge_u(self) -> np.ndarray:
        return np.array([edge.u for edge in self.edges], dtype=np.int64)

    @cached_property
    def edge_v(self) -> np.ndarray:
        return np.array([edge.v for edge in self.edges], dtype=np.int64)

    @cached_property
    def edge_probabilities(self) -> np.ndarray:
        weights = np.array([float(edge.weight) for edge in self.edges])
        return weights / weights.sum()

    def to_dict(self) -> dict[str, Any]:
        """JSON form with 1-based projections and 'num/den' weights."""
        return {
            "L": self.L,
            "R": self.R,
            "d": self.d,
            "u_count": self.u_count,
            "v_count": self.v_count,
            "edges": [
                {
                    "u": edge.u + 1,
                    "v": edge.v + 1,
                    "weight": f"{edge.weight.numerator}/{edge.weight.denominator}",
                    "projection": [label + 1 for label in edge.projection],
                }
                for edge in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LabelCoverInstance":
        """Parse the JSON form. Structural invariants are checked by ``validate``."""
        try:
            edges = tuple(
                Edge(
                    u=int(item["u"]) - 1,
                    v=int(item["v"]) - 1,
                    weight=Fraction(str(item["weight"])),
                    projection=tuple(int(label) - 1 for label in item["projection"]),
                )
                for item in data["edges"]
            )
            return cls(
                u_count=validate_positive_int(data["u_count"], "u_count"),
                v_count=validate_positive_int(data["v_count"], "v_count"),
                L=validate_positive_int(data["L"], "L"),
                R=validate_positive_int(data["R"], "R"),
                d=validate_positive_int(data["d"], "d"),
                edges=edges,
            )
        except (KeyError, TypeError, ZeroDivisionError) as e:
            raise LabInputError(f"malformed Label Cover instance: {e!r}") from e


@dataclass(frozen=True)
class Labeling:
    """An assignment A: U -> [L], V -> [R] (0-based labels)."""

    u_labels: tuple[int, ...]
    v_labels: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "u_labels": [label + 1 for label in self.u_labels],
            "v_labels": [label + 1 for label in self.v_labels],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Labeling":
        try:
            return cls(
                u_labels=tuple(int(label) - 1 for label in data["u_labels"]),
                v_labels=tuple(int(label) - 1 for label in data["v_labels"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise LabInputError(f"malformed labeling: {e!r}") from e


def _check_generator_params(
    u_count: Any, v_count: Any, L: Any, d: Any, edge_count: Any, seed: Any
) -> tuple[int, int, int, int, int, int]:
    u_count = validate_positive_int(u_count, "u_count")
    v_count = validate_positive_int(v_count, "v_count")
    L = validate_positive_int(L, "L")
    d = validate_positive_int(d, "d")
    edge_count = validate_positive_int(edge_count, "edge_count")
    seed = validate_seed(seed)
    if edge_count < max(u_count, v_count):
        raise LabInputError(
            f"edge_count must be >= max(u_count, v_count) = {max(u_count, v_count)} "
            f"so every vertex lies on an edge, got: {edge_count}"
        )
    return u_count, v_count, L, d, edge_count, seed


def _edge_endpoints(
    rng: np.random.Generator, u_count: int, v_count: int, edge_count: int
) -> list[tuple[int, int]]:
    # Cover every vertex first, then draw the remaining endpoints uniformly
    cover = max(u_count, v_count)
    endpoints = [(k % u_count, k % v_count) for k in range(cover)]
    for _ in range(edge_count - cover):
        endpoints.append((int(rng.integers(u_count)), int(rng.integers(v_count))))
    return endpoints


def _random_projection(rng: np.random.Generator, L: int, d: int) -> np.ndarray:
    """Uniform d-to-1 map: a random partition of [R] into L blocks of size d."""
    R = d * L
    projection = np.empty(R, dtype=np.int64)
    projection[rng.permutation(R)] = np.arange(R) // d
    return projection


def gen_planted(
    u_count: int, v_count: int, L: int, d: int, edge_count: int, seed: int
) -> tuple[LabelCoverInstance, Labeling]:
    """Generate a value-1 instance together with the labeling planted in it.

    Each projection is a random d-to-1 map patched by one transposition so that
    pi_e(A(v)) = A(u). Edge weights are uniform.

    Returns:
        tuple: (instance, planted labeling)

    Raises:
        LabInputError: On inconsistent parameters
    """
    u_count, v_count, L, d, edge_count, seed = _check_generator_params(
        u_count, v_count, L, d, edge_count, seed
    )
    rng = np.random.default_rng(seed)
    R = d * L
    u_labels = tuple(int(x) for x in rng.integers(L, size=u_count))
    v_labels = tuple(int(x) for x in rng.integers(R, size=v_count))

    edges = []
    for u, v in _edge_endpoints(rng, u_count, v_count, edge_count):
        projection = _random_projection(rng, L, d)
        right, target = v_labels[v], u_labels[u]
        if projection[right] != target:
            swap = int(rng.choice(np.flatnonzero(projection == target)))
            projection[[right, swap]] = projection[[swap, right]]
        edges.append(
            Edge(u, v, Fraction(1, edge_count), tuple(int(x) for x in projection))
        )

    instance = LabelCoverInstance(u_count, v_count, L, R, d, tuple(edges))
    logger.debug("Generated planted instance: U=%d V=%d L=%d d=%d E=%d seed=%d",
                 u_count, v_count, L, d, edge_count, seed)
    return instance, Labeling(u_labels, v_labels)


def gen_random(
    u_count: int, v_count: int, L: int, d: int, edge_count: int, seed: int
) -> LabelCoverInstance:
    """Generate an instance whose projections are independent uniform d-to-1 maps."""
    u_count, v_count, L, d, edge_count, seed = _check_generator_params(
        u_count, v_count, L, d, edge_count, seed
    )
    rng = np.random.default_rng(seed)
    edges = tuple(
        Edge(u, v, Fraction(1, edge_count), tuple(int(x) for x in _random_projection(rng, L, d)))
        for u, v in _edge_endpoints(rng, u_count, v_count, edge_count)
    )
    logger.debug("Generated random instance: U=%d V=%d L=%d d=%d E=%d seed=%d",
                 u_count, v_count, L, d, edge_count, seed)
    return LabelCoverInstance(u_count, v_count, L, d * L, d, edges)


def _check_labeling(inst: LabelCoverInstance, labeling: Labeling) -> None:
    if len(labeling.u_labels) != inst.u_count or len(labeling.v_labels) != inst.v_count:
        raise LabInputError(
            f"labeling shape ({len(labeling.u_labels)}, {len(labeling.v_labels)}) does not "
            f"match instance ({inst.u_count}, {inst.v_count})"
        )
    for u, label in enumerate(labeling.u_labels):
        if not 0 <= label < inst.L:
            raise LabInputError(
                f"u-label of vertex {u + 1} out of range [1, {inst.L}]: {label + 1}"
            )
    for v, label in enumerate(labeling.v_labels):
        if not 0 <= label < inst.R:
            raise LabInputError(
                f"v-label of vertex {v + 1} out of range [1, {inst.R}]: {label + 1}"
            )


def satisfied_fraction(inst: LabelCoverInstance, labeling: Labeling) -> Fraction:
    """Weighted fraction of edges with pi_e(A(v)) = A(u)."""
    _check_labeling(inst, labeling)
    return sum(
        (
            edge.weight
            for edge in inst.edges
            if edge.projection[labeling.v_labels[edge.v]] == labeling.u_labels[edge.u]
        ),
        Fraction(0),
    )


def enumeration_cost(inst: LabelCoverInstance) -> int:
    """L^|U| * R^|V|, the size of the labeling space."""
    return inst.L**inst.u_count * inst.R**inst.v_count


def solve_exact(inst: LabelCoverInstance, cap: int | None = None) -> tuple[Fraction, Labeling]:
    """Exact Label Cover value and a maximizing labeling.

    Right labelings are enumerated in ascending mixed-radix order in chunks; for each one the
    best left label of every u is read off its score row. Chunks merge by strict maximum, so
    the result does not depend on the chunk size.

    Raises:
        CapExceededError: If L^|U| * R^|V| exceeds the cap
    """
    if cap is None:
        cap = get_lab_config()["lc_enum_cap"]
    cost = enumeration_cost(inst)
    if cost > cap:
        raise CapExceededError("value_exact", cost, cap, ENV_LC_ENUM_CAP)

    scale = math.lcm(*(edge.weight.denominator for edge in inst.edges))
    int_weights = [int(edge.weight * scale) for edge in inst.edges]
    radix = (inst.R,) * inst.v_count
    total = inst.R**inst.v_count
    chunk = max(1, _SCORE_CHUNK_ELEMENTS // (inst.u_count * inst.L))

    best_score = -1
    best_labeling: Labeling | None = None
    for start in range(0, total, chunk):
        index = np.arange(start, min(total, start + chunk))
        right = np.stack(np.unravel_index(index, radix), axis=1)
        rows = np.arange(len(index))
        scores = np.zeros((len(index), inst.u_count, inst.L), dtype=np.int64)
        for e, edge in enumerate(inst.edges):
            scores[rows, edge.u, inst.projections[e][right[:, edge.v]]] += int_weights[e]
        totals = scores.max(axis=2).sum(axis=1)
        winner = int(np.argmax(totals))
        if totals[winner] > best_score:
            best_score = int(totals[winner])
            best_labeling = Labeling(
                u_labels=tuple(int(x) for x in scores[winner].argmax(axis=1)),
                v_labels=tuple(int(x) for x in right[winner]),
            )

    assert best_labeling is not None
    value = Fraction(best_score, scale)
    logger.info("Exact Label Cover value %s over %d labelings", value, cost)
    return value, best_labeling


def value_exact(inst: LabelCoverInstance, cap: int | None = None) -> Fraction:
    """Maximum weighted satisfied fraction over all labelings (exact rational)."""
    return solve_exact(inst, cap)[0]


def extend(inst: LabelCoverInstance, t: int) -> LabelCoverInstance:
    """Append a t-bit string to every label.

    Label (l, alpha) is encoded as l * 2^t + alpha and pi'(r, alpha) = (pi(r), alpha), so the
    extended instance has L * 2^t left and R * 2^t right labels and the same d.
    """
    t = validate_non_negative_int(t, "t")
    if t == 0:
        return inst
    block = 2**t
    offsets = np.arange(block)
    edges = tuple(
        Edge(
            edge.u,
            edge.v,
            edge.weight,
            tuple(int(x) for x in (np.asarray(edge.projection)[:, None] * block + offsets).ravel()),
        )
        for edge in inst.edges
    )
    return LabelCoverInstance(
        inst.u_count, inst.v_count, inst.L * block, inst.R * block, inst.d, edges
    )


def extend_labeling(labeling: Labeling, alpha: int, t: int) -> Labeling:
    """Map every label l to l * 2^t + alpha."""
    alpha, t = validate_alpha(alpha, t)
    block = 2**t
    return Labeling(
        u_labels=tuple(label * block + alpha for label in labeling.u_labels),
        v_labels=tuple(label * block + alpha for label in labeling.v_labels),
    )


def validate(inst: LabelCoverInstance) -> list[str]:
    """Check every instance invariant.

    Returns:
        list[str]: Human-readable violations, empty iff the instance is well formed
    """
    violations: list[str] = []
    if inst.R != inst.d * inst.L:
        violations.append(f"R={inst.R} is not d*L={inst.d * inst.L}")
    if not inst.edges:
        violations.append("instance has no edges")
    total = Fraction(0)
    for number, edge in enumerate(inst.edges, start=1):
        if not 0 <= edge.u < inst.u_count:
            violations.append(f"edge {number}: u={edge.u + 1} out of range [1, {inst.u_count}]")
        if not 0 <= edge.v < inst.v_count:
            violations.append(f"edge {number}: v={edge.v + 1} out of range [1, {inst.v_count}]")
        if edge.weight < 0:
            violations.append(f"edge {number}: negative weight {edge.weight}")
        total += edge.weight
        if len(edge.projection) != inst.R:
            violations.append(
                f"edge {number}: projection has length {len(edge.projection)}, expected {inst.R}"
            )
            continue
        if any(not 0 <= label < inst.L for label in edge.projection):
            violations.append(f"edge {number}: projection leaves [1, {inst.L}]")
            continue
        counts = np.bincount(np.asarray(edge.projection, dtype=np.int64), minlength=inst.L)
        for label in np.flatnonzero(counts != inst.d):
            violations.append(
                f"edge {number}: left label {label + 1} has {counts[label]} preimages, "
                f"expected {inst.d}"
            )
    if inst.edges and total != 1:
        violations.append(f"edge weights sum to {total}, expected 1")
    return violations
