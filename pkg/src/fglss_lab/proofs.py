"""Proof strategies for the Hadamard-predicate verifier.

A proof assigns a ±1 answer to every function f_v (v a vertex tuple with the U vertex at some
position j) on every input of the right shape. Inputs are rows of length L + (K-1)*R laid out
slot by slot; slot j is the L-string, every other slot an R-string. All proofs are folded:
answer(v, -x) = -answer(v, x).
"""

import base64
import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import LabInputError, MissingAnswerError, ProofShapeError
from .label_cover import LabelCoverInstance, Labeling
from .serialization import pack_bits
from .validation import validate_alpha, validate_non_negative_int, validate_seed

logger = logging.getLogger(__name__)

# (position of the U vertex, vertex ids in slot order)
FunctionKey = tuple[int, tuple[int, ...]]


def slot_offsets(K: int, L: int, R: int, position: int) -> np.ndarray:
    """Start column of every slot in an input to a function whose U vertex sits at ``position``."""
    lengths = np.full(K, R, dtype=np.int64)
    lengths[position] = L
    return np.concatenate(([0], np.cumsum(lengths)[:-1]))


def input_width(K: int, L: int, R: int) -> int:
    return L + (K - 1) * R


def vertex_tuples(inst: LabelCoverInstance, edges: np.ndarray) -> np.ndarray:
    """Vertex tuples queried by each trial.

    Args:
        inst: Instance the edges index into
        edges: (n, K) sampled edge indices

    Returns:
        np.ndarray: (n, K, K) array; entry [:, j, i] is u_{e_j} when i == j else v_{e_i}
    """
    edges = np.asarray(edges)
    K = edges.shape[1]
    us = inst.edge_u[edges]
    vs = inst.edge_v[edges]
    tuples = np.repeat(vs[:, None, :], K, axis=1)
    diagonal = np.arange(K)
    tuples[:, diagonal, diagonal] = us
    return tuples


def canonicalize(x: np.ndarray) -> tuple[np.ndarray, int]:
    """Fold an input: negate it when its first bit is -1 and report the sign to restore."""
    x = np.asarray(x)
    if x[0] < 0:
        return -x, -1
    return x, 1


def canonical_key(x: np.ndarray) -> tuple[bytes, int]:
    """Packed canonical input and restoring sign."""
    canonical, sign = canonicalize(x)
    return np.packbits(canonical < 0).tobytes(), sign


class Proof(ABC):
    """A folded strategy for every function of the verifier."""

    kind: str = "abstract"

    def answer(
        self, inst: LabelCoverInstance, position: int, vertices: tuple[int, ...], x: np.ndarray
    ) -> int:
        """Answer of f_v on one input row."""
        result = self.answer_batch(
            inst, position, np.asarray([vertices], dtype=np.int64), np.asarray([x])
        )
        return int(result[0])

    def answer_batch(
        self, inst: LabelCoverInstance, position: int, vertices: np.ndarray, rows: np.ndarray
    ) -> np.ndarray:
        """Answers for n (tuple, input) pairs of one position; default folds row by row."""
        out = np.empty(len(rows), dtype=np.int8)
        for k, (tup, row) in enumerate(zip(vertices, rows)):
            canonical, sign = canonicalize(row)
            out[k] = sign * self.canonical_answer(
                inst, position, tuple(int(v) for v in tup), canonical
            )
        return out

    @abstractmethod
    def canonical_answer(
        self, inst: LabelCoverInstance, position: int, vertices: tuple[int, ...],
        canonical: np.ndarray,
    ) -> int:
        """Answer on a canonical input (first bit +1)."""

    def evaluate(
        self, inst: LabelCoverInstance, edges: np.ndarray, bundles: np.ndarray
    ) -> np.ndarray:
        """Answers f(q) of every trial.

        Args:
            inst: Instance the queries were sampled on
            edges: (n, K) sampled edges
            bundles: (n, K, width) inputs; bundle j goes to the function at position j

        Returns:
            np.ndarray: (n, K) int8 answers
        """
        edges = np.asarray(edges)
        K = edges.shape[1]
        if bundles.shape[1:] != (K, input_width(K, inst.L, inst.R)):
            raise ProofShapeError(
                f"bundles of shape {bundles.shape[1:]} do not fit K={K}, L={inst.L}, R={inst.R}"
            )
        tuples = vertex_tuples(inst, edges)
        answers = np.empty(edges.shape, dtype=np.int8)
        for j in range(K):
            answers[:, j] = self.answer_batch(inst, j, tuples[:, j, :], bundles[:, j, :])
        return answers


@dataclass(frozen=True, eq=False)
class CorrectProof(Proof):
    """Product of long codes of the labeling extended by ``alpha``.

    The answer of f_v is the product over slots of the input bit at the extended label of the
    slot's vertex. K is odd, so the product is folded without canonicalization.
    """

    labeling: Labeling
    alpha: int = 0
    t: int = 0
    kind: str = field(default="correct", init=False)

    def _columns(
        self, inst: LabelCoverInstance, position: int, vertices: np.ndarray
    ) -> np.ndarray:
        K = vertices.shape[1]
        block = 2**self.t
        if len(self.labeling.u_labels) != inst.u_count or (
            len(self.labeling.v_labels) != inst.v_count
        ):
            raise ProofShapeError("labeling does not match the instance vertex counts")
        u_labels = np.asarray(self.labeling.u_labels, dtype=np.int64) * block + self.alpha
        v_labels = np.asarray(self.labeling.v_labels, dtype=np.int64) * block + self.alpha
        if u_labels.max() >= inst.L or v_labels.max() >= inst.R:
            raise ProofShapeError(
                f"extended labels exceed the instance label ranges L={inst.L}, R={inst.R}; "
                f"was the instance extended with t={self.t}?"
            )
        labels = np.empty(vertices.shape, dtype=np.int64)
        others = np.arange(K) != position
        labels[:, others] = v_labels[vertices[:, others]]
        labels[:, position] = u_labels[vertices[:, position]]
        return slot_offsets(K, inst.L, inst.R, position)[None, :] + labels

    def answer_batch(
        self, inst: LabelCoverInstance, position: int, vertices: np.ndarray, rows: np.ndarray
    ) -> np.ndarray:
        columns = self._columns(inst, position, np.asarray(vertices, dtype=np.int64))
        return np.take_along_axis(np.asarray(rows), columns, axis=1).prod(axis=1).astype(np.int8)

    def canonical_answer(self, inst, position, vertices, canonical) -> int:
        return self.answer(inst, position, vertices, canonical)


@dataclass(frozen=True, eq=False)
class RandomProof(Proof):
    """Folded pseudo-random answers keyed by (seed, function, canonical input)."""

    seed: int
    kind: str = field(default="random", init=False)

    def canonical_answer(self, inst, position, vertices, canonical) -> int:
        digest = hashlib.blake2b(digest_size=8, key=self.seed.to_bytes(8, "little"))
        digest.update(position.to_bytes(2, "little"))
        digest.update(np.asarray(vertices, dtype="<i8").tobytes())
        digest.update(np.packbits(np.asarray(canonical) < 0).tobytes())
        return 1 if digest.digest()[0] & 1 else -1


@dataclass(frozen=True, eq=False)
class TableProof(Proof):
    """Explicit answers on canonical inputs, optionally backed by a fallback proof.

    ``entries`` maps (position, vertex tuple, packed canonical input) to ±1. Only canonical
    inputs are stored, so folding holds by construction.
    """

    entries: dict[tuple[int, tuple[int, ...], bytes], int]
    t: int = 0
    alpha: int | None = None
    fallback: Proof | None = None
    kind: str = field(default="table", init=False)

    def canonical_answer(self, inst, position, vertices, canonical) -> int:
        key = (position, vertices, np.packbits(np.asarray(canonical) < 0).tobytes())
        answer = self.entries.get(key)
        if answer is not None:
            return answer
        if self.fallback is None:
            raise MissingAnswerError(
                f"no table entry for position {position + 1}, tuple "
                f"{[v + 1 for v in vertices]}"
            )
        return self.fallback.answer(inst, position, vertices, canonical)

    def to_dict(self) -> dict[str, Any]:
        """JSON form with 1-based positions and vertex ids (fallbacks are not serialised)."""
        entries = []
        for (position, vertices, packed), answer in sorted(self.entries.items()):
            bits = np.unpackbits(np.frombuffer(packed, dtype=np.uint8))
            entries.append({
                "position": position + 1,
                "tuple": [v + 1 for v in vertices],
                "input": pack_bits(1 - 2 * bits.astype(np.int8)),
                "answer": answer,
            })
        data: dict[str, Any] = {"t": self.t, "entries": entries}
        if self.alpha is not None:
            data["alpha"] = self.alpha
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any], fallback: Proof | None = None) -> "TableProof":
        try:
            entries: dict[tuple[int, tuple[int, ...], bytes], int] = {}
            for item in data["entries"]:
                answer = int(item["answer"])
                if answer not in (-1, 1):
                    raise LabInputError(f"table answers must be ±1, got: {answer}")
                key = (
                    int(item["position"]) - 1,
                    tuple(int(v) - 1 for v in item["tuple"]),
                    base64.b64decode(item["input"], validate=True),
                )
                if key[2] and key[2][0] & 0x80:
                    raise LabInputError("table inputs must be canonical (first bit +1)")
                entries[key] = answer
            return cls(
                entries=entries,
                t=validate_non_negative_int(data.get("t", 0), "t"),
                alpha=data.get("alpha"),
                fallback=fallback,
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, LabInputError):
                raise
            raise LabInputError(f"malformed proof table: {e!r}") from e


def make_correct_proof(labeling: Labeling, alpha: int = 0, t: int = 0) -> CorrectProof:
    """Product-of-long-codes proof for ``labeling`` extended by ``alpha``."""
    alpha, t = validate_alpha(alpha, t)
    if min(labeling.u_labels + labeling.v_labels, default=0) < 0:
        raise LabInputError("labeling contains negative labels")
    return CorrectProof(labeling=labeling, alpha=alpha, t=t)


def make_random_proof(seed: int) -> RandomProof:
    return RandomProof(seed=validate_seed(seed))


def make_table_proof(
    entries: dict[tuple[int, tuple[int, ...], bytes], int],
    t: int = 0,
    fallback: Proof | None = None,
) -> TableProof:
    return TableProof(entries=dict(entries), t=t, fallback=fallback)


def table_entry(position: int, vertices: tuple[int, ...], x: np.ndarray, answer: int):
    """Table entry (key, value) that makes f_v answer ``answer`` on ``x`` (folding applied)."""
    packed, sign = canonical_key(x)
    return (position, tuple(vertices), packed), sign * answer
