"""The Hadamard predicate H_K and its codeword group.

Coordinates are named by their subset code: coordinate i in [1, K] stands for the nonempty
subset of [r] whose characteristic vector is the r-bit binary encoding of i, so the singleton
{s} is coordinate 2^(s-1). Coordinate i lives at array position i - 1.

Bits are multiplicative (+1 / -1) throughout.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import LabInputError
from .validation import validate_bit, validate_r

logger = logging.getLogger(__name__)

Codeword = tuple[int, ...]


@dataclass(frozen=True)
class HadamardPredicate:
    """H_K for K = 2^r - 1 over variables indexed by nonempty subsets of [r]."""

    r: int
    K: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", validate_r(self.r))
        object.__setattr__(self, "K", 2**self.r - 1)

    def subset_of(self, coord: int) -> frozenset[int]:
        """Subset of [r] (1-based elements) encoded by coordinate ``coord``."""
        if not 1 <= coord <= self.K:
            raise LabInputError(f"coord must be in [1, {self.K}], got: {coord}")
        return frozenset(s + 1 for s in range(self.r) if coord >> s & 1)

    @staticmethod
    def singleton_coord(s: int) -> int:
        return 1 << (s - 1)

    @cached_property
    def codeword_matrix(self) -> np.ndarray:
        """All K+1 accepting assignments as an int8 array of shape (K+1, K).

        Row m sets x_{s} = -1 iff bit (r - s) of m is 1, then fills every other coordinate
        with the product of its singletons.
        """
        m = np.arange(self.K + 1)
        # singleton value per row, column s-1 holds x_{s}
        singles = np.stack(
            [1 - 2 * ((m >> (self.r - s)) & 1) for s in range(1, self.r + 1)], axis=1
        )
        coords = np.arange(1, self.K + 1)
        member = ((coords[:, None] >> np.arange(self.r)[None, :]) & 1).astype(bool)
        matrix = np.ones((self.K + 1, self.K), dtype=np.int8)
        for s in range(self.r):
            matrix[:, member[:, s]] *= singles[:, s : s + 1].astype(np.int8)
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def _fixed_coord_candidates(self) -> dict[tuple[int, int], np.ndarray]:
        matrix = self.codeword_matrix
        return {
            (coord, bit): np.flatnonzero(matrix[:, coord - 1] == bit)
            for coord in range(1, self.K + 1)
            for bit in (-1, 1)
        }

    def codeword_index(self, rows: np.ndarray) -> np.ndarray:
        """Index of each row in the accepting set, or -1 for rejected rows.

        The singleton coordinates determine the only codeword a row can be; the row is
        accepted iff it equals that codeword.
        """
        rows = np.asarray(rows)
        m = np.zeros(rows.shape[:-1], dtype=np.int64)
        for s in range(1, self.r + 1):
            negative = rows[..., self.singleton_coord(s) - 1] < 0
            m |= negative.astype(np.int64) << (self.r - s)
        matches = (self.codeword_matrix[m] == rows).all(axis=-1)
        return np.where(matches, m, -1)

    def candidates(self, coord: int, bit: int) -> np.ndarray:
        """Indices of the (K+1)/2 codewords whose coordinate ``coord`` equals ``bit``."""
        return self._fixed_coord_candidates[(coord, bit)]


def hk_evaluate(pred: HadamardPredicate, x: Sequence[int]) -> bool:
    """Evaluate H_K on one assignment.

    Args:
        pred: The predicate
        x: K multiplicative bits

    Returns:
        bool: True iff x_S equals the product of its singletons for every |S| > 1

    Raises:
        LabInputError: On arity mismatch or non-±1 entries
    """
    if len(x) != pred.K:
        raise LabInputError(f"H_K expects {pred.K} bits, got {len(x)}")
    bits = [validate_bit(b, "x entry") for b in x]
    for coord in range(1, pred.K + 1):
        subset = pred.subset_of(coord)
        if len(subset) < 2:
            continue
        product = 1
        for s in subset:
            product *= bits[pred.singleton_coord(s) - 1]
        if bits[coord - 1] != product:
            return False
    return True


def hk_evaluate_batch(pred: HadamardPredicate, rows: np.ndarray) -> np.ndarray:
    """Vectorised H_K over an (n, K) array of multiplicative bits."""
    rows = np.asarray(rows)
    if rows.shape[-1] != pred.K:
        raise LabInputError(f"H_K expects {pred.K} bits per row, got {rows.shape[-1]}")
    return pred.codeword_index(rows) >= 0


def hk_accepting_set(pred: HadamardPredicate) -> list[Codeword]:
    """The K+1 accepting assignments in generation order (a group under coordinatewise product)."""
    return [tuple(int(b) for b in row) for row in pred.codeword_matrix]


def _check_coord(pred: HadamardPredicate, coord: int) -> int:
    if not 1 <= coord <= pred.K:
        raise LabInputError(f"coord must be in [1, {pred.K}], got: {coord}")
    return coord


def fixed_coord_choice(
    pred: HadamardPredicate, coord: int, bits: np.ndarray, picks: np.ndarray
) -> np.ndarray:
    """Codeword indices selected by ``picks`` among those whose coordinate ``coord`` is ``bits``.

    ``bits`` and ``picks`` broadcast together; every pick must lie in [0, (K+1)/2).
    """
    _check_coord(pred, coord)
    return np.where(
        np.asarray(bits) > 0, pred.candidates(coord, 1)[picks], pred.candidates(coord, -1)[picks]
    )


def sample_codewords_fixed_coord(
    pred: HadamardPredicate, coord: int, bits: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Batched draw: one codeword per entry of ``bits``, uniform among those matching it.

    Returns an int8 array of shape ``bits.shape + (K,)``.
    """
    bits = np.asarray(bits)
    picks = rng.integers(0, (pred.K + 1) // 2, size=bits.shape)
    return pred.codeword_matrix[fixed_coord_choice(pred, coord, bits, picks)]


def sample_codeword_fixed_coord(
    pred: HadamardPredicate, coord: int, bit: int, rng: np.random.Generator
) -> Codeword:
    """Draw a codeword uniformly among those with ``c[coord] = bit``.

    Every nonempty subset defines a nontrivial character, so exactly (K+1)/2 codewords
    qualify for either sign.
    """
    _check_coord(pred, coord)
    bit = validate_bit(bit)
    row = sample_codewords_fixed_coord(pred, coord, np.array([bit]), rng)[0]
    return tuple(int(b) for b in row)
