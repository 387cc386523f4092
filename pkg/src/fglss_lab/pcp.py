"""The Hadamard-predicate verifier: query sampling, verdicts and acceptance probabilities.

Routing convention. For edge i and right label r the verifier draws a codeword c with
c[i] = q_{i,i}[pi_{e_i}(r)] and writes coordinate j of c into BUNDLE j at SLOT i (j != i).
With this routing the answer of a correct proof at position j is the product over i of
y^(i)_j, where y^(i) is edge i's codeword at the right label of v_i. Codewords form a group,
so the noise-free answer vector is itself a codeword (uniform over the K+1 of them) and a
correct proof is accepted with probability 1 at eta = 0. Routing all coordinates of edge i's
codeword into bundle i instead breaks that identity.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .config import ENV_SUPPORT_CAP, get_lab_config
from .errors import CapExceededError, LabInputError, PreconditionError
from .label_cover import LabelCoverInstance, Labeling, satisfied_fraction
from .predicate import (
    HadamardPredicate,
    fixed_coord_choice,
    hk_evaluate,
    hk_evaluate_batch,
    sample_codewords_fixed_coord,
)
from .proofs import Proof, input_width, slot_offsets
from .serialization import pack_bits, unpack_bits
from .validation import (
    validate_alpha,
    validate_eta,
    validate_positive_int,
    validate_r,
    validate_seed,
)

logger = logging.getLogger(__name__)

# Joint support rows evaluated at once by the exact enumerator
_ENUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class VerifierConfig:
    """Verifier parameters. ``eta`` defaults to 1/K^2."""

    r: int
    eta: Fraction | None = None
    seed: int = 0
    predicate: HadamardPredicate = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        r = validate_r(self.r)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "predicate", HadamardPredicate(r))
        K = 2**r - 1
        eta = Fraction(1, K * K) if self.eta is None else validate_eta(self.eta)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "seed", validate_seed(self.seed))

    @property
    def K(self) -> int:
        return self.predicate.K


@dataclass(frozen=True, eq=False)
class QueryBatch:
    """n independent verifier trials.

    ``bundles``, ``pre_noise`` and ``noise_mask`` have shape (n, K, width); bundle j is the
    input of the function at position j, laid out slot by slot (see ``slot_offsets``).
    """

    L: int
    R: int
    edges: np.ndarray
    bundles: np.ndarray
    pre_noise: np.ndarray
    noise_mask: np.ndarray

    def __len__(self) -> int:
        return len(self.edges)

    def query(self, k: int) -> "QueryBundleSet":
        return QueryBundleSet(
            L=self.L,
            R=self.R,
            edge_indices=tuple(int(e) for e in self.edges[k]),
            bundles=self.bundles[k],
            pre_noise=self.pre_noise[k],
            noise_mask=self.noise_mask[k],
        )


@dataclass(frozen=True, eq=False)
class QueryBundleSet:
    """One verifier trial: K sampled edges and the K query bundles."""

    L: int
    R: int
    edge_indices: tuple[int, ...]
    bundles: np.ndarray
    pre_noise: np.ndarray
    noise_mask: np.ndarray

    @property
    def K(self) -> int:
        return len(self.edge_indices)

    def slot(self, j: int, i: int, values: str = "bundles") -> np.ndarray:
        """Slot i of bundle j (0-based) from ``bundles``, ``pre_noise`` or ``noise_mask``."""
        offsets = slot_offsets(self.K, self.L, self.R, j)
        length = self.L if i == j else self.R
        return getattr(self, values)[j, offsets[i] : offsets[i] + length]

    def as_batch(self) -> QueryBatch:
        return QueryBatch(
            L=self.L,
            R=self.R,
            edges=np.asarray([self.edge_indices], dtype=np.int64),
            bundles=self.bundles[None],
            pre_noise=self.pre_noise[None],
            noise_mask=self.noise_mask[None],
        )

    def to_dict(self) -> dict[str, Any]:
        """JSON form: 1-based edges, base64-packed bundles, noise masks as bit strings."""
        return {
            "edges": [e + 1 for e in self.edge_indices],
            "bundles": [pack_bits(row) for row in self.bundles],
            "pre_noise": [pack_bits(row) for row in self.pre_noise],
            "noise_mask": [pack_bits(np.where(row, -1, 1)) for row in self.noise_mask],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], K: int, L: int, R: int) -> "QueryBundleSet":
        width = input_width(K, L, R)
        try:
            return cls(
                L=L,
                R=R,
                edge_indices=tuple(int(e) - 1 for e in data["edges"]),
                bundles=np.stack([unpack_bits(s, width) for s in data["bundles"]]),
                pre_noise=np.stack([unpack_bits(s, width) for s in data["pre_noise"]]),
                noise_mask=np.stack([unpack_bits(s, width) < 0 for s in data["noise_mask"]]),
            )
        except (KeyError, TypeError) as e:
            raise LabInputError(f"malformed query log entry: {e!r}") from e


def _uniform_signs(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return (1 - 2 * rng.integers(0, 2, size=shape)).astype(np.int8)


def sample_queries(
    inst: LabelCoverInstance, cfg: VerifierConfig, rng: np.random.Generator, n: int
) -> QueryBatch:
    """Draw n independent verifier trials as one batch.

    For each trial: K edges drawn independently by weight; for each i a uniform L-string in
    slot i of bundle i; for each i and right label r a codeword uniform among those whose
    coordinate i equals bundle i's slot-i bit at pi_{e_i}(r), routed coordinate j -> bundle j,
    slot i; finally every bit is resampled with probability eta.
    """
    pred = cfg.predicate
    K, L, R = pred.K, inst.L, inst.R
    width = input_width(K, L, R)
    edges = rng.choice(len(inst.edges), size=(n, K), p=inst.edge_probabilities)
    pre = np.empty((n, K, width), dtype=np.int8)
    offsets = [slot_offsets(K, L, R, j) for j in range(K)]

    for i in range(K):
        own = _uniform_signs(rng, (n, L))
        pre[:, i, offsets[i][i] : offsets[i][i] + L] = own
        fixed = np.take_along_axis(own, inst.projections[edges[:, i]], axis=1)
        codewords = sample_codewords_fixed_coord(pred, i + 1, fixed, rng)
        for j in range(K):
            if j != i:
                pre[:, j, offsets[j][i] : offsets[j][i] + R] = codewords[:, :, j]

    if cfg.eta > 0:
        mask = rng.random((n, K, width)) < float(cfg.eta)
        bundles = np.where(mask, _uniform_signs(rng, (n, K, width)), pre).astype(np.int8)
    else:
        mask = np.zeros((n, K, width), dtype=bool)
        bundles = pre.copy()
    logger.debug("Sampled %d queries (K=%d, L=%d, R=%d, eta=%s)", n, K, L, R, cfg.eta)
    return QueryBatch(L=L, R=R, edges=edges, bundles=bundles, pre_noise=pre, noise_mask=mask)


def sample_query(
    inst: LabelCoverInstance, cfg: VerifierConfig, rng: np.random.Generator
) -> QueryBundleSet:
    """One verifier trial (the n = 1 view of ``sample_queries``)."""
    return sample_queries(inst, cfg, rng, 1).query(0)


def eval_proof(proof: Proof, inst: LabelCoverInstance, qs: QueryBundleSet) -> tuple[int, ...]:
    """Answers f_{v_j}(q_j) of the K queried functions."""
    batch = qs.as_batch()
    return tuple(int(a) for a in proof.evaluate(inst, batch.edges, batch.bundles)[0])


def noise_free_answers(proof: Proof, inst: LabelCoverInstance, batch: QueryBatch) -> np.ndarray:
    """Answers of ``proof`` on the pre-noise bundles of every trial."""
    return proof.evaluate(inst, batch.edges, batch.pre_noise)


def verdict(r: int, answers: tuple[int, ...]) -> bool:
    """Accept iff the K answers satisfy H_K."""
    return hk_evaluate(HadamardPredicate(r), answers)


def random_proof_baseline(r: int) -> Fraction:
    """Acceptance density (K+1)/2^K of uniformly random answers."""
    K = 2 ** validate_r(r) - 1
    return Fraction(K + 1, 2**K)


@dataclass(frozen=True)
class AcceptanceEstimate:
    accepted: int
    trials: int
    seed: int
    eta: Fraction
    r: int

    @property
    def estimate(self) -> float:
        return self.accepted / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.trials)

    @staticmethod
    def merge(parts: list["AcceptanceEstimate"]) -> "AcceptanceEstimate":
        """Trial-weighted merge of shard estimates sharing seed, eta and r."""
        if not parts:
            raise LabInputError("cannot merge an empty list of estimates")
        first = parts[0]
        return AcceptanceEstimate(
            accepted=sum(p.accepted for p in parts),
            trials=sum(p.trials for p in parts),
            seed=first.seed,
            eta=first.eta,
            r=first.r,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "trials": self.trials,
            "accepted": self.accepted,
            "seed": self.seed,
            "eta": str(self.eta),
            "r": self.r,
        }


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator of Monte Carlo block ``block``; independent of how blocks are sharded."""
    return np.random.default_rng([seed, block])


def _count_block(
    inst: LabelCoverInstance, cfg: VerifierConfig, proof: Proof, block: int, size: int
) -> int:
    batch = sample_queries(inst, cfg, block_rng(cfg.seed, block), size)
    answers = proof.evaluate(inst, batch.edges, batch.bundles)
    return int(hk_evaluate_batch(cfg.predicate, answers).sum())


def accept_prob_mc(
    inst: LabelCoverInstance,
    cfg: VerifierConfig,
    proof: Proof,
    N: int,
    threads: int = 1,
    block_size: int | None = None,
) -> AcceptanceEstimate:
    """Monte Carlo acceptance probability over N independent trials.

    Trials are split into fixed-size blocks seeded by (seed, block index); ``threads`` only
    changes how blocks are scheduled, never the result.
    """
    N = validate_positive_int(N, "N")
    threads = validate_positive_int(threads, "threads")
    if block_size is None:
        block_size = get_lab_config()["mc_block_size"]
    sizes = [min(block_size, N - start) for start in range(0, N, block_size)]

    if threads == 1:
        counts = [_count_block(inst, cfg, proof, b, size) for b, size in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(
                lambda item: _count_block(inst, cfg, proof, item[0], item[1]),
                enumerate(sizes),
            ))

    parts = [
        AcceptanceEstimate(accepted=c, trials=s, seed=cfg.seed, eta=cfg.eta, r=cfg.r)
        for c, s in zip(counts, sizes)
    ]
    result = AcceptanceEstimate.merge(parts)
    logger.info("MC acceptance %.6f ± %.6f over %d trials (%s proof)",
                result.estimate, result.stderr, N, proof.kind)
    return result


def accept_prob_exact_product(
    inst: LabelCoverInstance,
    cfg: VerifierConfig,
    labeling: Labeling,
    alpha: int = 0,
    t: int = 0,
) -> Fraction:
    """Exact acceptance of the correct proof of a satisfying labeling under noise eta.

    Each answer is a product of K distinct bits, each resampled with probability eta, so the
    noisy answers are independent given the noise-free ones with correlation rho = (1-eta)^K.
    The noise-free answer vector is a uniform codeword; group symmetry reduces the result to
    sum over codewords w of prod_j (1 + rho * w_j) / 2. The extension alpha does not change it.

    Raises:
        LabInputError: If alpha is not below 2^t
        PreconditionError: If the labeling does not satisfy every edge
    """
    validate_alpha(alpha, t)
    if satisfied_fraction(inst, labeling) != 1:
        raise PreconditionError(
            "closed form requires a labeling satisfying every edge of the instance"
        )
    rho = (1 - cfg.eta) ** cfg.K
    total = Fraction(0)
    for row in cfg.predicate.codeword_matrix:
        term = Fraction(1)
        for w in row:
            term *= (1 + rho * int(w)) / 2
        total += term
    return total


def _edge_support(
    inst: LabelCoverInstance, pred: HadamardPredicate, i: int, edge: int
) -> tuple[np.ndarray, np.ndarray]:
    """All noise-free contents edge i can write: own L-strings and the (R, K) codeword grid."""
    L, R = inst.L, inst.R
    half = (pred.K + 1) // 2
    own = 1 - 2 * np.array(list(itertools.product((0, 1), repeat=L)), dtype=np.int8)
    picks = np.array(list(itertools.product(range(half), repeat=R)), dtype=np.int64)
    fixed = own[:, inst.projections[edge]]
    chosen = fixed_coord_choice(pred, i + 1, fixed[:, None, :], picks[None, :, :])
    codewords = pred.codeword_matrix[chosen].reshape(len(own) * len(picks), R, pred.K)
    own_rows = np.repeat(own, len(picks), axis=0)
    return own_rows, codewords


def enumeration_support(inst: LabelCoverInstance, cfg: VerifierConfig) -> int:
    """Number of (edge tuple, joint choice) pairs visited by the exact enumerator."""
    K, half = cfg.K, (cfg.K + 1) // 2
    edges = sum(1 for edge in inst.edges if edge.weight > 0)
    per_trial = (2**inst.L * half**inst.R) ** K
    return edges**K * per_trial


def accept_prob_exact_enum(
    inst: LabelCoverInstance, cfg: VerifierConfig, proof: Proof, cap: int | None = None
) -> Fraction:
    """Exact acceptance of an arbitrary proof at eta = 0 by enumerating the query distribution.

    For every weighted edge K-tuple, all joint choices of the L-strings and of the codeword per
    (edge, right label) are enumerated and the proof is evaluated on each. The result is an
    exact rational.

    Raises:
        LabInputError: If eta != 0
        CapExceededError: If the support exceeds the cap
    """
    if cfg.eta != 0:
        raise LabInputError(f"exact enumeration requires eta = 0, got: {cfg.eta}")
    if cap is None:
        cap = get_lab_config()["support_cap"]
    cost = enumeration_support(inst, cfg)
    if cost > cap:
        raise CapExceededError("accept_prob_exact_enum", cost, cap, ENV_SUPPORT_CAP)

    pred = cfg.predicate
    K, L, R = pred.K, inst.L, inst.R
    width = input_width(K, L, R)
    offsets = [slot_offsets(K, L, R, j) for j in range(K)]
    live = [e for e, edge in enumerate(inst.edges) if edge.weight > 0]
    support = {(i, e): _edge_support(inst, pred, i, e) for i in range(K) for e in live}
    per_edge = 2**L * ((K + 1) // 2) ** R
    joint = per_edge**K

    total = Fraction(0)
    for edge_tuple in itertools.product(live, repeat=K):
        weight = math.prod((inst.edges[e].weight for e in edge_tuple), start=Fraction(1))
        accepted = 0
        for start in range(0, joint, _ENUM_CHUNK):
            index = np.arange(start, min(joint, start + _ENUM_CHUNK))
            choice = np.unravel_index(index, (per_edge,) * K)
            bundles = np.empty((len(index), K, width), dtype=np.int8)
            for i, e in enumerate(edge_tuple):
                own, codewords = support[(i, e)]
                bundles[:, i, offsets[i][i] : offsets[i][i] + L] = own[choice[i]]
                for j in range(K):
                    if j != i:
                        bundles[:, j, offsets[j][i] : offsets[j][i] + R] = (
                            codewords[choice[i], :, j]
                        )
            edges = np.broadcast_to(np.asarray(edge_tuple), (len(index), K))
            answers = proof.evaluate(inst, edges, bundles)
            accepted += int(hk_evaluate_batch(pred, answers).sum())
        total += weight * Fraction(accepted, joint)

    logger.info("Exact enumerated acceptance %s over support %d (%s proof)",
                total, cost, proof.kind)
    return total
