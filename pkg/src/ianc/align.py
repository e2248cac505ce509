"""Symbol-extension precoders, alignment checks and the randomized design search.

Over a block of L = 2n+1 channel uses every transfer function becomes a
diagonal L x L matrix M_ij. Source 1 sends n+1 symbols and sources 2, 3
send n each through precoders V1 (L x (n+1)), V2, V3 (L x n). A design is
valid when, at every destination, the interference collapses into the
complement of the desired signal's subspace:

    D1: span(M12 V2) = span(M13 V3), rank[M11 V1 | M12 V2] = L
    D2: span(M23 V3) in span(M21 V1), rank[M22 V2 | M21 V1] = L
    D3: span(M32 V2) in span(M31 V1), rank[M33 V3 | M31 V1] = L

Validity is always established by checking these rank conditions directly
on the sampled assignment, never by appeal to existence arguments.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from .errors import (
    CaseRejected,
    Exhausted,
    InvalidPair,
    ParseError,
    RankFailure,
    Singular,
    SingularBlock,
)
from .gf import DEFAULT_PRIME, FieldContext, FieldMatrix, inv_array, mat_inv, mat_rank, next_prime
from .netmodel import Network
from .rng import Stream
from .transfer import (
    A_TERMS,
    B_TERMS,
    CaseKind,
    CaseTag,
    NetworkModel,
    TransferModel,
    VirtualTransferModel,
    as_model,
    classify,
)

DEFAULT_MAX_ATTEMPTS = 64


@dataclass(frozen=True)
class SymbolExtension:
    """Per-channel-use assignments for one block: row k is xi^(k)."""

    n: int
    z: np.ndarray
    p: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("extension parameter n must be >= 1")
        z = np.array(self.z, dtype=np.int64) % self.p
        if z.ndim != 2 or z.shape[0] != 2 * self.n + 1:
            raise ValueError(f"z must have 2n+1 = {2 * self.n + 1} rows, got shape {z.shape}")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def length(self) -> int:
        return 2 * self.n + 1


@dataclass(frozen=True)
class DiagonalBlocks:
    """The nine diagonal blocks; ``diag[i-1, j-1, k]`` is m_ij(xi^(k))."""

    diag: np.ndarray
    p: int

    @property
    def length(self) -> int:
        return self.diag.shape[2]

    @property
    def ctx(self) -> FieldContext:
        return FieldContext(self.p)

    def d(self, i: int, j: int) -> np.ndarray:
        return self.diag[i - 1, j - 1]

    def block(self, i: int, j: int) -> FieldMatrix:
        return FieldMatrix.diag(self.ctx, self.d(i, j))

    def is_zero(self, i: int, j: int) -> bool:
        return not self.d(i, j).any()

    def apply(self, i: int, j: int, v: FieldMatrix) -> FieldMatrix:
        """M_ij @ v without forming the diagonal matrix."""
        return FieldMatrix(v.ctx, self.d(i, j)[:, None] * v.data % self.p)


def build_blocks(net: Union[Network, TransferModel], ext: SymbolExtension) -> DiagonalBlocks:
    model = NetworkModel(net, ext.p) if isinstance(net, Network) else as_model(net)
    if model.p != ext.p:
        raise ValueError(f"model is over F_{model.p} but the extension is over F_{ext.p}")
    vals = model.evaluate_batch(ext.z)  # (L, 3, 3)
    diag = np.ascontiguousarray(np.transpose(vals, (1, 2, 0)))
    diag.setflags(write=False)
    return DiagonalBlocks(diag, ext.p)


@dataclass(frozen=True)
class PrecodingSet:
    V1: FieldMatrix
    V2: FieldMatrix
    V3: FieldMatrix
    case_tag: Optional[CaseTag] = None
    virtual_values: dict = field(default_factory=dict)

    def V(self, i: int) -> FieldMatrix:
        return (self.V1, self.V2, self.V3)[i - 1]


def _require_invertible(blocks: DiagonalBlocks) -> None:
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            zeros = np.flatnonzero(blocks.d(i, j) == 0)
            if zeros.size:
                raise SingularBlock(f"M{i}{j} has a zero at channel use {int(zeros[0]) + 1}")


def _ratio(blocks: DiagonalBlocks, num: tuple[int, int], den: tuple[int, int]) -> np.ndarray:
    p = blocks.p
    return blocks.d(*num) * inv_array(blocks.d(*den), p) % p


def alignment_diagonal(blocks: DiagonalBlocks) -> np.ndarray:
    """Diagonal of T = M12 M23 M31 (M13 M32 M21)^-1, i.e. a/b per channel use."""
    p = blocks.p
    a = np.ones(blocks.length, dtype=np.int64)
    b = np.ones(blocks.length, dtype=np.int64)
    for ij in A_TERMS:
        a = a * blocks.d(*ij) % p
    for ij in B_TERMS:
        b = b * blocks.d(*ij) % p
    return a * inv_array(b, p) % p


def build_precoding_case1(blocks: DiagonalBlocks, n: int) -> PrecodingSet:
    """Vandermonde-style precoders for a nonconstant a/b.

    V1 = [w, Tw, ..., T^n w], V2 = [Rw, RTw, ..., RT^(n-1) w],
    V3 = [STw, ..., ST^n w] with w the all-ones vector, R = M31 M32^-1,
    S = M21 M23^-1.

    Raises:
        SingularBlock: some diagonal entry is zero.
        RankFailure: two diagonal entries of T coincide, so the Vandermonde
            rows are not pairwise distinct.
    """
    if blocks.length != 2 * n + 1:
        raise ValueError(f"blocks have length {blocks.length}, expected {2 * n + 1}")
    _require_invertible(blocks)
    p = blocks.p
    ctx = blocks.ctx
    t = alignment_diagonal(blocks)
    if len(np.unique(t)) != len(t):
        raise RankFailure("T has repeated diagonal entries")
    powers = np.empty((blocks.length, n + 1), dtype=np.int64)
    powers[:, 0] = 1
    for k in range(1, n + 1):
        powers[:, k] = powers[:, k - 1] * t % p
    r = _ratio(blocks, (3, 1), (3, 2))
    s = _ratio(blocks, (2, 1), (2, 3))
    v1 = FieldMatrix(ctx, powers)
    v2 = FieldMatrix(ctx, r[:, None] * powers[:, :n] % p)
    v3 = FieldMatrix(ctx, s[:, None] * powers[:, 1:] % p)
    if mat_rank(v1) != n + 1:
        raise RankFailure("V1 is not full column rank")
    return PrecodingSet(v1, v2, v3)


def build_precoding_case2(
    blocks: DiagonalBlocks,
    n: int,
    c_tilde: int,
    rng_seed: Optional[int] = None,
    v1: Optional[FieldMatrix] = None,
) -> PrecodingSet:
    """Random precoders for a constant a/b = c_tilde.

    V1 is uniform over F_p^(L x (n+1)) drawn from ``Stream(rng_seed)`` unless
    given explicitly; V2 = R V1 A and V3 = c_tilde S V1 A where A keeps the
    first n columns.
    """
    if blocks.length != 2 * n + 1:
        raise ValueError(f"blocks have length {blocks.length}, expected {2 * n + 1}")
    _require_invertible(blocks)
    p = blocks.p
    ctx = blocks.ctx
    if v1 is None:
        if rng_seed is None:
            raise ValueError("either rng_seed or v1 is required")
        theta = Stream(rng_seed).field_elements(p, blocks.length * (n + 1))
        v1 = FieldMatrix(ctx, theta.reshape(blocks.length, n + 1))
    if v1.shape != (blocks.length, n + 1):
        raise ValueError(f"V1 must be {blocks.length}x{n + 1}, got {v1.shape}")
    if mat_rank(v1) != n + 1:
        raise RankFailure("sampled V1 is not full column rank")
    head = v1.data[:, :n]
    r = _ratio(blocks, (3, 1), (3, 2))
    s = _ratio(blocks, (2, 1), (2, 3)) * (int(c_tilde) % p) % p
    v2 = FieldMatrix(ctx, r[:, None] * head % p)
    v3 = FieldMatrix(ctx, s[:, None] * head % p)
    if mat_rank(v3) != n:
        raise RankFailure("V3 is not full column rank")
    return PrecodingSet(v1, v2, v3)


def virtualize(net: Union[Network, TransferModel], trivial_pairs) -> VirtualTransferModel:
    """Replace identically-zero interference entries by fresh variables eta_ij."""
    pairs = sorted({tuple(q) for q in trivial_pairs})
    if not pairs:
        raise InvalidPair("no trivial pairs given; use the direct construction")
    for i, j in pairs:
        if not (1 <= i <= 3 and 1 <= j <= 3):
            raise InvalidPair(f"pair ({i}, {j}) out of range")
        if i == j:
            raise InvalidPair(f"diagonal pair ({i}, {j}) cannot be virtualized")
    return VirtualTransferModel(as_model(net), pairs)


# ------------------------------------------------------------------ checking

# destination -> its two interference entries (i, j)
_DESTINATIONS = (
    (1, ((1, 2), (1, 3))),
    (2, ((2, 1), (2, 3))),
    (3, ((3, 1), (3, 2))),
)


@dataclass(frozen=True)
class ConditionReport:
    """Alignment and separability at each destination.

    Alignment: every interference product whose transfer block is not
    identically zero has full column rank, and together they span at most
    L - (desired dimension) dimensions. Separability: the desired product
    has full column rank and is independent of the interference span.
    Interference through an all-zero block is trivially aligned.
    """

    d1_alignment: bool
    d1_separability: bool
    d2_alignment: bool
    d2_separability: bool
    d3_alignment: bool
    d3_separability: bool
    ranks: dict = field(default_factory=dict, compare=False)

    @property
    def ok(self) -> bool:
        return all(self.as_tuple())

    def as_tuple(self) -> tuple[bool, ...]:
        return (
            self.d1_alignment,
            self.d1_separability,
            self.d2_alignment,
            self.d2_separability,
            self.d3_alignment,
            self.d3_separability,
        )

    def failures(self) -> list[str]:
        names = ("d1_alignment", "d1_separability", "d2_alignment", "d2_separability",
                 "d3_alignment", "d3_separability")
        return [nm for nm, ok in zip(names, self.as_tuple()) if not ok]

    def to_json(self) -> dict:
        return {
            "d1_alignment": self.d1_alignment,
            "d1_separability": self.d1_separability,
            "d2_alignment": self.d2_alignment,
            "d2_separability": self.d2_separability,
            "d3_alignment": self.d3_alignment,
            "d3_separability": self.d3_separability,
        }


def verify_conditions(blocks: DiagonalBlocks, pre: PrecodingSet) -> ConditionReport:
    length = blocks.length
    flags: list[bool] = []
    ranks: dict = {}
    for i, interferers in _DESTINATIONS:
        desired = blocks.apply(i, i, pre.V(i))
        k = desired.cols
        budget = length - k
        products = [(ij, blocks.apply(*ij, pre.V(ij[1]))) for ij in interferers]
        aligned = True
        for ij, prod in products:
            if blocks.is_zero(*ij):
                continue
            rk = mat_rank(prod)
            ranks[f"M{ij[0]}{ij[1]}V{ij[1]}"] = rk
            aligned &= rk == prod.cols
        interference = products[0][1].hstack(products[1][1])
        r_int = mat_rank(interference)
        aligned &= r_int <= budget
        r_des = mat_rank(desired)
        r_all = mat_rank(desired.hstack(interference))
        ranks[f"D{i}"] = {"desired": r_des, "interference": r_int, "total": r_all}
        flags += [bool(aligned), bool(r_des == k and r_all == k + r_int)]
    return ConditionReport(*flags, ranks=ranks)


def stacked_matrix(blocks: DiagonalBlocks, pre: PrecodingSet, i: int) -> FieldMatrix:
    """[M11 V1 | M12 V2], [M22 V2 | M21 V1] or [M33 V3 | M31 V1] for destination i."""
    other = {1: (1, 2), 2: (2, 1), 3: (3, 1)}[i]
    return blocks.apply(i, i, pre.V(i)).hstack(blocks.apply(*other, pre.V(other[1])))


def decode_matrices(blocks: DiagonalBlocks, pre: PrecodingSet) -> tuple[FieldMatrix, ...]:
    """Inverses W1, W2, W3 of the stacked per-destination systems."""
    return tuple(mat_inv(stacked_matrix(blocks, pre, i)) for i in (1, 2, 3))


def _decodes_exactly(blocks: DiagonalBlocks, pre: PrecodingSet, w: Sequence[FieldMatrix]) -> bool:
    # W_i must map the desired product to [I; 0] and every interference product into the tail
    for i, interferers in _DESTINATIONS:
        desired = w[i - 1] @ blocks.apply(i, i, pre.V(i))
        k = desired.cols
        expect = np.zeros(desired.shape, dtype=np.int64)
        expect[:k, :k] = np.eye(k, dtype=np.int64)
        if not np.array_equal(desired.data, expect):
            return False
        for ij in interferers:
            leak = w[i - 1] @ blocks.apply(*ij, pre.V(ij[1]))
            if leak.data[:k].any():
                return False
    return True


# -------------------------------------------------------------------- design


def message_lengths(n: int) -> tuple[int, int, int]:
    return (n + 1, n, n)


@dataclass(frozen=True)
class CodeDesign:
    network_digest: str
    n: int
    p: int
    case: CaseTag
    construction: str
    z: np.ndarray
    eta: dict
    theta_seed: Optional[int]
    precoding: PrecodingSet
    W: tuple[FieldMatrix, FieldMatrix, FieldMatrix]
    seed: int = 0
    attempt: int = 0
    conditions: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return 2 * self.n + 1

    @property
    def rates(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(Fraction(m, self.length) for m in message_lengths(self.n))

    def V(self, i: int) -> FieldMatrix:
        return self.precoding.V(i)

    def to_json(self) -> dict:
        return {
            "version": __version__,
            "network_digest": self.network_digest,
            "n": self.n,
            "p": self.p,
            "seed": self.seed,
            "attempt": self.attempt,
            "case": self.case.to_json(),
            "construction": self.construction,
            "z": self.z.tolist(),
            "eta": {f"{i},{j}": vals for (i, j), vals in sorted(self.eta.items())},
            **({"theta_seed": self.theta_seed} if self.theta_seed is not None else {}),
            "V1": self.precoding.V1.tolist(),
            "V2": self.precoding.V2.tolist(),
            "V3": self.precoding.V3.tolist(),
            "W1": self.W[0].tolist(),
            "W2": self.W[1].tolist(),
            "W3": self.W[2].tolist(),
            "rates": [[m, self.length] for m in message_lengths(self.n)],
            "conditions": self.conditions,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, doc: dict) -> "CodeDesign":
        try:
            ctx = FieldContext(doc["p"])
            n = int(doc["n"])
            case = CaseTag.from_json(doc["case"])
            eta = {tuple(int(x) for x in key.split(",")): list(v) for key, v in doc["eta"].items()}
            pre = PrecodingSet(
                FieldMatrix(ctx, doc["V1"]), FieldMatrix(ctx, doc["V2"]), FieldMatrix(ctx, doc["V3"]),
                case_tag=case, virtual_values=eta,
            )
            w = tuple(FieldMatrix(ctx, doc[k]) for k in ("W1", "W2", "W3"))
            return cls(
                network_digest=doc["network_digest"], n=n, p=ctx.p, case=case,
                construction=doc.get("construction", ""), z=np.array(doc["z"], dtype=np.int64),
                eta=eta, theta_seed=doc.get("theta_seed"), precoding=pre, W=w,
                seed=doc.get("seed", 0), attempt=doc.get("attempt", 0),
                conditions=doc.get("conditions", {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed design document: {exc}") from None

    @classmethod
    def loads(cls, text: str) -> "CodeDesign":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}") from None
        return cls.from_json(doc)


def recommended_prime(net: Optional[Network], n: int) -> int:
    """Conservative field size for extension parameter ``n``.

    Per-variable degree bound B = 9 + 12n + 12(2n+1): 9 from the product of
    the blocks, 12n from the Vandermonde distinctness product and 4(2n+1)
    from each of the three separability determinants. Returns the smallest
    prime >= 64 B, capped at 2**31 - 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    bound = 9 + 12 * n + 12 * (2 * n + 1)
    return min(next_prime(64 * bound), DEFAULT_PRIME)


def _attempt(
    net: Network, n: int, p: int, tag: CaseTag, master_seed: int, t: int
) -> Union[CodeDesign, str]:
    """One independent design attempt; returns the design or a failure reason."""
    length = 2 * n + 1
    real_model = NetworkModel(net, p)
    stream = Stream(master_seed, "attempt", t)
    z = stream.substream("z").field_elements(p, length * real_model.num_vars).reshape(length, -1)
    ext = SymbolExtension(n, z, p)
    real = build_blocks(real_model, ext)
    eta: dict = {}
    theta_seed = None
    if tag.kind is CaseKind.CASE_II:
        vmodel = virtualize(real_model, tag.trivial_pairs)
        etas = stream.substream("eta").field_elements(p, length * len(vmodel.pairs)).reshape(length, -1)
        eta = {pair: [int(v) for v in etas[:, k]] for k, pair in enumerate(vmodel.pairs)}
        design_blocks = build_blocks(vmodel, SymbolExtension(n, np.hstack([z, etas]), p))
    else:
        design_blocks = real
    try:
        if tag.kind is CaseKind.CONSTANT_RATIO:
            theta_seed = stream.substream("theta").key
            # c~ was measured over the network's own field; re-read it when designing over another
            c_tilde = tag.c_tilde if p == net.field_prime else int(alignment_diagonal(design_blocks)[0])
            pre = build_precoding_case2(design_blocks, n, c_tilde, rng_seed=theta_seed)
            construction = "random"
        else:
            pre = build_precoding_case1(design_blocks, n)
            construction = "vandermonde"
    except (SingularBlock, RankFailure) as exc:
        return f"attempt {t}: {type(exc).__name__}: {exc}"
    report = verify_conditions(design_blocks, pre)
    if not report.ok:
        return f"attempt {t}: conditions failed: {', '.join(report.failures())}"
    real_report = report if design_blocks is real else verify_conditions(real, pre)
    if not real_report.ok:
        return f"attempt {t}: real-network conditions failed: {', '.join(real_report.failures())}"
    try:
        w = decode_matrices(design_blocks, pre)
    except Singular as exc:
        return f"attempt {t}: decoder singular: {exc}"
    if not _decodes_exactly(real, pre, w):
        return f"attempt {t}: decoder does not isolate the desired signal"
    pre = PrecodingSet(pre.V1, pre.V2, pre.V3, case_tag=tag, virtual_values=eta)
    return CodeDesign(
        network_digest=net.digest, n=n, p=p, case=tag, construction=construction, z=ext.z,
        eta=eta, theta_seed=theta_seed, precoding=pre, W=w, seed=master_seed, attempt=t,
        conditions=real_report.to_json(),
    )


def search_design(
    net: Network,
    n: int,
    p: Optional[int] = None,
    master_seed: int = 0,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    workers: int = 1,
    tag: Optional[CaseTag] = None,
) -> CodeDesign:
    """Sample assignments until a design passes every check.

    Attempt t draws from the stream derived from (master_seed, "attempt", t),
    so the returned design (the lowest successful attempt index) does not
    depend on ``workers``.

    Raises:
        CaseRejected: the network is rank-1 or violates A1.
        MincutViolation: some session has no usable path.
        Exhausted: no attempt succeeded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = net.field_prime if p is None else p
    FieldContext(p)
    if tag is None:
        # structural classification runs over the network's own (large) field
        tag = classify(net, rng_seed=master_seed)
    if tag.kind is CaseKind.DEGENERATE:
        raise CaseRejected(tag, "transfer matrix has rank 1; aligned rate 1/2 per user is infeasible")
    if tag.kind is CaseKind.BROKEN_A1:
        raise CaseRejected(tag, f"destination {tag.pair[0]} cannot separate sources {tag.pair}")
    last = "no attempts made"
    if workers <= 1:
        for t in range(max_attempts):
            out = _attempt(net, n, p, tag, master_seed, t)
            if isinstance(out, CodeDesign):
                return out
            last = out
        raise Exhausted(max_attempts, last)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for start in range(0, max_attempts, workers):
            idx = range(start, min(start + workers, max_attempts))
            results = list(pool.map(lambda t: _attempt(net, n, p, tag, master_seed, t), idx))
            for out in results:
                if isinstance(out, CodeDesign):
                    return out
                last = out
    raise Exhausted(max_attempts, last)
