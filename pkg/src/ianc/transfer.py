"""Transfer-matrix evaluation and randomized polynomial identity tests.

Transfer functions m_ij(xi) are never expanded symbolically. They are only
evaluated, by pushing global coding vectors through the DAG, and every
structural question (is m_ij identically zero, is m_ii a scalar multiple of
m_ij, is a/b constant, ...) is answered by Schwartz-Zippel sampling. A
nonzero polynomial of total degree d vanishes at a uniform point of F_p^s
with probability at most d/p, so k independent all-zero samples bound the
chance of a wrong "Likely" verdict by (d/p)**k. "Certified" verdicts carry
the assignments that prove them and can be re-checked with
:func:`verify_witness`.

Session indices in this module are 1-based, as in m_ij.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from .errors import MincutViolation, PreconditionViolated
from .gf import FieldContext, FieldMatrix, inv_array, mat_rank
from .netmodel import Network, longest_path_edges, mincuts
from .rng import Stream

DEFAULT_SAMPLES = 32
DEFAULT_BUDGET = 10_000
RANK_PROBES = 8
SWEEP_WIDTH = 8

OFF_DIAGONAL = ((1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2))

# a = m12 m23 m31, b = m21 m13 m32
A_TERMS = ((1, 2), (2, 3), (3, 1))
B_TERMS = ((2, 1), (1, 3), (3, 2))

# numerator and denominator entries of the asymmetry functions
ASYMMETRY_FUNCTIONS = {
    "A2": (((1, 1), (3, 2)), ((1, 2), (3, 1))),
    "A3": (((2, 2), (3, 1)), ((2, 1), (3, 2))),
    "A4": (((3, 3), (2, 1)), ((2, 3), (3, 1))),
}


class MincutWarning(UserWarning):
    """A session has min-cut above one; the scheme still targets one unit."""


# ---------------------------------------------------------------- evaluators


class TransferModel:
    """Anything that evaluates the 3x3 transfer matrix at assignments.

    Subclasses set ``p`` and ``num_vars`` and implement ``evaluate_batch``
    and ``degree``.
    """

    p: int
    num_vars: int

    def evaluate_batch(self, xi: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``xi`` (shape (K, num_vars)); returns (K, 3, 3)."""
        raise NotImplementedError

    def degree(self, i: int, j: int) -> int:
        """Upper bound on the total degree of m_ij."""
        raise NotImplementedError


class NetworkModel(TransferModel):
    """Transfer functions of a :class:`Network` under the local-coefficient model."""

    def __init__(self, net: Network, p: Optional[int] = None):
        self.net = net if p is None else net.with_prime(p)
        self.p = self.net.field_prime
        index = self.net.coefficients
        self.num_vars = index.count
        sources = {v: j for j, v in enumerate(self.net.sources)}
        dests = {v: i for i, v in enumerate(self.net.destinations)}
        # ("inject", coef, edge, source) | ("relay", coef, in_edge, out_edge) | ("combine", coef, in_edge, dest)
        plan = []
        for c, coef in enumerate(index.entries):
            if coef.node in sources:
                plan.append(("inject", c, coef.out_edge, sources[coef.node]))
            elif coef.node in dests:
                plan.append(("combine", c, coef.in_edge, dests[coef.node]))
            else:
                plan.append(("relay", c, coef.in_edge, coef.out_edge))
        self._plan = plan
        self._degrees = {}
        for i, d in enumerate(self.net.destinations, start=1):
            for j, s in enumerate(self.net.sources, start=1):
                length = longest_path_edges(self.net, s, d)
                # a path of L edges carries L + 1 coefficients
                self._degrees[(i, j)] = length + 1 if length > 0 else 0

    def degree(self, i: int, j: int) -> int:
        return self._degrees[(i, j)]

    def evaluate_batch(self, xi: np.ndarray) -> np.ndarray:
        xi = _as_batch(xi, self.num_vars, self.p)
        k = xi.shape[0]
        p = self.p
        g = np.zeros((len(self.net.edges), k, 3), dtype=np.int64)
        out = np.zeros((k, 3, 3), dtype=np.int64)
        # coefficients are ordered topologically, so every in-edge is final before use
        for kind, c, a, b in self._plan:
            coef = xi[:, c, None]
            if kind == "inject":
                g[a, :, b] = xi[:, c]
            elif kind == "relay":
                g[b] = (g[b] + coef * g[a]) % p
            else:
                out[:, b, :] = (out[:, b, :] + coef * g[a]) % p
        return out


class VirtualTransferModel(TransferModel):
    """A model whose trivial off-diagonal entries are replaced by fresh variables.

    The extra variables (one per pair, in the given order) are appended after
    the base model's variables.
    """

    def __init__(self, base: TransferModel, pairs: Sequence[tuple[int, int]]):
        self.base = base
        self.pairs = tuple(tuple(q) for q in pairs)
        self.p = base.p
        self.num_vars = base.num_vars + len(self.pairs)

    def degree(self, i: int, j: int) -> int:
        return 1 if (i, j) in self.pairs else self.base.degree(i, j)

    def evaluate_batch(self, xi: np.ndarray) -> np.ndarray:
        xi = _as_batch(xi, self.num_vars, self.p)
        s = self.base.num_vars
        out = self.base.evaluate_batch(xi[:, :s])
        for k, (i, j) in enumerate(self.pairs):
            out[:, i - 1, j - 1] = xi[:, s + k]
        return out


def _as_batch(xi, num_vars: int, p: int) -> np.ndarray:
    arr = np.asarray(xi)
    if arr.dtype == object:
        arr = arr % p
    arr = arr.astype(np.int64) % p
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != num_vars:
        raise ValueError(f"assignment has {arr.shape[1]} entries, expected {num_vars}")
    return arr


def as_model(obj: Union[Network, TransferModel]) -> TransferModel:
    if isinstance(obj, TransferModel):
        return obj
    if isinstance(obj, Network):
        return NetworkModel(obj)
    raise TypeError(f"expected Network or TransferModel, got {type(obj).__name__}")


@dataclass(frozen=True)
class TransferEvaluation:
    """The transfer matrix at one assignment; ``values`` entry (i-1, j-1) is m_ij."""

    values: FieldMatrix
    assignment: tuple[int, ...]

    def m(self, i: int, j: int) -> int:
        return int(self.values.data[i - 1, j - 1])


def evaluate_transfer(net: Union[Network, TransferModel], xi: Sequence[int]) -> TransferEvaluation:
    model = as_model(net)
    batch = _as_batch(xi, model.num_vars, model.p)
    if batch.shape[0] != 1:
        raise ValueError("evaluate_transfer takes a single assignment")
    values = model.evaluate_batch(batch)[0]
    return TransferEvaluation(FieldMatrix(FieldContext(model.p), values), tuple(int(v) for v in batch[0]))


# ------------------------------------------------------------------ verdicts


class VerdictKind(str, Enum):
    CERTIFIED_NONZERO = "CertifiedNonzero"
    LIKELY_ZERO = "LikelyZero"
    CERTIFIED_DISTINCT = "CertifiedDistinct"
    LIKELY_PROPORTIONAL = "LikelyProportional"
    LIKELY_CONSTANT = "LikelyConstant"
    CERTIFIED_NONCONSTANT = "CertifiedNonconstant"
    CERTIFIED_ASYMMETRIC = "CertifiedAsymmetric"
    UNVERIFIED = "Unverified"


@dataclass(frozen=True)
class IdentityVerdict:
    """Outcome of one identity test.

    ``witness`` holds one assignment (nonzero certificates) or a pair of
    assignments; ``error_bound`` is set only for "Likely" kinds. ``target``
    records what was tested so the witness can be re-checked.
    """

    kind: VerdictKind
    target: tuple
    witness: Optional[tuple] = None
    error_bound: Optional[float] = None
    log2_error_bound: Optional[float] = None
    value: Optional[int] = None
    samples: int = 0

    @property
    def certified(self) -> bool:
        return self.kind.value.startswith("Certified")

    def to_json(self) -> dict:
        out = {"kind": self.kind.value, "target": list(self.target), "samples": self.samples}
        if self.witness is not None:
            out["witness"] = [list(w) for w in self.witness]
        if self.error_bound is not None:
            out["error_bound"] = self.error_bound
            out["log2_error_bound"] = self.log2_error_bound
        if self.value is not None:
            out["value"] = self.value
        return out


def _sz_bound(degree: int, p: int, samples: int) -> tuple[float, float]:
    """(bound, log2 bound) for ``samples`` all-vanishing draws of a degree-``degree`` polynomial."""
    ratio = min(1.0, max(degree, 1) / p)
    if ratio >= 1.0:
        return 1.0, 0.0
    log2 = samples * math.log2(ratio)
    return max(2.0**log2, 5e-324), log2


def _draw(model: TransferModel, seed: int, count: int, *labels) -> np.ndarray:
    stream = Stream(seed, *labels)
    return stream.field_elements(model.p, count * model.num_vars).reshape(count, model.num_vars)


def _entry(vals: np.ndarray, ij: tuple[int, int]) -> np.ndarray:
    return vals[:, ij[0] - 1, ij[1] - 1]


def _product(vals: np.ndarray, terms, p: int) -> np.ndarray:
    out = np.ones(vals.shape[0], dtype=np.int64)
    for ij in terms:
        out = out * _entry(vals, ij) % p
    return out


def _first(mask: np.ndarray) -> Optional[int]:
    hits = np.flatnonzero(mask)
    return int(hits[0]) if hits.size else None


def _check_pair(i: int, j: int) -> None:
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise ValueError(f"session indices must be in 1..3, got ({i}, {j})")


# --------------------------------------------------------------------- tests


def triviality_test(
    net: Union[Network, TransferModel], i: int, j: int, samples: int = DEFAULT_SAMPLES, rng_seed: int = 0
) -> IdentityVerdict:
    """Is m_ij identically zero?"""
    _check_pair(i, j)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    model = as_model(net)
    xi = _draw(model, rng_seed, samples, "triviality", i, j)
    vals = _entry(model.evaluate_batch(xi), (i, j))
    hit = _first(vals != 0)
    if hit is not None:
        return IdentityVerdict(
            VerdictKind.CERTIFIED_NONZERO, ("m", i, j), witness=(tuple(int(v) for v in xi[hit]),),
            value=int(vals[hit]), samples=samples,
        )
    bound, log2 = _sz_bound(model.degree(i, j), model.p, samples)
    return IdentityVerdict(
        VerdictKind.LIKELY_ZERO, ("m", i, j), error_bound=bound, log2_error_bound=log2, samples=samples
    )


def _require_nonzero(model: TransferModel, pairs, samples: int, rng_seed: int) -> None:
    for i, j in pairs:
        v = triviality_test(model, i, j, samples, rng_seed)
        if v.kind is not VerdictKind.CERTIFIED_NONZERO:
            raise PreconditionViolated(f"m{i}{j} is not certified nonzero")


def proportionality_test(
    net: Union[Network, TransferModel], i: int, j: int, samples: int = DEFAULT_SAMPLES, rng_seed: int = 0
) -> IdentityVerdict:
    """Is m_ii a constant multiple of m_ij?

    Compares cross products m_ii(xa) m_ij(xb) and m_ii(xb) m_ij(xa) over
    sampled assignment pairs.
    """
    _check_pair(i, j)
    if i == j:
        raise PreconditionViolated("proportionality needs i != j")
    model = as_model(net)
    _require_nonzero(model, [(i, i), (i, j)], samples, rng_seed)
    xi = _draw(model, rng_seed, 2 * samples, "proportionality", i, j)
    vals = model.evaluate_batch(xi)
    p = model.p
    d, o = _entry(vals, (i, i)), _entry(vals, (i, j))
    lhs = d[0::2] * o[1::2] % p
    rhs = d[1::2] * o[0::2] % p
    hit = _first(lhs != rhs)
    if hit is not None:
        w = (tuple(int(v) for v in xi[2 * hit]), tuple(int(v) for v in xi[2 * hit + 1]))
        return IdentityVerdict(VerdictKind.CERTIFIED_DISTINCT, ("A1", i, j), witness=w, samples=samples)
    deg = model.degree(i, i) + model.degree(i, j)
    bound, log2 = _sz_bound(deg, p, samples)
    ratio = None
    nz = _first(o != 0)
    if nz is not None:
        ratio = int(d[nz] * pow(int(o[nz]), -1, p) % p)
    return IdentityVerdict(
        VerdictKind.LIKELY_PROPORTIONAL, ("A1", i, j), error_bound=bound, log2_error_bound=log2,
        value=ratio, samples=samples,
    )


def ratio_constancy_test(
    net: Union[Network, TransferModel], samples: int = DEFAULT_SAMPLES, rng_seed: int = 0
) -> IdentityVerdict:
    """Is a/b = (m12 m23 m31)/(m21 m13 m32) a constant?"""
    model = as_model(net)
    _require_nonzero(model, OFF_DIAGONAL, samples, rng_seed)
    xi = _draw(model, rng_seed, 2 * samples, "ratio")
    vals = model.evaluate_batch(xi)
    p = model.p
    a = _product(vals, A_TERMS, p)
    b = _product(vals, B_TERMS, p)
    lhs = a[0::2] * b[1::2] % p
    rhs = a[1::2] * b[0::2] % p
    hit = _first(lhs != rhs)
    if hit is not None:
        w = (tuple(int(v) for v in xi[2 * hit]), tuple(int(v) for v in xi[2 * hit + 1]))
        return IdentityVerdict(VerdictKind.CERTIFIED_NONCONSTANT, ("ratio",), witness=w, samples=samples)
    deg = sum(model.degree(*ij) for ij in A_TERMS + B_TERMS)
    bound, log2 = _sz_bound(deg, p, samples)
    c = None
    nz = _first(b != 0)
    if nz is not None:
        c = int(a[nz] * pow(int(b[nz]), -1, p) % p)
    return IdentityVerdict(
        VerdictKind.LIKELY_CONSTANT, ("ratio",), error_bound=bound, log2_error_bound=log2, value=c,
        samples=samples,
    )


def asymmetry_certificate(
    net: Union[Network, TransferModel],
    which: str,
    budget: int = DEFAULT_BUDGET,
    rng_seed: int = 0,
    samples: int = DEFAULT_SAMPLES,
) -> IdentityVerdict:
    """Search for a certificate that the ``which`` function is not a rational function of a/b.

    If two assignments give the same value of h = a/b but different values
    of g, then g cannot be u(h)/v(h). Collisions of h are sought by fixing
    all coordinates but one, sweeping that coordinate over random values and
    bucketing by h; the free coordinate rotates round-robin. ``budget``
    caps the number of evaluated assignments. Points where b or the
    denominator of g vanishes are skipped. No certificate gives Unverified,
    never a violation.
    """
    if which not in ASYMMETRY_FUNCTIONS:
        raise ValueError(f"which must be one of {sorted(ASYMMETRY_FUNCTIONS)}")
    model = as_model(net)
    _require_nonzero(model, OFF_DIAGONAL, samples, rng_seed)
    num_terms, den_terms = ASYMMETRY_FUNCTIONS[which]
    p = model.p
    stream = Stream(rng_seed, "asymmetry", which)
    used = 0
    rnd = 0
    while used + SWEEP_WIDTH <= budget:
        coord = rnd % model.num_vars
        base = stream.field_elements(p, model.num_vars)
        sweep = stream.field_elements(p, SWEEP_WIDTH)
        xi = np.tile(base, (SWEEP_WIDTH, 1))
        xi[:, coord] = sweep
        used += SWEEP_WIDTH
        rnd += 1
        vals = model.evaluate_batch(xi)
        a = _product(vals, A_TERMS, p)
        b = _product(vals, B_TERMS, p)
        gn = _product(vals, num_terms, p)
        gd = _product(vals, den_terms, p)
        ok = (b != 0) & (gd != 0)
        h = a * inv_array(b, p) % p
        g = gn * inv_array(gd, p) % p
        seen: dict[int, int] = {}
        for k in np.flatnonzero(ok):
            hk = int(h[k])
            if hk in seen:
                first = seen[hk]
                if g[first] != g[k]:
                    w = (tuple(int(v) for v in xi[first]), tuple(int(v) for v in xi[k]))
                    return IdentityVerdict(
                        VerdictKind.CERTIFIED_ASYMMETRIC, (which,), witness=w, samples=used
                    )
            else:
                seen[hk] = int(k)
    return IdentityVerdict(VerdictKind.UNVERIFIED, (which,), samples=used)


def verify_witness(net: Union[Network, TransferModel], verdict: IdentityVerdict) -> bool:
    """Re-evaluate a certified verdict's witness from scratch."""
    if not verdict.certified:
        return False
    model = as_model(net)
    p = model.p
    vals = model.evaluate_batch(np.array(verdict.witness, dtype=np.int64))
    kind = verdict.kind
    if kind is VerdictKind.CERTIFIED_NONZERO:
        _, i, j = verdict.target
        return int(_entry(vals, (i, j))[0]) != 0
    if kind is VerdictKind.CERTIFIED_DISTINCT:
        _, i, j = verdict.target
        d, o = _entry(vals, (i, i)), _entry(vals, (i, j))
        return int(d[0]) * int(o[1]) % p != int(d[1]) * int(o[0]) % p
    a = _product(vals, A_TERMS, p)
    b = _product(vals, B_TERMS, p)
    if kind is VerdictKind.CERTIFIED_NONCONSTANT:
        return int(a[0]) * int(b[1]) % p != int(a[1]) * int(b[0]) % p
    num_terms, den_terms = ASYMMETRY_FUNCTIONS[verdict.target[0]]
    gn, gd = _product(vals, num_terms, p), _product(vals, den_terms, p)
    if not (b.all() and gd.all()):
        return False
    same_h = int(a[0]) * int(b[1]) % p == int(a[1]) * int(b[0]) % p
    diff_g = int(gn[0]) * int(gd[1]) % p != int(gn[1]) * int(gd[0]) % p
    return same_h and diff_g


def rank_probe(net: Union[Network, TransferModel], probes: int = RANK_PROBES, rng_seed: int = 0) -> int:
    """Largest rank of the transfer matrix over ``probes`` random assignments."""
    model = as_model(net)
    ctx = FieldContext(model.p)
    vals = model.evaluate_batch(_draw(model, rng_seed, probes, "rank"))
    return max(mat_rank(FieldMatrix(ctx, v)) for v in vals)


# ------------------------------------------------------------ classification


class CaseKind(str, Enum):
    GENERIC_RATIO = "CaseI_GenericRatio"
    CONSTANT_RATIO = "CaseI_ConstantRatio"
    CASE_II = "CaseII"
    DEGENERATE = "Degenerate_Rank1"
    BROKEN_A1 = "BrokenA1"


@dataclass(frozen=True)
class CaseTag:
    kind: CaseKind
    c_tilde: Optional[int] = None
    trivial_pairs: tuple[tuple[int, int], ...] = field(default=())
    pair: Optional[tuple[int, int]] = None

    def __post_init__(self):
        pairs = tuple(sorted(tuple(q) for q in self.trivial_pairs))
        object.__setattr__(self, "trivial_pairs", pairs)
        if self.kind is CaseKind.CASE_II:
            if not pairs:
                raise ValueError("CaseII needs at least one trivial pair")
            if any(i == j for i, j in pairs):
                raise ValueError("diagonal pairs cannot be trivial")

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.kind is CaseKind.CONSTANT_RATIO:
            out["c_tilde"] = self.c_tilde
        if self.kind is CaseKind.CASE_II:
            out["trivial_pairs"] = [list(q) for q in self.trivial_pairs]
        if self.kind is CaseKind.BROKEN_A1:
            out["pair"] = list(self.pair)
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "CaseTag":
        kind = CaseKind(doc["kind"])
        return cls(
            kind,
            c_tilde=doc.get("c_tilde"),
            trivial_pairs=tuple(tuple(q) for q in doc.get("trivial_pairs", ())),
            pair=tuple(doc["pair"]) if doc.get("pair") else None,
        )

    def __str__(self) -> str:
        if self.kind is CaseKind.CONSTANT_RATIO:
            return f"{self.kind.value}(c~={self.c_tilde})"
        if self.kind is CaseKind.CASE_II:
            return f"{self.kind.value}({', '.join(f'({i},{j})' for i, j in self.trivial_pairs)})"
        if self.kind is CaseKind.BROKEN_A1:
            return f"{self.kind.value}{self.pair}"
        return self.kind.value


def _check_mincuts(net: Network) -> tuple[int, int, int]:
    cuts = mincuts(net)
    for i, c in enumerate(cuts, start=1):
        if c == 0:
            raise MincutViolation(f"session {i} has min-cut 0 (no S{i}->D{i} path)")
        if c > 1:
            warnings.warn(
                f"session {i} has min-cut {c}; the scheme still targets about half of one unit",
                MincutWarning,
                stacklevel=3,
            )
    return cuts


def classify(
    net: Union[Network, TransferModel], rng_seed: int = 0, samples: int = DEFAULT_SAMPLES
) -> CaseTag:
    """Decide which construction applies to the network.

    Order of checks: diagonal triviality (error), A1 on nonzero off-diagonal
    pairs, rank probe, trivial off-diagonal pairs, ratio constancy.
    """
    if isinstance(net, Network):
        _check_mincuts(net)
    model = as_model(net)
    triv = {
        (i, j): triviality_test(model, i, j, samples, rng_seed) for i in (1, 2, 3) for j in (1, 2, 3)
    }
    for i in (1, 2, 3):
        if triv[(i, i)].kind is VerdictKind.LIKELY_ZERO:
            raise MincutViolation(f"m{i}{i} tests identically zero")
    trivial = [ij for ij in OFF_DIAGONAL if triv[ij].kind is VerdictKind.LIKELY_ZERO]
    for i, j in OFF_DIAGONAL:
        if (i, j) in trivial:
            continue
        if proportionality_test(model, i, j, samples, rng_seed).kind is VerdictKind.LIKELY_PROPORTIONAL:
            return CaseTag(CaseKind.BROKEN_A1, pair=(i, j))
    if rank_probe(model, RANK_PROBES, rng_seed) <= 1:
        return CaseTag(CaseKind.DEGENERATE)
    if trivial:
        return CaseTag(CaseKind.CASE_II, trivial_pairs=tuple(trivial))
    ratio = ratio_constancy_test(model, samples, rng_seed)
    if ratio.kind is VerdictKind.CERTIFIED_NONCONSTANT:
        return CaseTag(CaseKind.GENERIC_RATIO)
    return CaseTag(CaseKind.CONSTANT_RATIO, c_tilde=ratio.value)


def analyze(
    net: Network, rng_seed: int = 0, samples: int = DEFAULT_SAMPLES, budget: int = DEFAULT_BUDGET
) -> dict:
    """Full analysis report (the document written by ``ianc analyze``).

    For CaseII networks the asymmetry searches run on the virtualized model,
    where each trivial entry is replaced by a fresh variable.
    """
    cuts = _check_mincuts(net)
    model = NetworkModel(net)
    tag = classify(net, rng_seed, samples)
    triv = [
        [triviality_test(model, i, j, samples, rng_seed) for j in (1, 2, 3)] for i in (1, 2, 3)
    ]
    a1: list[list[Optional[dict]]] = [[None] * 3 for _ in range(3)]
    bounds: dict[str, float] = {}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            t = triv[i - 1][j - 1]
            if t.error_bound is not None:
                bounds[f"m{i}{j}"] = t.error_bound
            if i != j and t.kind is VerdictKind.CERTIFIED_NONZERO:
                v = proportionality_test(model, i, j, samples, rng_seed)
                a1[i - 1][j - 1] = v.to_json()
                if v.error_bound is not None:
                    bounds[f"A1_{i}{j}"] = v.error_bound
    ratio = None
    alignment_model: TransferModel = model
    if tag.kind is CaseKind.CASE_II:
        alignment_model = VirtualTransferModel(model, tag.trivial_pairs)
    elif tag.kind is not CaseKind.BROKEN_A1:
        r = ratio_constancy_test(model, samples, rng_seed)
        ratio = r.to_json()
        if r.error_bound is not None:
            bounds["ratio"] = r.error_bound
    asym = None
    if tag.kind is not CaseKind.BROKEN_A1:
        asym = {
            w: asymmetry_certificate(alignment_model, w, budget, rng_seed, samples).to_json()
            for w in ("A2", "A3", "A4")
        }
    return {
        "version": __version__,
        "network_digest": net.digest,
        "field_prime": net.field_prime,
        "seed": rng_seed,
        "samples": samples,
        "budget": budget,
        "case": tag.to_json(),
        "mincuts": list(cuts),
        "max_rank": rank_probe(model, RANK_PROBES, rng_seed),
        "triviality": [[v.to_json() for v in row] for row in triv],
        "a1": a1,
        "ratio": ratio,
        "asymmetry": asym,
        "error_bounds": bounds,
    }
