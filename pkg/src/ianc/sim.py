"""End-to-end simulation: encode, push symbols edge by edge, decode, count.

Propagation here does not use transfer matrices at all. Each channel use
moves one symbol per edge in topological order, so agreement between
:func:`propagate` and the block model built from
:func:`ianc.transfer.evaluate_transfer` is an independent check of both.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from .align import CodeDesign, SymbolExtension, message_lengths
from .errors import DigestMismatch, DimensionMismatch
from .gf import mod_matmul
from .netmodel import COMBINE, INJECT, Network
from .rng import Stream

CHUNK = 64


@dataclass(frozen=True)
class MessageBlock:
    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray
    index: int = 0

    def z(self, i: int) -> np.ndarray:
        return (self.z1, self.z2, self.z3)[i - 1]


def random_messages(design: CodeDesign, seed: int, block: int) -> MessageBlock:
    """Messages for block ``block``, drawn from the stream (seed, "block", block)."""
    n = design.n
    vals = Stream(seed, "block", block).field_elements(design.p, 3 * n + 1)
    return MessageBlock(vals[: n + 1], vals[n + 1 : 2 * n + 1], vals[2 * n + 1 :], block)


def encode_block(msg: MessageBlock, design: CodeDesign) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """x_i = V_i z_i for the three sources.

    Each z_i may carry a leading batch dimension, i.e. shape (m,) or (B, m).
    """
    out = []
    for i, m in zip((1, 2, 3), message_lengths(design.n)):
        z = np.asarray(msg.z(i), dtype=np.int64) % design.p
        if z.shape[-1] != m:
            raise DimensionMismatch(f"z{i} has length {z.shape[-1]}, expected {m}")
        v = design.V(i).data
        out.append(mod_matmul(z, v.T, design.p) if z.ndim > 1 else mod_matmul(v, z[:, None], design.p)[:, 0])
    return tuple(out)


def propagate(
    net: Network,
    z: Union[SymbolExtension, np.ndarray],
    inputs: Sequence[np.ndarray],
    p: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Simulate one block of channel uses symbol by symbol.

    Args:
        net: the network.
        z: per-channel-use coefficient assignments, shape (L, s).
        inputs: x1, x2, x3, each of shape (L,) or (B, L).
        p: field modulus; defaults to the extension's or the network's.

    Returns:
        y1, y2, y3 with the same shape as the inputs.
    """
    if isinstance(z, SymbolExtension):
        p = z.p if p is None else p
        z = z.z
    p = net.field_prime if p is None else p
    z = np.asarray(z, dtype=np.int64) % p
    length = z.shape[0]
    xs = [np.asarray(x, dtype=np.int64) % p for x in inputs]
    if len(xs) != 3 or any(x.shape[-1] != length for x in xs):
        raise DimensionMismatch(f"inputs must be three arrays with last dimension {length}")
    shape = np.broadcast_shapes(*(x.shape for x in xs))
    index = net.coefficients
    src = {v: j for j, v in enumerate(net.sources)}
    dst = {v: i for i, v in enumerate(net.destinations)}
    symbol: dict[int, np.ndarray] = {}
    outputs = [np.zeros(shape, dtype=np.int64) for _ in range(3)]
    for v in net.topo_order:
        if v in src:
            for e in net.out_edges[v]:
                symbol[e] = z[:, index.index_of(v, INJECT, e)] * xs[src[v]] % p
        elif v in dst:
            acc = outputs[dst[v]]
            for f in net.in_edges[v]:
                acc = (acc + z[:, index.index_of(v, f, COMBINE)] * symbol[f]) % p
            outputs[dst[v]] = acc
        else:
            for e in net.out_edges[v]:
                acc = np.zeros(shape, dtype=np.int64)
                for f in net.in_edges[v]:
                    acc = (acc + z[:, index.index_of(v, f, e)] * symbol[f]) % p
                symbol[e] = acc
    return tuple(np.broadcast_to(y, shape).copy() for y in outputs)


def decode_block(y: np.ndarray, design: CodeDesign, session: int) -> np.ndarray:
    """Zero-forcing decode: the first len(z_i) entries of W_i y_i."""
    y = np.asarray(y, dtype=np.int64) % design.p
    w = design.W[session - 1].data
    keep = message_lengths(design.n)[session - 1]
    if y.ndim > 1:
        return mod_matmul(y, w.T, design.p)[..., :keep]
    return mod_matmul(w, y[:, None], design.p)[:keep, 0]


@dataclass(frozen=True)
class SimulationReport:
    blocks: int
    successes: tuple[int, int, int]
    rates: Optional[tuple[Fraction, Fraction, Fraction]]
    first_failure: Optional[int]
    seed: int
    n: int
    p: int
    network_digest: str

    def to_json(self) -> dict:
        return {
            "version": __version__,
            "network_digest": self.network_digest,
            "n": self.n,
            "p": self.p,
            "seed": self.seed,
            "blocks": self.blocks,
            "successes": list(self.successes),
            "rates": None if self.rates is None else [[r.numerator, r.denominator] for r in self.rates],
            "target_rates": [[m, 2 * self.n + 1] for m in message_lengths(self.n)],
            "first_failure": self.first_failure,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"


def _run_chunk(net: Network, design: CodeDesign, seed: int, start: int, stop: int):
    msgs = [random_messages(design, seed, b) for b in range(start, stop)]
    batch = MessageBlock(*(np.stack([m.z(i) for m in msgs]) for i in (1, 2, 3)))
    xs = encode_block(batch, design)
    ys = propagate(net, design.z, xs, p=design.p)
    ok = []
    for i in (1, 2, 3):
        got = decode_block(ys[i - 1], design, i)
        ok.append(np.all(got == batch.z(i), axis=1))
    return start, np.stack(ok)  # (3, chunk)


def run_simulation(
    net: Network, design: CodeDesign, blocks: int, rng_seed: int = 0, workers: int = 1
) -> SimulationReport:
    """Send ``blocks`` random message blocks through the network and count exact decodes.

    A block counts for session i when z_i is recovered exactly; rates are
    successes * len(z_i) / (blocks * (2n+1)).
    """
    if design.network_digest != net.digest:
        raise DigestMismatch("design was built for a different network")
    if blocks < 0:
        raise ValueError("blocks must be >= 0")
    spans = [(a, min(a + CHUNK, blocks)) for a in range(0, blocks, CHUNK)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda s: _run_chunk(net, design, rng_seed, *s), spans))
    else:
        parts = [_run_chunk(net, design, rng_seed, *s) for s in spans]
    successes = [0, 0, 0]
    first_failure = None
    for start, ok in sorted(parts, key=lambda x: x[0]):
        for i in range(3):
            successes[i] += int(ok[i].sum())
        bad = np.flatnonzero(~ok.all(axis=0))
        if bad.size and first_failure is None:
            first_failure = start + int(bad[0])
    rates = None
    if blocks:
        lengths = message_lengths(design.n)
        rates = tuple(
            Fraction(successes[i] * lengths[i], blocks * design.length) for i in range(3)
        )
    return SimulationReport(
        blocks=blocks, successes=tuple(successes), rates=rates, first_failure=first_failure,
        seed=rng_seed, n=design.n, p=design.p, network_digest=net.digest,
    )
