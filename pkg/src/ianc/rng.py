"""Seedable counter-based random streams (SplitMix64).

Every random draw in the package comes from a :class:`Stream`. A stream is
fully described by a 64-bit key; output ``k`` (1-based) is
``mix64(key + k * GOLDEN mod 2**64)``, which is exactly the SplitMix64
sequence started from state ``key``. Independent sub-streams are obtained
with :func:`derive_seed`, so results never depend on evaluation order or on
how work is split across threads.

Labels
    An int label contributes ``label mod 2**64``. A str label contributes the
    first 8 bytes (little-endian) of its UTF-8 SHA-256 digest.

Derivation
    ``s = seed mod 2**64``; for each label ``l``:
    ``s = mix64(s XOR mix64(word(l) + GOLDEN))``.

Field elements
    Uniform values in ``[0, p)`` use rejection sampling: a 64-bit output
    ``x`` is accepted when ``x < 2**64 - (2**64 mod p)`` and mapped to
    ``x mod p``; rejected outputs are skipped.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def label_word(label: int | str) -> int:
    if isinstance(label, str):
        return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")
    return int(label) & MASK


def derive_seed(seed: int, *labels: int | str) -> int:
    """Mix ``labels`` into ``seed`` to get the key of an independent stream."""
    s = int(seed) & MASK
    for label in labels:
        s = mix64(s ^ mix64(label_word(label) + GOLDEN))
    return s


class Stream:
    """A SplitMix64 stream with an explicit draw counter."""

    def __init__(self, seed: int, *labels: int | str):
        self.key = derive_seed(seed, *labels) if labels else int(seed) & MASK
        self.counter = 0

    def substream(self, *labels: int | str) -> "Stream":
        out = Stream(0)
        out.key = derive_seed(self.key, *labels)
        return out

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.key + self.counter * GOLDEN)

    def u64s(self, count: int) -> np.ndarray:
        """Next ``count`` raw outputs as a uint64 array."""
        ctr = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        with np.errstate(over="ignore"):
            z = np.uint64(self.key) + ctr * np.uint64(GOLDEN)
            return _mix64_array(z)

    def field_elements(self, p: int, count: int) -> np.ndarray:
        """``count`` uniform elements of F_p (int64), by rejection sampling."""
        limit = (1 << 64) - ((1 << 64) % p)
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            need = count - filled
            raw = self.u64s(need)
            if limit <= MASK:
                raw = raw[raw < np.uint64(limit)]
            vals = (raw % np.uint64(p)).astype(np.int64)
            out[filled : filled + len(vals)] = vals
            filled += len(vals)
        return out

    def field_element(self, p: int) -> int:
        return int(self.field_elements(p, 1)[0])

    def nonzero_element(self, p: int) -> int:
        while True:
            v = self.field_element(p)
            if v:
                return v
