"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's own algorithms: paths are
enumerated explicitly, cuts by brute force over edge subsets, and ranks from
determinants of minors computed by cofactor expansion.
"""

from __future__ import annotations

import itertools
import random
from pathlib import Path

import pytest

from ianc.netmodel import COMBINE, INJECT, Network, Session, load_network

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FIXTURE_NAMES = ("bottleneck", "dualrelay", "partial", "bypass")


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


def load_fixture(name: str) -> Network:
    return load_network(fixture_path(name))


@pytest.fixture(scope="session")
def nets() -> dict[str, Network]:
    return {name: load_fixture(name) for name in FIXTURE_NAMES}


def three_sessions(edges, extra_nodes=(), p: int = 2147483647) -> Network:
    nodes = ["S1", "S2", "S3", *extra_nodes, "D1", "D2", "D3"]
    sessions = [Session(f"S{i}", f"D{i}") for i in (1, 2, 3)]
    return Network(tuple(nodes), tuple(edges), tuple(sessions), p)


# ------------------------------------------------------------ path oracle


def all_paths(net: Network, src: str, dst: str) -> list[list[int]]:
    """Every src -> dst path as a list of edge indices (DFS)."""
    out: list[list[int]] = []

    def walk(v: str, acc: list[int]):
        if v == dst:
            out.append(list(acc))
            return
        for k, (tail, head) in enumerate(net.edges):
            if tail == v:
                acc.append(k)
                walk(head, acc)
                acc.pop()

    walk(src, [])
    return out


def path_sum(net: Network, xi, i: int, j: int, p: int) -> int:
    """m_ij as the sum over S_j -> D_i paths of the product of local coefficients."""
    idx = net.coefficients
    src = net.sessions[j - 1].source
    dst = net.sessions[i - 1].destination
    total = 0
    for path in all_paths(net, src, dst):
        term = int(xi[idx.index_of(src, INJECT, path[0])])
        for e_in, e_out in zip(path, path[1:]):
            term = term * int(xi[idx.index_of(net.edges[e_in][1], e_in, e_out)]) % p
        term = term * int(xi[idx.index_of(dst, path[-1], COMBINE)]) % p
        total = (total + term) % p
    return total


def symbolic_transfer(net: Network):
    """3x3 nested list of sympy polynomials via the path-sum definition."""
    import sympy

    xs = sympy.symbols(f"x0:{net.s}")

    def entry(i, j):
        src = net.sessions[j - 1].source
        dst = net.sessions[i - 1].destination
        idx = net.coefficients
        total = sympy.Integer(0)
        for path in all_paths(net, src, dst):
            term = xs[idx.index_of(src, INJECT, path[0])]
            for e_in, e_out in zip(path, path[1:]):
                term *= xs[idx.index_of(net.edges[e_in][1], e_in, e_out)]
            term *= xs[idx.index_of(dst, path[-1], COMBINE)]
            total += term
        return sympy.expand(total)

    return xs, [[entry(i, j) for j in (1, 2, 3)] for i in (1, 2, 3)]


# ------------------------------------------------------------- cut oracle


def _reaches(edges, removed: set[int], src: str, dst: str) -> bool:
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        for k, (tail, head) in enumerate(edges):
            if k not in removed and tail == v and head not in seen:
                seen.add(head)
                stack.append(head)
    return False


def brute_mincut(net: Network, session: int) -> int:
    """Smallest edge subset whose removal disconnects S_i from D_i."""
    src = net.sessions[session - 1].source
    dst = net.sessions[session - 1].destination
    m = len(net.edges)
    for size in range(m + 1):
        for cut in itertools.combinations(range(m), size):
            if not _reaches(net.edges, set(cut), src, dst):
                return size
    return m


def random_dag(rng: random.Random, max_edges: int = 12) -> Network:
    """Random valid three-session DAG with at most ``max_edges`` edges."""
    relays = [f"r{k}" for k in range(rng.randint(0, 3))]
    order = ["S1", "S2", "S3", *relays, "D1", "D2", "D3"]
    candidates = []
    for a, b in itertools.combinations(range(len(order)), 2):
        u, v = order[a], order[b]
        if v.startswith("S") or u.startswith("D"):
            continue
        candidates.append((u, v))
    edges = [rng.choice(candidates) for _ in range(rng.randint(1, max_edges))]
    return three_sessions(edges, relays)


# ------------------------------------------------------------ rank oracle


def det_mod(rows: list[list[int]], p: int) -> int:
    """Determinant by cofactor expansion along the first row."""
    k = len(rows)
    if k == 1:
        return rows[0][0] % p
    total = 0
    for c in range(k):
        if rows[0][c] % p == 0:
            continue
        minor = [r[:c] + r[c + 1 :] for r in rows[1:]]
        sign = -1 if c % 2 else 1
        total += sign * rows[0][c] * det_mod(minor, p)
    return total % p


def minor_rank(a: list[list[int]], p: int) -> int:
    """Largest k with a nonzero k x k minor."""
    m, n = len(a), len(a[0]) if a else 0
    for k in range(min(m, n), 0, -1):
        for rs in itertools.combinations(range(m), k):
            for cs in itertools.combinations(range(n), k):
                if det_mod([[a[r][c] for c in cs] for r in rs], p):
                    return k
    return 0
