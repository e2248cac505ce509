"""Three-unicast DAG model: parsing, validation, min-cuts, coefficient index.

Every link carries one F_p symbol per channel use. Each node forms its
outgoing symbols as linear combinations of its incoming symbols, with one
local coefficient per (input slot, output slot) pair:

* a source has one *injection* coefficient per out-edge (input slot
  ``INJECT``),
* a relay has one coefficient per (in-edge, out-edge) pair,
* a destination has one *combining* coefficient per in-edge (output slot
  ``COMBINE``), producing its scalar output.

These coefficients are the variables xi_1..xi_s of the transfer functions.
"""

from __future__ import annotations

import hashlib
import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

from .errors import ParseError, ValidationError
from .gf import FieldContext

INJECT = None
COMBINE = None

_KEYS = {"field_prime", "nodes", "edges", "sessions"}


@dataclass(frozen=True)
class Session:
    source: str
    destination: str


@dataclass(frozen=True)
class Coefficient:
    """One local coding coefficient.

    ``in_edge`` is None for a source injection, ``out_edge`` is None for a
    destination combination; otherwise both are indices into ``Network.edges``.
    """

    node: str
    in_edge: Optional[int]
    out_edge: Optional[int]


@dataclass(frozen=True)
class CoefficientIndex:
    entries: tuple[Coefficient, ...]
    position: dict = field(compare=False, repr=False)

    @property
    def count(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def index_of(self, node: str, in_edge: Optional[int], out_edge: Optional[int]) -> int:
        return self.position[(node, in_edge, out_edge)]


@dataclass(frozen=True)
class Network:
    """A validated three-session DAG with unit-capacity links.

    Node identifiers are case-sensitive; parallel edges are distinct slots.
    Sessions are 1-based in every public API (session 1 is ``sessions[0]``).
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    sessions: tuple[Session, ...]
    field_prime: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "sessions", tuple(self.sessions))
        _validate(self)

    @cached_property
    def field(self) -> FieldContext:
        return FieldContext(self.field_prime)

    @cached_property
    def in_edges(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {v: [] for v in self.nodes}
        for k, (_, head) in enumerate(self.edges):
            out[head].append(k)
        return out

    @cached_property
    def out_edges(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {v: [] for v in self.nodes}
        for k, (tail, _) in enumerate(self.edges):
            out[tail].append(k)
        return out

    @cached_property
    def topo_order(self) -> tuple[str, ...]:
        order = _topological_order(self.nodes, self.edges)
        assert order is not None
        return order

    @cached_property
    def sources(self) -> tuple[str, ...]:
        return tuple(s.source for s in self.sessions)

    @cached_property
    def destinations(self) -> tuple[str, ...]:
        return tuple(s.destination for s in self.sessions)

    @cached_property
    def coefficients(self) -> CoefficientIndex:
        return coefficient_index(self)

    @property
    def s(self) -> int:
        return len(self.coefficients)

    def with_prime(self, p: int) -> "Network":
        if p == self.field_prime:
            return self
        return Network(self.nodes, self.edges, self.sessions, p)

    def to_document(self) -> dict:
        return {
            "field_prime": self.field_prime,
            "nodes": list(self.nodes),
            "edges": [list(e) for e in self.edges],
            "sessions": [{"source": s.source, "destination": s.destination} for s in self.sessions],
        }

    @cached_property
    def digest(self) -> str:
        """SHA-256 of the canonical (key-sorted, whitespace-free) document."""
        return hashlib.sha256(serialize_network(self).encode("utf-8")).hexdigest()


def _topological_order(nodes, edges) -> Optional[tuple[str, ...]]:
    # Kahn's algorithm; ties broken by position in the node list
    rank = {v: k for k, v in enumerate(nodes)}
    indeg = {v: 0 for v in nodes}
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for tail, head in edges:
        indeg[head] += 1
        succ[tail].append(head)
    ready = [(rank[v], v) for v in nodes if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, v = heapq.heappop(ready)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, (rank[w], w))
    if len(order) != len(nodes):
        return None
    return tuple(order)


def _validate(net: Network) -> None:
    if len(set(net.nodes)) != len(net.nodes):
        raise ValidationError("duplicate node identifiers")
    known = set(net.nodes)
    for tail, head in net.edges:
        if tail not in known or head not in known:
            raise ValidationError(f"edge {tail}->{head} has an endpoint not in the node list")
        if tail == head:
            raise ValidationError(f"self-loop at {tail}")
    if len(net.sessions) != 3:
        raise ValidationError(f"exactly 3 sessions required, got {len(net.sessions)}")
    endpoints = [v for s in net.sessions for v in (s.source, s.destination)]
    for v in endpoints:
        if v not in known:
            raise ValidationError(f"session endpoint {v!r} is not a node")
    if len(set(endpoints)) != 6:
        raise ValidationError("the six session endpoints must be distinct nodes")
    sources = {s.source for s in net.sessions}
    dests = {s.destination for s in net.sessions}
    for tail, head in net.edges:
        if head in sources:
            raise ValidationError(f"source {head} has an incoming edge from {tail}")
        if tail in dests:
            raise ValidationError(f"destination {tail} has an outgoing edge to {head}")
    if _topological_order(net.nodes, net.edges) is None:
        raise ValidationError("graph contains a cycle")
    try:
        FieldContext(net.field_prime)
    except ValidationError as exc:
        raise ValidationError(f"field_prime: {exc}") from None


def parse_network(document: str) -> Network:
    """Parse and validate a JSON network description."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None
    return network_from_document(doc)


def network_from_document(doc) -> Network:
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    missing = _KEYS - doc.keys()
    if missing:
        raise ParseError(f"missing keys: {sorted(missing)}")
    extra = doc.keys() - _KEYS
    if extra:
        raise ParseError(f"unknown keys: {sorted(extra)}")
    prime = doc["field_prime"]
    if not isinstance(prime, int) or isinstance(prime, bool):
        raise ParseError("field_prime must be an integer")
    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(v, str) for v in nodes):
        raise ParseError("nodes must be an array of strings")
    edges = doc["edges"]
    if not isinstance(edges, list) or not all(
        isinstance(e, list) and len(e) == 2 and all(isinstance(v, str) for v in e) for e in edges
    ):
        raise ParseError("edges must be an array of [tail, head] string pairs")
    sessions = doc["sessions"]
    if not isinstance(sessions, list) or not all(
        isinstance(s, dict)
        and set(s) == {"source", "destination"}
        and all(isinstance(v, str) for v in s.values())
        for s in sessions
    ):
        raise ParseError('sessions must be an array of {"source", "destination"} objects')
    return Network(
        nodes=tuple(nodes),
        edges=tuple((t, h) for t, h in edges),
        sessions=tuple(Session(s["source"], s["destination"]) for s in sessions),
        field_prime=prime,
    )


def serialize_network(net: Network) -> str:
    return json.dumps(net.to_document(), sort_keys=True, separators=(",", ":"))


def load_network(path: str | Path) -> Network:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    return parse_network(text)


def coefficient_index(net: Network) -> CoefficientIndex:
    """Enumerate the local coefficients in deterministic order.

    Nodes are visited in topological order (ties by node-list position);
    within a node, slots are ordered by in-edge then out-edge position in
    the edge list. Injection slots precede edges; combination slots follow.
    """
    sources = set(net.sources)
    dests = set(net.destinations)
    entries: list[Coefficient] = []
    for v in net.topo_order:
        ins: list[Optional[int]] = [INJECT] if v in sources else list(net.in_edges[v])
        outs: list[Optional[int]] = [COMBINE] if v in dests else list(net.out_edges[v])
        for e_in in ins:
            for e_out in outs:
                entries.append(Coefficient(v, e_in, e_out))
    position = {(c.node, c.in_edge, c.out_edge): k for k, c in enumerate(entries)}
    return CoefficientIndex(tuple(entries), position)


def mincut(net: Network, session: int) -> int:
    """Edge-disjoint S_i -> D_i path count (unit capacities), by BFS augmenting paths."""
    src = net.sessions[session - 1].source
    dst = net.sessions[session - 1].destination
    # residual graph as arc list: arc 2k is edge k, arc 2k+1 its reverse
    cap: list[int] = []
    head: list[str] = []
    adj: dict[str, list[int]] = {v: [] for v in net.nodes}
    for tail, h in net.edges:
        adj[tail].append(len(cap))
        cap.append(1)
        head.append(h)
        adj[h].append(len(cap))
        cap.append(0)
        head.append(tail)
    flow = 0
    while True:
        parent_arc: dict[str, int] = {src: -1}
        queue = deque([src])
        while queue and dst not in parent_arc:
            u = queue.popleft()
            for a in adj[u]:
                w = head[a]
                if cap[a] > 0 and w not in parent_arc:
                    parent_arc[w] = a
                    queue.append(w)
        if dst not in parent_arc:
            return flow
        v = dst
        while v != src:
            a = parent_arc[v]
            cap[a] -= 1
            cap[a ^ 1] += 1
            v = head[a ^ 1]
        flow += 1


def mincuts(net: Network) -> tuple[int, int, int]:
    return tuple(mincut(net, i) for i in (1, 2, 3))


def longest_path_edges(net: Network, src: str, dst: str) -> int:
    """Edge count of the longest src -> dst path, or -1 when unreachable."""
    best: dict[str, int] = {v: -1 for v in net.nodes}
    best[src] = 0
    for v in net.topo_order:
        if best[v] < 0:
            continue
        for k in net.out_edges[v]:
            h = net.edges[k][1]
            best[h] = max(best[h], best[v] + 1)
    return best[dst]
