"""Compact metric graphs with delta-type vertex conditions, plus surgery.

A graph is a finite set of vertices, each carrying a vertex condition
(Delta(alpha) with alpha=0 meaning Neumann-Kirchhoff, or Dirichlet at a
degree-1 vertex), and a finite set of edges with strictly positive lengths.
Looping edges (u == v) and parallel edges are allowed; a looping edge counts
twice toward the degree of its vertex.

All values are immutable; every operation returns a new graph.  Construction
validates id uniqueness, positive finite lengths, the Dirichlet degree rule
and (unless explicitly waived by surgery) connectivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AlphaSumMismatch,
    DirichletAtInternalVertex,
    DirichletGlue,
    DisconnectedGraph,
    DuplicateId,
    EpsilonTooLarge,
    NonpositiveLength,
    OffsetOutOfRange,
    ParseError,
    PartitionNotCovering,
    UnknownId,
    ValidationError,
)

DIRICHLET = "dirichlet"
DELTA = "delta"


@dataclass(frozen=True)
class VertexCondition:
    """Vertex condition: Delta(alpha) or Dirichlet.

    Delta(0) is the Neumann-Kirchhoff (NK) condition; Dirichlet is the
    alpha = infinity limit and is only legal at vertices of degree 1.
    """

    kind: str  # DELTA or DIRICHLET
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in (DELTA, DIRICHLET):
            raise ValidationError(f"unknown condition kind {self.kind!r}")
        if self.kind == DELTA and not math.isfinite(self.alpha):
            raise ValidationError("delta coefficient must be finite")

    @property
    def is_dirichlet(self) -> bool:
        return self.kind == DIRICHLET

    @property
    def is_nk(self) -> bool:
        return self.kind == DELTA and self.alpha == 0.0

    @property
    def is_robin(self) -> bool:
        return self.kind == DELTA and self.alpha != 0.0


def nk() -> VertexCondition:
    return VertexCondition(DELTA, 0.0)


def delta(alpha: float) -> VertexCondition:
    return VertexCondition(DELTA, float(alpha))


def dirichlet() -> VertexCondition:
    return VertexCondition(DIRICHLET, math.inf)


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: float

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def other_end(self, vertex: str) -> str:
        return self.v if vertex == self.u else self.u


@dataclass(frozen=True)
class LoopDescriptor:
    """A cycle closing on one attachment vertex through degree-2 vertices.

    ``edge_chain`` is ordered along the walk starting and ending at the
    attachment vertex; ``orientations[i]`` is True when the walk traverses
    edge i in its stored u -> v direction.  A bare looping edge is the n = 0
    case (no intermediate vertices).  Purity ignores the attachment vertex.
    """

    attachment_vertex: str
    edge_chain: tuple[str, ...]
    orientations: tuple[bool, ...]
    total_length: float
    pure: bool


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[tuple[str, VertexCondition], ...]
    edges: tuple[Edge, ...]
    is_connected: bool = True

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_parts(
        cls,
        vertices: Iterable[tuple[str, VertexCondition]],
        edges: Iterable[tuple[str, str, str, float]],
        allow_disconnected: bool = False,
    ) -> "MetricGraph":
        vlist = tuple((str(i), c) for i, c in vertices)
        elist = tuple(Edge(str(i), str(u), str(v), float(l)) for i, u, v, l in edges)

        vids = [i for i, _ in vlist]
        if len(set(vids)) != len(vids):
            raise DuplicateId("duplicate vertex id")
        eids = [e.id for e in elist]
        if len(set(eids)) != len(eids):
            raise DuplicateId("duplicate edge id")
        if set(vids) & set(eids):
            raise DuplicateId("vertex and edge ids must not collide")
        if not elist:
            raise ValidationError("graph needs at least one edge")

        vset = set(vids)
        for e in elist:
            if e.u not in vset or e.v not in vset:
                raise UnknownId(f"edge {e.id} references unknown vertex")
            if not (e.length > 0.0 and math.isfinite(e.length)):
                raise NonpositiveLength(f"edge {e.id} has length {e.length}")

        g = cls(vlist, elist, is_connected=True)
        deg = g.degrees()
        for vid, cond in vlist:
            if deg[vid] == 0:
                raise DisconnectedGraph(f"vertex {vid} is isolated")
            if cond.is_dirichlet and deg[vid] != 1:
                raise DirichletAtInternalVertex(
                    f"Dirichlet condition at {vid} of degree {deg[vid]}"
                )
        connected = g._connected()
        if not connected and not allow_disconnected:
            raise DisconnectedGraph("graph is not connected")
        return replace(g, is_connected=connected)

    def _connected(self) -> bool:
        adj: dict[str, set[str]] = {i: set() for i, _ in self.vertices}
        for e in self.edges:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        start = self.vertices[0][0]
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    # -- basic queries ---------------------------------------------------------

    def condition(self, vid: str) -> VertexCondition:
        for i, c in self.vertices:
            if i == vid:
                return c
        raise UnknownId(f"no vertex {vid}")

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise UnknownId(f"no edge {eid}")

    def edge_index(self, eid: str) -> int:
        for j, e in enumerate(self.edges):
            if e.id == eid:
                return j
        raise UnknownId(f"no edge {eid}")

    def vertex_ids(self) -> list[str]:
        return [i for i, _ in self.vertices]

    def degrees(self) -> dict[str, int]:
        deg = {i: 0 for i, _ in self.vertices}
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1  # loop counted twice at its vertex
        return deg

    def edge_ends_at(self, vid: str) -> list[tuple[int, int]]:
        """Edge-ends (edge index, end) at vid; end 0 is the u-end."""
        out = []
        for j, e in enumerate(self.edges):
            if e.u == vid:
                out.append((j, 0))
            if e.v == vid:
                out.append((j, 1))
        return out

    @property
    def total_length(self) -> float:
        return float(sum(e.length for e in self.edges))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges])

    def has_robin(self) -> bool:
        return any(c.is_robin for _, c in self.vertices)

    def nk_dirichlet_only(self) -> bool:
        return not self.has_robin()

    def is_circle(self) -> bool:
        """Equivalent to a circle: every vertex NK of degree 2."""
        deg = self.degrees()
        return all(c.is_nk and deg[i] == 2 for i, c in self.vertices)

    def min_length(self) -> float:
        return float(min(e.length for e in self.edges))

    def _fresh_vertex_id(self, base: str) -> str:
        taken = set(self.vertex_ids()) | {e.id for e in self.edges}
        cand = base
        n = 1
        while cand in taken:
            n += 1
            cand = f"{base}{n}"
        return cand

    def _fresh_edge_id(self, base: str) -> str:
        return self._fresh_vertex_id(base)


# -- parsing -------------------------------------------------------------------


def parse_graph(text: str) -> MetricGraph:
    """Parse the line-oriented description format.

    ``vertex <id> nk | delta <alpha> | dirichlet``
    ``edge <id> <u> <v> <length>``
    ``#`` starts a comment; tokens are whitespace-separated.
    """
    vertices: list[tuple[str, VertexCondition]] = []
    edges: list[tuple[str, str, str, float]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "vertex":
                vid, kind = tok[1], tok[2]
                if kind == "nk":
                    vertices.append((vid, nk()))
                elif kind == "delta":
                    vertices.append((vid, delta(float(tok[3]))))
                elif kind == "dirichlet":
                    vertices.append((vid, dirichlet()))
                else:
                    raise ParseError(f"line {ln}: unknown condition {kind!r}")
            elif tok[0] == "edge":
                edges.append((tok[1], tok[2], tok[3], float(tok[4])))
            else:
                raise ParseError(f"line {ln}: unknown directive {tok[0]!r}")
        except (IndexError, ValueError) as exc:
            raise ParseError(f"line {ln}: {raw.strip()!r}: {exc}") from exc
    return build_graph({"vertices": vertices, "edges": edges})


def build_graph(spec: dict) -> MetricGraph:
    """Build and validate a connected metric graph from a description record."""
    return MetricGraph.from_parts(spec["vertices"], spec["edges"])


def load_graph(path) -> MetricGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


# -- surgery -------------------------------------------------------------------


def insert_trivial_vertex(g: MetricGraph, edge_id: str, offset: float) -> MetricGraph:
    """Split an edge at an interior point by a new NK vertex of degree 2."""
    e = g.edge(edge_id)
    if not (0.0 < offset < e.length):
        raise OffsetOutOfRange(f"offset {offset} not inside (0, {e.length})")
    w = g._fresh_vertex_id(f"{edge_id}_cut")
    new_edges: list[tuple[str, str, str, float]] = []
    for old in g.edges:
        if old.id == edge_id:
            new_edges.append((f"{edge_id}_a", old.u, w, offset))
            new_edges.append((f"{edge_id}_b", w, old.v, old.length - offset))
        else:
            new_edges.append((old.id, old.u, old.v, old.length))
    verts = list(g.vertices) + [(w, nk())]
    return MetricGraph.from_parts(verts, new_edges, allow_disconnected=not g.is_connected)


def suppress_trivial_vertices(g: MetricGraph) -> MetricGraph:
    """Remove every NK degree-2 vertex by concatenating its incident edges.

    A vertex whose two edge-ends belong to one looping edge is kept (it is
    the last anchor of a circle).  Idempotent; total length preserved.
    """
    cur = g
    while True:
        deg = cur.degrees()
        target = None
        for vid, cond in cur.vertices:
            if not (cond.is_nk and deg[vid] == 2):
                continue
            ends = cur.edge_ends_at(vid)
            if len(ends) == 2 and ends[0][0] != ends[1][0]:
                target = (vid, ends)
                break
        if target is None:
            return cur
        vid, ((j1, end1), (j2, end2)) = target
        e1, e2 = cur.edges[j1], cur.edges[j2]
        # orient merged edge a -> b where a is e1's far end, b is e2's far end
        a = e1.u if end1 == 1 else e1.v
        b = e2.v if end2 == 0 else e2.u
        merged = (f"{e1.id}+{e2.id}", a, b, e1.length + e2.length)
        edges = [
            (e.id, e.u, e.v, e.length)
            for e in cur.edges
            if e.id not in (e1.id, e2.id)
        ]
        edges.append(merged)
        verts = [(i, c) for i, c in cur.vertices if i != vid]
        cur = MetricGraph.from_parts(verts, edges, allow_disconnected=not cur.is_connected)


def find_loops(g: MetricGraph) -> list[LoopDescriptor]:
    """All maximal loops: cycles whose intermediate vertices have degree 2."""
    deg = g.degrees()
    loops: list[LoopDescriptor] = []
    seen_sets: set[frozenset] = set()

    def add(attachment, chain, orients):
        key = frozenset(eid for eid in chain)
        if key in seen_sets:
            return
        seen_sets.add(key)
        total = sum(g.edge(eid).length for eid in chain)
        inter = _chain_intermediates(g, attachment, chain, orients)
        pure = all(g.condition(w).is_nk for w in inter)
        loops.append(
            LoopDescriptor(attachment, tuple(chain), tuple(orients), float(total), pure)
        )

    # n = 0 case: bare looping edges
    for e in g.edges:
        if e.is_loop:
            add(e.u, [e.id], [True])

    # chains through degree-2 vertices from a non-degree-2 attachment
    for vid, _ in g.vertices:
        if deg[vid] == 2:
            continue
        for j, end in g.edge_ends_at(vid):
            e = g.edges[j]
            if e.is_loop:
                continue
            chain = [e.id]
            orients = [end == 0]
            prev_edge = e
            cur = e.other_end(vid)
            ok = True
            while cur != vid:
                if deg[cur] != 2:
                    ok = False
                    break
                nxt = [
                    (jj, ee)
                    for jj, ee in g.edge_ends_at(cur)
                    if g.edges[jj].id != prev_edge.id
                ]
                if len(nxt) != 1:
                    ok = False  # parallel copy of same edge handled above
                    break
                jj, ee = nxt[0]
                nxt_edge = g.edges[jj]
                chain.append(nxt_edge.id)
                orients.append(ee == 0)
                prev_edge = nxt_edge
                cur = nxt_edge.other_end(cur)
            if ok and cur == vid and len(chain) >= 2:
                add(vid, chain, orients)

    # whole graph is a cycle of degree-2 vertices (circle-like)
    if all(deg[i] == 2 for i, _ in g.vertices) and not any(e.is_loop for e in g.edges):
        start = min(g.vertex_ids())
        (j, end) = g.edge_ends_at(start)[0]
        e = g.edges[j]
        chain = [e.id]
        orients = [end == 0]
        prev = e
        cur = e.other_end(start)
        while cur != start:
            jj, ee = [
                (jj, ee)
                for jj, ee in g.edge_ends_at(cur)
                if g.edges[jj].id != prev.id
            ][0]
            prev = g.edges[jj]
            chain.append(prev.id)
            orients.append(ee == 0)
            cur = prev.other_end(cur)
        add(start, chain, orients)

    loops.sort(key=lambda L: (L.attachment_vertex, L.edge_chain))
    return loops


def _chain_intermediates(g, attachment, chain, orients) -> list[str]:
    inter = []
    cur = attachment
    for eid, fwd in zip(chain[:-1], orients[:-1]):
        e = g.edge(eid)
        cur = e.v if fwd else e.u
        inter.append(cur)
    return inter


def split_vertex(
    g: MetricGraph,
    vid: str,
    partition: tuple[Sequence[tuple[str, int]], Sequence[tuple[str, int]]],
    alphas: tuple[float, float],
) -> MetricGraph:
    """Split vertex vid into two, distributing its edge-ends.

    ``partition`` is a pair of edge-end lists [(edge id, end), ...] that must
    disjointly cover all edge-ends at vid; ``alphas`` must sum to the original
    delta coefficient.  The result may be disconnected; it is then flagged via
    ``is_connected`` and downstream spectral operations treat components
    independently.
    """
    cond = g.condition(vid)
    if cond.is_dirichlet:
        raise ValidationError("cannot split a Dirichlet vertex")
    part1 = [(eid, int(end)) for eid, end in partition[0]]
    part2 = [(eid, int(end)) for eid, end in partition[1]]
    ends = {(g.edges[j].id, end) for j, end in g.edge_ends_at(vid)}
    p1, p2 = set(part1), set(part2)
    if p1 | p2 != ends or (p1 & p2) or len(part1) != len(p1) or len(part2) != len(p2):
        raise PartitionNotCovering(
            f"partition does not disjointly cover the edge-ends at {vid}"
        )
    a1, a2 = float(alphas[0]), float(alphas[1])
    if abs(a1 + a2 - cond.alpha) > 1e-12 * (1.0 + abs(cond.alpha)):
        raise AlphaSumMismatch(f"{a1} + {a2} != {cond.alpha}")

    v1 = g._fresh_vertex_id(f"{vid}_1")
    v2 = g._fresh_vertex_id(f"{vid}_2")
    assign = {}
    for eid, end in part1:
        assign[(eid, end)] = v1
    for eid, end in part2:
        assign[(eid, end)] = v2
    edges = []
    for e in g.edges:
        u, v = e.u, e.v
        if (e.id, 0) in assign:
            u = assign[(e.id, 0)]
        if (e.id, 1) in assign:
            v = assign[(e.id, 1)]
        edges.append((e.id, u, v, e.length))
    verts = [(i, c) for i, c in g.vertices if i != vid]
    verts.append((v1, delta(a1)))
    verts.append((v2, delta(a2)))
    return MetricGraph.from_parts(verts, edges, allow_disconnected=True)


def glue_vertices(g: MetricGraph, v1: str, v2: str) -> MetricGraph:
    """Merge two delta vertices; the new coefficient is the sum of the two."""
    if v1 == v2:
        raise ValidationError("glue_vertices needs two distinct vertices")
    c1, c2 = g.condition(v1), g.condition(v2)
    if c1.is_dirichlet or c2.is_dirichlet:
        raise DirichletGlue("cannot glue a Dirichlet vertex")
    w = g._fresh_vertex_id(f"{v1}+{v2}")
    edges = []
    for e in g.edges:
        u = w if e.u in (v1, v2) else e.u
        v = w if e.v in (v1, v2) else e.v
        edges.append((e.id, u, v, e.length))
    verts = [(i, c) for i, c in g.vertices if i not in (v1, v2)]
    verts.append((w, delta(c1.alpha + c2.alpha)))
    return MetricGraph.from_parts(verts, edges, allow_disconnected=False)


def perturb_lengths(g: MetricGraph, epsilon: float, rng_seed: int) -> MetricGraph:
    """Add independent Uniform(-epsilon, epsilon) offsets to every length.

    Deterministic in the seed; edge order fixed by the graph.  epsilon = 0
    returns an identical graph.
    """
    if epsilon < 0:
        raise ValidationError("epsilon must be nonnegative")
    if epsilon >= g.min_length() and epsilon > 0:
        raise EpsilonTooLarge(f"epsilon {epsilon} >= min edge length {g.min_length()}")
    if epsilon == 0:
        return g
    rng = np.random.default_rng(rng_seed)
    deltas = rng.uniform(-epsilon, epsilon, size=len(g.edges))
    edges = [
        (e.id, e.u, e.v, e.length + float(d)) for e, d in zip(g.edges, deltas)
    ]
    return MetricGraph.from_parts(g.vertices, edges, allow_disconnected=not g.is_connected)


# -- canonical signature / isomorphism -----------------------------------------


def canonical_signature(g: MetricGraph, digits: int = 9) -> str:
    """Canonical text signature by iterative color refinement.

    Vertex colors start from (condition, degree) and are refined with the
    multiset of (edge length, neighbor color) over incident ends.  Sufficient
    to separate the small graphs used in tests; not a general isomorphism
    certificate.
    """

    def cond_key(c: VertexCondition):
        return (c.kind, None if c.is_dirichlet else round(c.alpha, digits))

    deg = g.degrees()
    colors = {i: (cond_key(c), deg[i]) for i, c in g.vertices}
    for _ in range(len(g.vertices)):
        nxt = {}
        for i, _ in g.vertices:
            inc = []
            for j, end in g.edge_ends_at(i):
                e = g.edges[j]
                other = e.v if end == 0 else e.u
                inc.append((round(e.length, digits), colors[other]))
            nxt[i] = (colors[i], tuple(sorted(inc)))
        if len(set(nxt.values())) == len(set(colors.values())):
            colors = nxt
            break
        colors = nxt
    edge_sig = sorted(
        (round(e.length, digits), tuple(sorted((colors[e.u], colors[e.v]))))
        for e in g.edges
    )
    vert_sig = sorted(colors.values())
    return repr((vert_sig, edge_sig))


def is_isomorphic(g1: MetricGraph, g2: MetricGraph, digits: int = 9) -> bool:
    return canonical_signature(g1, digits) == canonical_signature(g2, digits)
