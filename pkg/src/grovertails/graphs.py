"""Finite simple graphs, tail attachments, arc spaces, and cycle bases.

The internal graph is the finite region the walker scatters through.  Tails
are semi-infinite paths attached at chosen vertices; they are represented
only through per-vertex degree bookkeeping (`TailedGraph`), except when an
explicit finite stretch of tail is needed, which `truncate_tails` provides.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    Disconnected,
    DuplicateEdge,
    EmptyAttachment,
    InvalidVertex,
    MalformedLine,
    SelfLoop,
)

Edge = tuple[int, int]


@dataclass(frozen=True)
class InternalGraph:
    """Connected simple graph on vertices 0..vertex_count-1.

    Edges are stored sorted, each as (u, v) with u < v; adjacency lists are
    sorted by neighbor id.  Instances are immutable and safe to share.
    """

    vertex_count: int
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(nbrs) for nbrs in self.adjacency)

    @property
    def cycle_count(self) -> int:
        """Dimension of the cycle space, |E| - |V| + 1 for a connected graph."""
        return self.edge_count - self.vertex_count + 1


def make_graph(vertex_count: int, edges: list[Edge] | tuple[Edge, ...]) -> InternalGraph:
    """Validate and build an InternalGraph.

    Raises:
        InvalidVertex: an endpoint is outside 0..vertex_count-1.
        SelfLoop: an edge joins a vertex to itself.
        DuplicateEdge: the same undirected edge appears twice.
        Disconnected: the graph is not connected.
    """
    if vertex_count < 1:
        raise InvalidVertex("graph needs at least one vertex")
    normalized: list[Edge] = []
    seen: set[Edge] = set()
    for u, v in edges:
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise InvalidVertex(f"edge ({u}, {v}) outside vertex range 0..{vertex_count - 1}")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        e = (min(u, v), max(u, v))
        if e in seen:
            raise DuplicateEdge(f"edge ({e[0]}, {e[1]}) appears more than once")
        seen.add(e)
        normalized.append(e)
    normalized.sort()

    nbrs: list[list[int]] = [[] for _ in range(vertex_count)]
    for u, v in normalized:
        nbrs[u].append(v)
        nbrs[v].append(u)
    for lst in nbrs:
        lst.sort()

    if _component_size(vertex_count, nbrs, 0) != vertex_count:
        raise Disconnected("graph has more than one connected component")

    return InternalGraph(
        vertex_count=vertex_count,
        edges=tuple(normalized),
        adjacency=tuple(tuple(lst) for lst in nbrs),
    )


def _component_size(n: int, nbrs: list[list[int]], root: int) -> int:
    seen = [False] * n
    seen[root] = True
    queue = deque([root])
    count = 1
    while queue:
        u = queue.popleft()
        for v in nbrs[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count


def parse_edge_list(text: str) -> InternalGraph:
    """Parse an edge-list document into a graph with normalized vertex ids.

    Each non-comment line holds either two integers "u v" (an edge) or a
    single integer "u" (declares an isolated vertex, useful for an edgeless
    single-vertex graph).  '#' starts a comment; blank lines are ignored.
    Vertex ids are normalized to 0..n-1 preserving their order.
    """
    raw_edges: list[Edge] = []
    ids: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            values = [int(tok) for tok in tokens]
        except ValueError:
            raise MalformedLine(f"line {lineno}: expected integers, got {line!r}") from None
        if len(values) == 1:
            ids.add(values[0])
        elif len(values) == 2:
            ids.update(values)
            raw_edges.append((values[0], values[1]))
        else:
            raise MalformedLine(f"line {lineno}: expected 'u v', got {line!r}")
    if not ids:
        raise MalformedLine("document declares no vertices")
    remap = {orig: new for new, orig in enumerate(sorted(ids))}
    edges = [(remap[u], remap[v]) for u, v in raw_edges]
    return make_graph(len(remap), edges)


@dataclass(frozen=True)
class TailedGraph:
    """An internal graph plus an ordered list of tail attachment vertices.

    Several tails may attach to one vertex; the tilde degree of a vertex is
    its internal degree plus the number of tails attached there.
    """

    internal: InternalGraph
    tail_attachments: tuple[int, ...]
    tilde_degree: tuple[int, ...]

    @property
    def tail_count(self) -> int:
        return len(self.tail_attachments)

    @property
    def boundary(self) -> tuple[int, ...]:
        """Sorted distinct vertices where at least one tail attaches."""
        return tuple(sorted(set(self.tail_attachments)))

    def vertex_inflow(self, amplitudes: np.ndarray) -> np.ndarray:
        """Sum per vertex of the tail inflow amplitudes attached there."""
        total = np.zeros(self.internal.vertex_count, dtype=complex)
        for j, u in enumerate(self.tail_attachments):
            total[u] += amplitudes[j]
        return total


def attach_tails(g: InternalGraph, attachments: list[int] | tuple[int, ...]) -> TailedGraph:
    """Attach one semi-infinite tail per listed vertex (repeats allowed)."""
    if len(attachments) == 0:
        raise EmptyAttachment("at least one tail attachment is required")
    for u in attachments:
        if not (0 <= u < g.vertex_count):
            raise InvalidVertex(f"tail attachment {u} outside vertex range 0..{g.vertex_count - 1}")
    tilde = list(g.degrees)
    for u in attachments:
        tilde[u] += 1
    return TailedGraph(internal=g, tail_attachments=tuple(attachments), tilde_degree=tuple(tilde))


@dataclass(frozen=True, eq=False)
class ArcSpace:
    """Indexed symmetric arc set of a graph.

    Edge k = (u, v) with u < v (edges in sorted order) produces arc 2k
    running u -> v and arc 2k+1 running v -> u, so the reversal involution is
    index pairing.  The ordering is deterministic for a given graph.
    """

    arc_count: int
    origin: np.ndarray
    terminus: np.ndarray
    reversal: np.ndarray
    arcs_into: tuple[tuple[int, ...], ...]
    arcs_out_of: tuple[tuple[int, ...], ...]
    _index: dict[tuple[int, int], int]

    def index(self, u: int, v: int) -> int:
        """Arc id of u -> v; u and v must be adjacent."""
        return self._index[(u, v)]


def arc_space(g: InternalGraph) -> ArcSpace:
    """Build the canonical arc indexing for a graph."""
    m = 2 * g.edge_count
    origin = np.zeros(m, dtype=np.int64)
    terminus = np.zeros(m, dtype=np.int64)
    reversal = np.zeros(m, dtype=np.int64)
    index: dict[tuple[int, int], int] = {}
    for k, (u, v) in enumerate(g.edges):
        a, b = 2 * k, 2 * k + 1
        origin[a], terminus[a] = u, v
        origin[b], terminus[b] = v, u
        reversal[a], reversal[b] = b, a
        index[(u, v)] = a
        index[(v, u)] = b
    into: list[list[int]] = [[] for _ in range(g.vertex_count)]
    out: list[list[int]] = [[] for _ in range(g.vertex_count)]
    for a in range(m):
        into[terminus[a]].append(a)
        out[origin[a]].append(a)
    return ArcSpace(
        arc_count=m,
        origin=origin,
        terminus=terminus,
        reversal=reversal,
        arcs_into=tuple(tuple(lst) for lst in into),
        arcs_out_of=tuple(tuple(lst) for lst in out),
        _index=index,
    )


@dataclass(frozen=True)
class OrientedCycle:
    """Closed arc sequence: terminus of each arc is origin of the next."""

    arcs: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.arcs)

    @property
    def odd(self) -> bool:
        return len(self.arcs) % 2 == 1


def bfs_parents(g: InternalGraph) -> list[int]:
    """Parent array of the breadth-first spanning tree rooted at vertex 0.

    Neighbors are visited in increasing id order, so the tree is
    deterministic.  The root's parent is -1.
    """
    parent = [-1] * g.vertex_count
    seen = [False] * g.vertex_count
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                queue.append(v)
    return parent


def fundamental_cycles(g: InternalGraph, arcs: ArcSpace) -> tuple[OrientedCycle, ...]:
    """One oriented cycle per non-tree edge of the breadth-first tree.

    Each cycle starts with its non-tree arc oriented from the lower to the
    higher vertex id, then walks back through the tree.  A connected graph
    yields exactly |E| - |V| + 1 cycles; a tree yields none.
    """
    parent = bfs_parents(g)
    tree_edges = {(min(u, parent[u]), max(u, parent[u])) for u in range(g.vertex_count) if parent[u] >= 0}

    def path_to_root(x: int) -> list[int]:
        path = [x]
        while parent[path[-1]] >= 0:
            path.append(parent[path[-1]])
        return path

    cycles: list[OrientedCycle] = []
    for u, v in g.edges:
        if (u, v) in tree_edges:
            continue
        up = path_to_root(u)
        vp = path_to_root(v)
        in_vp = set(vp)
        lca = next(x for x in up if x in in_vp)
        up = up[: up.index(lca) + 1]
        vp = vp[: vp.index(lca) + 1]
        seq = [arcs.index(u, v)]
        for i in range(len(vp) - 1):
            seq.append(arcs.index(vp[i], vp[i + 1]))
        for i in range(len(up) - 1, 0, -1):
            seq.append(arcs.index(up[i], up[i - 1]))
        cycles.append(OrientedCycle(arcs=tuple(seq)))
    return tuple(cycles)


@dataclass(frozen=True, eq=False)
class TruncatedTails:
    """A tailed graph with each tail cut to a finite path of given length.

    Tail j contributes vertices at distances 1..length from its attachment
    vertex; `inbound[j][m]` is the arc from distance m+1 to distance m and
    `outbound[j][m]` its reverse.  `internal_arcs[a]` maps internal arc ids
    to arc ids of the enlarged graph.  `distance` is 0 on internal vertices.
    """

    graph: InternalGraph
    arcs: ArcSpace
    length: int
    internal_arcs: np.ndarray
    inbound: tuple[np.ndarray, ...]
    outbound: tuple[np.ndarray, ...]
    tail_vertices: tuple[tuple[int, ...], ...]
    distance: np.ndarray


def truncate_tails(tg: TailedGraph, length: int) -> TruncatedTails:
    """Materialize every tail as an explicit path of `length` vertices."""
    if length < 1:
        raise InvalidVertex("tail truncation length must be at least 1")
    g = tg.internal
    n = g.vertex_count
    edges: list[Edge] = list(g.edges)
    tail_vertices: list[tuple[int, ...]] = []
    distance = [0] * (n + tg.tail_count * length)
    for j, u in enumerate(tg.tail_attachments):
        chain = [n + j * length + k for k in range(length)]
        prev = u
        for k, w in enumerate(chain, start=1):
            edges.append((min(prev, w), max(prev, w)))
            distance[w] = k
            prev = w
        tail_vertices.append(tuple(chain))
    big = make_graph(n + tg.tail_count * length, edges)
    big_arcs = arc_space(big)

    inner = arc_space(g)
    internal = np.array(
        [big_arcs.index(int(u), int(v)) for u, v in zip(inner.origin, inner.terminus)],
        dtype=np.int64,
    )
    inbound: list[np.ndarray] = []
    outbound: list[np.ndarray] = []
    for j, u in enumerate(tg.tail_attachments):
        chain = (u,) + tail_vertices[j]
        inbound.append(np.array([big_arcs.index(chain[m + 1], chain[m]) for m in range(length)], dtype=np.int64))
        outbound.append(np.array([big_arcs.index(chain[m], chain[m + 1]) for m in range(length)], dtype=np.int64))
    return TruncatedTails(
        graph=big,
        arcs=big_arcs,
        length=length,
        internal_arcs=internal,
        inbound=tuple(inbound),
        outbound=tuple(outbound),
        tail_vertices=tuple(tail_vertices),
        distance=np.array(distance, dtype=np.int64),
    )
