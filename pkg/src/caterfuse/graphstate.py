"""Graph states as vertex/edge structures plus measurement rewrite rules.

A graph state assigns one qubit to each vertex and one CZ bond to each
edge.  Single-qubit Pauli measurements, pair measurements on linear
clusters, and type-II fusions all act on such states combinatorially:
each rule rewrites vertex statuses and edges.  The stabilizer module
provides the exactness oracle for every rule in this file.

Vertices carry one of three statuses:

``ACTIVE``
    Part of the entangled resource.
``MEASURED_OUT``
    Removed by a measurement; never carries edges.
``LOST``
    Photon erased with the outcome structurally unresolved.  Lost
    vertices keep their edges until a consumer resolves them (via
    :func:`indirect_z`) or discards the state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class Status(Enum):
    ACTIVE = "active"
    MEASURED_OUT = "measured_out"
    LOST = "lost"


class FusionOutcome(Enum):
    """Physical outcome of a single type-II fusion attempt."""

    SUCCESS = "success"
    FAILURE = "failure"
    ERASURE_A = "erasure_a"
    ERASURE_B = "erasure_b"
    ERASURE_BOTH = "erasure_both"

    @property
    def erased(self) -> bool:
        return self in (
            FusionOutcome.ERASURE_A,
            FusionOutcome.ERASURE_B,
            FusionOutcome.ERASURE_BOTH,
        )


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class GraphState:
    """Undirected simple graph with per-vertex measurement status.

    Instances are treated as immutable: every rewrite returns a new
    state and leaves the input untouched.
    """

    def __init__(self, statuses: dict[int, Status], adjacency: dict[int, set[int]]):
        self._status = dict(statuses)
        self._adj = {v: set(nbrs) for v, nbrs in adjacency.items()}
        self._check()

    @classmethod
    def from_edges(cls, n: int, edges: list[tuple[int, int]]) -> "GraphState":
        """Build an all-Active state on vertices ``0..n-1``.

        Rejects self-loops, duplicate edges (in either orientation), and
        endpoints outside ``range(n)``.
        """
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        statuses = {v: Status.ACTIVE for v in range(n)}
        adj: dict[int, set[int]] = {v: set() for v in range(n)}
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            e = _edge(u, v)
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            adj[u].add(v)
            adj[v].add(u)
        return cls(statuses, adj)

    def _check(self) -> None:
        for v, nbrs in self._adj.items():
            for w in nbrs:
                if v not in self._adj[w]:
                    raise ValueError(f"asymmetric adjacency between {v} and {w}")
                if self._status[v] is Status.MEASURED_OUT:
                    raise ValueError(f"measured-out vertex {v} still has edges")

    # -- queries ---------------------------------------------------------

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self._status))

    @property
    def active_vertices(self) -> tuple[int, ...]:
        return tuple(v for v in sorted(self._status) if self._status[v] is Status.ACTIVE)

    def status(self, v: int) -> Status:
        return self._status[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(self._adj[v]))

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def edges(self) -> tuple[tuple[int, int], ...]:
        out = {_edge(u, v) for u, nbrs in self._adj.items() for v in nbrs}
        return tuple(sorted(out))

    def copy(self) -> "GraphState":
        return GraphState(self._status, self._adj)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphState):
            return NotImplemented
        return self._status == other._status and self._adj == other._adj

    def __repr__(self) -> str:
        return f"GraphState(n={len(self._status)}, edges={len(self.edges())})"

    # -- internal mutators (only rewrite rules call these) ----------------

    def _remove_vertex_edges(self, v: int) -> None:
        for w in self._adj[v]:
            self._adj[w].discard(v)
        self._adj[v] = set()

    def _toggle_edge(self, u: int, v: int) -> None:
        if v in self._adj[u]:
            self._adj[u].discard(v)
            self._adj[v].discard(u)
        else:
            self._adj[u].add(v)
            self._adj[v].add(u)


def _require_active(g: GraphState, v: int, op: str) -> None:
    if g.status(v) is not Status.ACTIVE:
        raise ValueError(f"{op}: vertex {v} is {g.status(v).value}, not active")


def measure_z(g: GraphState, v: int) -> GraphState:
    """Z-measure vertex ``v``: remove it and all its incident edges."""
    _require_active(g, v, "measure_z")
    out = g.copy()
    out._remove_vertex_edges(v)
    out._status[v] = Status.MEASURED_OUT
    return out


def measure_x_pair(g: GraphState, u: int, v: int) -> GraphState:
    """X-measure the adjacent pair ``u, v`` in a linear-cluster context.

    Both vertices must be active, adjacent, and of degree at most 2.
    The outer neighbors of the pair (if both exist and differ) have
    their mutual bond toggled, which splices chain remainders together.
    """
    _require_active(g, u, "measure_x_pair")
    _require_active(g, v, "measure_x_pair")
    if not g.has_edge(u, v):
        raise ValueError(f"measure_x_pair: {u} and {v} are not adjacent")
    if g.degree(u) > 2 or g.degree(v) > 2:
        raise ValueError("measure_x_pair: both vertices must have degree <= 2")
    outer_u = [w for w in g.neighbors(u) if w != v]
    outer_v = [w for w in g.neighbors(v) if w != u]
    out = g.copy()
    out._remove_vertex_edges(u)
    out._remove_vertex_edges(v)
    out._status[u] = Status.MEASURED_OUT
    out._status[v] = Status.MEASURED_OUT
    if outer_u and outer_v and outer_u[0] != outer_v[0]:
        out._toggle_edge(outer_u[0], outer_v[0])
    return out


def mark_lost(g: GraphState, v: int) -> GraphState:
    """Mark an active vertex as lost (photon erased, edges retained)."""
    _require_active(g, v, "mark_lost")
    out = g.copy()
    out._status[v] = Status.LOST
    return out


def indirect_z(g: GraphState, lost: int, helper: int) -> GraphState:
    """Remove a lost vertex by measuring a stabilizer through ``helper``.

    The helper is X-measured and every other active neighbor of the
    helper is Z-measured; in the branched-chain contexts where this is
    used (the lost photon is a leaf) the product realizes a Z
    measurement on the lost vertex.  Net effect: ``lost``, ``helper``,
    and all of helper's other neighbors leave the active set with their
    edges removed; everything outside that closed neighborhood is
    untouched.
    """
    if g.status(lost) is not Status.LOST:
        raise ValueError(f"indirect_z: vertex {lost} is not lost")
    _require_active(g, helper, "indirect_z")
    if not g.has_edge(helper, lost):
        raise ValueError(f"indirect_z: helper {helper} not adjacent to lost {lost}")
    out = g.copy()
    removed = [helper, lost] + [w for w in g.neighbors(helper) if w != lost]
    for v in removed:
        out._remove_vertex_edges(v)
        out._status[v] = Status.MEASURED_OUT
    return out


def fuse_type2(g: GraphState, a: int, b: int, outcome: FusionOutcome) -> GraphState:
    """Apply a type-II fusion between non-adjacent active vertices.

    Success removes both fusion qubits and toggles every bond between a
    neighbor of ``a`` and a neighbor of ``b`` (pairs covered twice
    cancel).  Failure Z-measures both.  Erasure marks the lost photon(s)
    as Lost with edges retained; a detected partner is removed as by a
    Z measurement.
    """
    _require_active(g, a, "fuse_type2")
    _require_active(g, b, "fuse_type2")
    if a == b:
        raise ValueError("fuse_type2: fusion qubits must differ")
    if g.has_edge(a, b):
        raise ValueError(f"fuse_type2: {a} and {b} must not be adjacent")
    out = g.copy()
    if outcome is FusionOutcome.SUCCESS:
        nbrs_a = [x for x in g.neighbors(a) if x != b]
        nbrs_b = [y for y in g.neighbors(b) if y != a]
        toggles: dict[tuple[int, int], int] = {}
        for x in nbrs_a:
            for y in nbrs_b:
                if x != y:
                    e = _edge(x, y)
                    toggles[e] = toggles.get(e, 0) + 1
        out._remove_vertex_edges(a)
        out._remove_vertex_edges(b)
        out._status[a] = Status.MEASURED_OUT
        out._status[b] = Status.MEASURED_OUT
        for (x, y), count in sorted(toggles.items()):
            if count % 2:
                out._toggle_edge(x, y)
    elif outcome is FusionOutcome.FAILURE:
        for v in (a, b):
            out._remove_vertex_edges(v)
            out._status[v] = Status.MEASURED_OUT
    elif outcome is FusionOutcome.ERASURE_A:
        out._status[a] = Status.LOST
        out._remove_vertex_edges(b)
        out._status[b] = Status.MEASURED_OUT
    elif outcome is FusionOutcome.ERASURE_B:
        out._status[b] = Status.LOST
        out._remove_vertex_edges(a)
        out._status[a] = Status.MEASURED_OUT
    elif outcome is FusionOutcome.ERASURE_BOTH:
        out._status[a] = Status.LOST
        out._status[b] = Status.LOST
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown fusion outcome {outcome}")
    return out


# -- caterpillar decomposition -----------------------------------------------


@dataclass(frozen=True)
class CaterpillarSpec:
    """A caterpillar decomposition: a main path plus degree-1 leaves.

    ``leaves`` maps a main-path vertex to the off-path leaves hanging
    from it.  Every vertex of the source graph appears exactly once,
    either on the main path or as a leaf.
    """

    main_path: tuple[int, ...]
    leaves: dict[int, tuple[int, ...]]

    @property
    def total_qubits(self) -> int:
        return len(self.main_path) + sum(len(v) for v in self.leaves.values())

    def leaf_count(self) -> int:
        return sum(len(v) for v in self.leaves.values())


def _is_connected(g: GraphState, vertices: list[int]) -> bool:
    if not vertices:
        return False
    seen = {vertices[0]}
    stack = [vertices[0]]
    vset = set(vertices)
    while stack:
        v = stack.pop()
        for w in g.neighbors(v):
            if w in vset and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vertices)


def is_caterpillar(g: GraphState) -> CaterpillarSpec | None:
    """Decompose ``g`` into a main path plus leaves, if possible.

    Returns the decomposition whose main path is longest, breaking ties
    by the lexicographically smallest vertex sequence.  Graphs that are
    disconnected, contain non-active vertices, or are not caterpillars
    yield ``None``.
    """
    act = list(g.active_vertices)
    if len(act) != len(g.vertices) or not act:
        return None
    if not _is_connected(g, act):
        return None
    n = len(act)
    edge_count = len(g.edges())
    if edge_count != n - 1:
        return None  # cycles cannot be caterpillars
    if n == 1:
        return CaterpillarSpec((act[0],), {})
    if n == 2:
        return CaterpillarSpec(tuple(sorted(act)), {})

    internal = [v for v in act if g.degree(v) >= 2]
    for v in internal:
        if sum(1 for w in g.neighbors(v) if g.degree(w) >= 2) > 2:
            return None  # spine is not a path

    # Order the spine.  Removing the leaves of a tree keeps it connected,
    # so the internal vertices form a single path.
    if len(internal) == 1:
        spine = [internal[0]]
    else:
        ends = [
            v
            for v in internal
            if sum(1 for w in g.neighbors(v) if g.degree(w) >= 2) == 1
        ]
        spine = [min(ends)]
        prev = None
        while True:
            nxt = [
                w
                for w in g.neighbors(spine[-1])
                if g.degree(w) >= 2 and w != prev
            ]
            if not nxt:
                break
            prev = spine[-1]
            spine.append(nxt[0])
        if len(spine) != len(internal):
            return None

    def leaf_neighbors(v: int) -> list[int]:
        return sorted(w for w in g.neighbors(v) if g.degree(w) == 1)

    candidates: list[tuple[int, ...]] = []
    for orientation in (spine, spine[::-1]):
        front, back = orientation[0], orientation[-1]
        front_opts = leaf_neighbors(front) or [None]
        for f in front_opts:
            if len(orientation) == 1:
                back_opts = [x for x in leaf_neighbors(back) if x != f] or [None]
            else:
                back_opts = leaf_neighbors(back) or [None]
            for bk in back_opts:
                path = tuple(
                    ([f] if f is not None else [])
                    + list(orientation)
                    + ([bk] if bk is not None else [])
                )
                candidates.append(path)
    best_len = max(len(p) for p in candidates)
    main = min(p for p in candidates if len(p) == best_len)

    on_path = set(main)
    leaves: dict[int, list[int]] = {}
    for v in act:
        if v in on_path:
            continue
        if g.degree(v) != 1:
            return None
        (anchor,) = g.neighbors(v)
        if anchor not in on_path:
            return None
        leaves.setdefault(anchor, []).append(v)
    return CaterpillarSpec(main, {k: tuple(sorted(vs)) for k, vs in sorted(leaves.items())})


# -- graph file format --------------------------------------------------------


def graph_to_doc(g: GraphState) -> dict:
    """Serialize an all-active graph to the ``{n, edges}`` document form."""
    if g.active_vertices != g.vertices:
        raise ValueError("only fully active graphs are serialized")
    return {"n": len(g.vertices), "edges": [list(e) for e in g.edges()]}


def graph_from_doc(doc: dict) -> GraphState:
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise ValueError("graph document needs fields 'n' and 'edges'")
    edges = [(int(u), int(v)) for u, v in doc["edges"]]
    return GraphState.from_edges(int(doc["n"]), edges)


def save_graph(g: GraphState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_doc(g), sort_keys=True, indent=2) + "\n")


def load_graph(path: str | Path) -> GraphState:
    return graph_from_doc(json.loads(Path(path).read_text()))
