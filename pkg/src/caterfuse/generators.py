"""Benchmark graph families.

Stand-ins for application graph states: deterministic constructions
(path, ring, star, lattice, caterpillar) plus a seeded Erdos-Renyi
family for stress tests.  Anything else can be imported as a plain
graph file (see :mod:`caterfuse.graphstate`).
"""

from __future__ import annotations

from .graphstate import GraphState
from .seeding import make_rng

FAMILIES = ("path", "ring", "star", "lattice", "random", "caterpillar")


def path_graph(n: int) -> GraphState:
    """P_n: vertices 0..n-1 chained in order."""
    if n < 1:
        raise ValueError("path needs n >= 1")
    return GraphState.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def ring_graph(n: int) -> GraphState:
    """C_n: a path with the ends joined."""
    if n < 3:
        raise ValueError("ring needs n >= 3")
    return GraphState.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> GraphState:
    """K_{1,n-1}: vertex 0 adjacent to everything else."""
    if n < 1:
        raise ValueError("star needs n >= 1")
    return GraphState.from_edges(n, [(0, i) for i in range(1, n)])


def lattice_graph(rows: int, cols: int) -> GraphState:
    """rows x cols square grid, vertex (r, c) numbered r*cols + c."""
    if rows < 1 or cols < 1:
        raise ValueError("lattice needs rows >= 1 and cols >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return GraphState.from_edges(rows * cols, edges)


def random_graph(n: int, p: float, seed: int) -> GraphState:
    """Erdos-Renyi G(n, p), deterministic in (n, p, seed)."""
    if n < 1:
        raise ValueError("random graph needs n >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = make_rng("gen", "random", n, float(p), seed)
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return GraphState.from_edges(n, edges)


def caterpillar_graph(spine: int, leaves: int) -> GraphState:
    """Spine path of length ``spine`` with ``leaves`` pendants per vertex."""
    if spine < 1:
        raise ValueError("caterpillar needs spine >= 1")
    if leaves < 0:
        raise ValueError("leaves per spine vertex must be non-negative")
    edges = [(i, i + 1) for i in range(spine - 1)]
    n = spine
    for i in range(spine):
        for _ in range(leaves):
            edges.append((i, n))
            n += 1
    return GraphState.from_edges(n, edges)


def generate(family: str, **params) -> GraphState:
    """Dispatch by family name; unknown names or params raise ValueError."""
    try:
        builder = {
            "path": path_graph,
            "ring": ring_graph,
            "star": star_graph,
            "lattice": lattice_graph,
            "random": random_graph,
            "caterpillar": caterpillar_graph,
        }[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}, expected one of {FAMILIES}")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for family {family!r}: {exc}")
