"""Compile a target graph into linear subgraphs plus a fusion schedule.

Two optimization passes, both solved exactly at desk scale by a small
0-1 branch-and-bound engine (:func:`solve_binary_min`):

1. ``divide_linear``: cut the fewest edges so every remaining vertex
   has degree at most 2, then post-process (break cycles, split
   over-long paths against the emitter capacity).
2. ``build_generation_tree``: recursively bipartition the subgraph set
   into a balanced binary tree, minimizing the number of cut edges that
   cross each split; crossing edges become the fusions executed at that
   tree node.

Both passes are deterministic, including all tie-breaking, so compile
artifacts are byte-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphstate import GraphState, _edge

DEFAULT_NODE_BUDGET = 1 << 24


class CapacityError(ValueError):
    """Raised when a graph cannot fit the emitter capacity at all."""


# -- generic 0-1 minimization --------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """Linear constraint sum(coeff * x[var]) <= bound over binary vars."""

    coeffs: tuple[tuple[int, int], ...]
    bound: int


@dataclass(frozen=True)
class SolveResult:
    assignment: tuple[int, ...]
    value: int
    optimal: bool
    nodes_explored: int


def solve_binary_min(
    num_vars: int,
    costs: list[int],
    constraints: list[Constraint],
    hints: tuple[tuple[int, ...], ...] = (),
    node_budget: int = DEFAULT_NODE_BUDGET,
    rng_seed: int = 0,
) -> SolveResult:
    """Minimize ``costs . x`` over binary x subject to ``constraints``.

    Depth-first branch and bound, trying 0 before 1, pruning on partial
    infeasibility and on the incumbent value; ties therefore resolve to
    the assignment setting earlier variables to 0.  ``hints`` seed the
    incumbent with known-feasible assignments.  If the node budget runs
    out, the best incumbent is polished by seeded hill climbing and
    returned with ``optimal=False``.
    """
    if len(costs) != num_vars:
        raise ValueError("costs length must equal num_vars")

    def feasible(x: tuple[int, ...]) -> bool:
        return all(
            sum(c * x[v] for v, c in con.coeffs) <= con.bound for con in constraints
        )

    def value(x: tuple[int, ...]) -> int:
        return sum(c * b for c, b in zip(costs, x))

    best_x: tuple[int, ...] | None = None
    best_val = math.inf
    for hint in hints:
        if len(hint) == num_vars and feasible(hint) and value(hint) < best_val:
            best_x, best_val = tuple(hint), value(hint)

    for con in constraints:
        if not con.coeffs and con.bound < 0:
            raise ValueError("constant constraint is infeasible")

    involved: list[list[tuple[int, int]]] = [[] for _ in range(num_vars)]
    fixed = [0] * len(constraints)
    free_min = [0] * len(constraints)
    for ci, con in enumerate(constraints):
        for v, c in con.coeffs:
            if not 0 <= v < num_vars:
                raise ValueError(f"constraint references unknown variable {v}")
            involved[v].append((ci, c))
            free_min[ci] += min(0, c)
    bounds = [con.bound for con in constraints]

    # cheapest possible completion from variable i onward
    suffix = [0] * (num_vars + 1)
    for i in range(num_vars - 1, -1, -1):
        suffix[i] = suffix[i + 1] + min(0, costs[i])

    x = [0] * num_vars
    nodes = 0
    exhausted = False

    def dfs(i: int, val: int) -> None:
        nonlocal nodes, best_x, best_val, exhausted
        if exhausted:
            return
        nodes += 1
        if nodes > node_budget:
            exhausted = True
            return
        if val + suffix[i] >= best_val:
            return
        if i == num_vars:
            best_x, best_val = tuple(x), val
            return
        for bit in (0, 1):
            x[i] = bit
            ok = True
            for ci, c in involved[i]:
                fixed[ci] += c * bit
                free_min[ci] -= min(0, c)
            for ci, _ in involved[i]:
                if fixed[ci] + free_min[ci] > bounds[ci]:
                    ok = False
                    break
            if ok:
                dfs(i + 1, val + costs[i] * bit)
            for ci, c in involved[i]:
                fixed[ci] -= c * bit
                free_min[ci] += min(0, c)

    dfs(0, 0)

    if not exhausted:
        if best_x is None:
            raise ValueError("model is infeasible")
        return SolveResult(best_x, int(best_val), True, nodes)

    if best_x is not None:
        best_x, best_val = _hill_climb(
            num_vars, costs, feasible, value, best_x, rng_seed
        )
    if best_x is None:
        raise ValueError("budget exhausted without any feasible incumbent")
    return SolveResult(tuple(best_x), int(best_val), False, nodes)


def _hill_climb(num_vars, costs, feasible, value, start, rng_seed, restarts=100):
    """Single-bit-flip local search from perturbed copies of ``start``."""
    rng = np.random.default_rng(rng_seed)
    best_x, best_val = tuple(start), value(start)
    for _ in range(restarts):
        cur = list(best_x)
        for i in np.flatnonzero(rng.random(num_vars) < 0.1):
            cur[i] ^= 1
        if not feasible(tuple(cur)):
            cur = list(best_x)
        cur_val = value(tuple(cur))
        improved = True
        while improved:
            improved = False
            for i in rng.permutation(num_vars):
                cur[i] ^= 1
                cand = tuple(cur)
                if value(cand) < cur_val and feasible(cand):
                    cur_val = value(cand)
                    improved = True
                    break
                cur[i] ^= 1
        if cur_val < best_val:
            best_x, best_val = tuple(cur), cur_val
    return best_x, best_val


# -- model 1: linear division ----------------------------------------------------


@dataclass(frozen=True)
class CutSolution:
    """Edge partition into kept (linear) structure and cut (fusion) edges.

    ``model_cuts`` is the optimum of the degree-2 model alone;
    ``K`` additionally counts cycle-breaking and capacity cuts.
    ``heuristic`` flags a budget-exhausted (non-certified) model solve.
    """

    kept_edges: tuple[tuple[int, int], ...]
    cut_edges: tuple[tuple[int, int], ...]
    subgraphs: tuple[tuple[int, ...], ...]
    K: int
    model_cuts: int
    heuristic: bool = False

    def to_doc(self) -> dict:
        return {
            "kept_edges": [list(e) for e in self.kept_edges],
            "cut_edges": [list(e) for e in self.cut_edges],
            "subgraphs": [list(s) for s in self.subgraphs],
            "K": self.K,
            "model_cuts": self.model_cuts,
            "heuristic": self.heuristic,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "CutSolution":
        return cls(
            kept_edges=tuple(tuple(e) for e in doc["kept_edges"]),
            cut_edges=tuple(tuple(e) for e in doc["cut_edges"]),
            subgraphs=tuple(tuple(s) for s in doc["subgraphs"]),
            K=int(doc["K"]),
            model_cuts=int(doc["model_cuts"]),
            heuristic=bool(doc.get("heuristic", False)),
        )


def _min_degree_cut(
    edges: list[tuple[int, int]],
    degree: dict[int, int],
    node_budget: int,
) -> SolveResult:
    """Fewest edges to cut so every vertex keeps degree <= 2."""
    index = {e: i for i, e in enumerate(edges)}
    constraints = []
    for v, d in degree.items():
        if d > 2:
            # cut at least d - 2 of the edges at v
            coeffs = tuple(
                (index[e], -1) for e in edges if v in e
            )
            constraints.append(Constraint(coeffs, 2 - d))
    # greedy keep: take edges in order while both endpoints stay under 2
    kept_deg: dict[int, int] = {}
    greedy = []
    for u, v in edges:
        if kept_deg.get(u, 0) < 2 and kept_deg.get(v, 0) < 2:
            greedy.append(0)
            kept_deg[u] = kept_deg.get(u, 0) + 1
            kept_deg[v] = kept_deg.get(v, 0) + 1
        else:
            greedy.append(1)
    hints = (tuple(greedy), tuple([1] * len(edges)))
    return solve_binary_min(
        len(edges), [1] * len(edges), constraints, hints=hints, node_budget=node_budget
    )


def _components(vertices, adj):
    seen = set()
    comps = []
    for v in sorted(vertices):
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        stack = [v]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _order_path(comp, adj):
    ends = [v for v in comp if len(adj[v]) <= 1]
    start = min(ends)
    path = [start]
    prev = None
    while True:
        nxt = [w for w in adj[path[-1]] if w != prev]
        if not nxt:
            break
        prev = path[-1]
        path.append(nxt[0])
    if len(path) != len(comp):
        raise AssertionError("component is not a simple path")
    return path


def divide_linear(
    g: GraphState,
    max_caterpillar: int = 30,
    encoding_overhead: int = 4,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> CutSolution:
    """Partition ``g`` into linear subgraphs with the fewest cut edges.

    The exact model minimizes cuts subject to kept-degree <= 2; then
    every kept cycle loses its lexicographically smallest edge, and
    paths are split so that vertex count plus ``encoding_overhead``
    leaf slots per cut-edge endpoint fits ``max_caterpillar``.
    """
    if not g.vertices:
        raise ValueError("graph is empty")
    if g.active_vertices != g.vertices:
        raise ValueError("graph must be fully active")
    edges = sorted(g.edges())
    degree = {v: g.degree(v) for v in g.vertices}

    if edges:
        sol = _min_degree_cut(edges, degree, node_budget)
        cut = {e for e, bit in zip(edges, sol.assignment) if bit}
        model_cuts = sol.value
        heuristic = not sol.optimal
    else:
        cut = set()
        model_cuts = 0
        heuristic = False

    kept = [e for e in edges if e not in cut]
    adj: dict[int, set[int]] = {v: set() for v in g.vertices}
    for u, v in kept:
        adj[u].add(v)
        adj[v].add(u)

    # break kept cycles: components where every vertex has degree 2
    for comp in _components(g.vertices, adj):
        if comp and all(len(adj[v]) == 2 for v in comp):
            u, v = min(_edge(a, b) for a in comp for b in adj[a])
            cut.add(_edge(u, v))
            adj[u].discard(v)
            adj[v].discard(u)

    # split paths that exceed capacity, reserving room for the split cut
    inc = {v: 0 for v in g.vertices}
    for u, v in cut:
        inc[u] += 1
        inc[v] += 1
    worst = max((1 + encoding_overhead * (inc[v] + 2) for v in g.vertices), default=1)
    if worst > max_caterpillar:
        raise CapacityError(
            f"max_caterpillar={max_caterpillar} cannot fit a vertex with "
            f"{encoding_overhead} leaves per fusion endpoint"
        )

    subgraphs: list[tuple[int, ...]] = []
    for comp in _components(g.vertices, adj):
        path = _order_path(comp, adj)
        piece: list[int] = []
        cost = 0
        for idx, v in enumerate(path):
            c = 1 + encoding_overhead * inc[v]
            last = idx == len(path) - 1
            reserve = 0 if last else encoding_overhead
            if piece and cost + c + reserve > max_caterpillar:
                u = piece[-1]
                cut.add(_edge(u, v))
                inc[u] += 1
                inc[v] += 1
                subgraphs.append(tuple(piece))
                piece = [v]
                cost = 1 + encoding_overhead * inc[v]
            else:
                piece.append(v)
                cost += c
        subgraphs.append(tuple(piece))

    subgraphs.sort(key=lambda s: s[0])
    cut_edges = tuple(sorted(cut))
    return CutSolution(
        kept_edges=tuple(sorted(set(edges) - cut)),
        cut_edges=cut_edges,
        subgraphs=tuple(subgraphs),
        K=len(cut_edges),
        model_cuts=model_cuts,
        heuristic=heuristic,
    )


# -- model 2: balanced generation tree --------------------------------------------


@dataclass(frozen=True)
class TreeNode:
    """One merge step: fuse the two children's subgraph sets together."""

    subgraph_ids: tuple[int, ...]
    fusions: tuple[tuple[int, int], ...]
    children: tuple["TreeNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def to_doc(self) -> dict:
        return {
            "subgraphs": list(self.subgraph_ids),
            "fusions": [list(e) for e in self.fusions],
            "children": [c.to_doc() for c in self.children],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "TreeNode":
        return cls(
            subgraph_ids=tuple(doc["subgraphs"]),
            fusions=tuple(tuple(e) for e in doc["fusions"]),
            children=tuple(cls.from_doc(c) for c in doc["children"]),
        )


@dataclass(frozen=True)
class GenerationTree:
    root: TreeNode
    height: int

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)

    def to_doc(self) -> dict:
        return {"height": self.height, "root": self.root.to_doc()}

    @classmethod
    def from_doc(cls, doc: dict) -> "GenerationTree":
        return cls(root=TreeNode.from_doc(doc["root"]), height=int(doc["height"]))


def _balance_bounds(s: int) -> tuple[int, int]:
    """Allowed size range for each child of an s-subgraph node.

    The naive reading of the balance rule (both children at least
    2^floor(log2 s)) over-constrains every s >= 2; each child instead
    gets the halved lower bound plus an upper bound that keeps the
    final height at ceil(log2 s).
    """
    lower = 2 ** (int(math.floor(math.log2(s))) - 1)
    upper = 2 ** (int(math.ceil(math.log2(s))) - 1)
    return lower, upper


def _split_node(
    ids: tuple[int, ...],
    crossing: list[tuple[int, int, int]],
    node_budget: int,
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Bipartition ``ids`` minimizing crossing edges, balance-bounded.

    ``crossing`` holds (edge_index, subgraph_a, subgraph_b) rows.
    Returns (left ids, right ids, separated edge indexes).
    """
    s = len(ids)
    lower, upper = _balance_bounds(s)
    lo = max(lower, s - upper)
    hi = min(upper, s - lower)
    pos = {sid: i for i, sid in enumerate(ids)}
    ne = len(crossing)
    num_vars = s + ne
    costs = [0] * s + [1] * ne
    cons = [Constraint(((pos[ids[0]], 1),), 0)]  # anchor smallest id to the left
    cons.append(Constraint(tuple((i, 1) for i in range(s)), hi))
    cons.append(Constraint(tuple((i, -1) for i in range(s)), -lo))
    for k, (_, a, b) in enumerate(crossing):
        z = s + k
        cons.append(Constraint(((pos[a], 1), (pos[b], -1), (z, -1)), 0))
        cons.append(Constraint(((pos[b], 1), (pos[a], -1), (z, -1)), 0))
    # hint: put the tail half on the right, z set accordingly
    y = [0] * s
    for i in range(s - s // 2, s):
        y[i] = 1
    hint = tuple(y) + tuple(
        1 if y[pos[a]] != y[pos[b]] else 0 for _, a, b in crossing
    )
    sol = solve_binary_min(num_vars, costs, cons, hints=(hint,), node_budget=node_budget)
    left = tuple(sid for sid in ids if sol.assignment[pos[sid]] == 0)
    right = tuple(sid for sid in ids if sol.assignment[pos[sid]] == 1)
    separated = tuple(
        crossing[k][0]
        for k in range(ne)
        if sol.assignment[pos[crossing[k][1]]] != sol.assignment[pos[crossing[k][2]]]
    )
    return left, right, separated


def build_generation_tree(
    cut: CutSolution, node_budget: int = DEFAULT_NODE_BUDGET
) -> GenerationTree:
    """Balanced binary merge tree over the cut solution's subgraphs.

    Each node greedily minimizes the cut edges crossing its own split;
    a cut edge lands on the single node that first separates its two
    endpoint subgraphs, and an edge internal to one subgraph lands on
    that subgraph's leaf.
    """
    if not cut.subgraphs:
        raise ValueError("cut solution has no subgraphs")
    sg_of = {v: i for i, sub in enumerate(cut.subgraphs) for v in sub}
    edge_sgs = [
        (k, sg_of[u], sg_of[v]) for k, (u, v) in enumerate(cut.cut_edges)
    ]

    def build(ids: tuple[int, ...]) -> tuple[TreeNode, int]:
        if len(ids) == 1:
            self_edges = tuple(
                cut.cut_edges[k] for k, a, b in edge_sgs if a == b == ids[0]
            )
            return TreeNode(ids, self_edges), 0
        idset = set(ids)
        crossing = [
            (k, a, b) for k, a, b in edge_sgs if a != b and a in idset and b in idset
        ]
        left, right, separated = _split_node(ids, crossing, node_budget)
        lnode, lh = build(left)
        rnode, rh = build(right)
        fusions = tuple(cut.cut_edges[k] for k in sorted(separated))
        return TreeNode(ids, fusions, (lnode, rnode)), 1 + max(lh, rh)

    root, height = build(tuple(range(len(cut.subgraphs))))
    return GenerationTree(root, height)


def critical_path_cost(tree: GenerationTree) -> int:
    """Max total fusions along any leaf-to-root path."""

    def walk(node: TreeNode) -> int:
        own = len(node.fusions)
        if node.is_leaf:
            return own
        return own + max(walk(c) for c in node.children)

    return walk(tree.root)
