"""Initialization from a maximum spanning tree over edge confidences.

Prim's algorithm picks the highest-confidence edge crossing the frontier
at each step; absolute rotations are then chained outward from the root.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NotConnectedError
from .graph import EpipolarConfidenceGraph, connected_components

LOW_CONFIDENCE_WARN = 0.01


@dataclass(frozen=True, eq=False)
class TreeEdge:
    child: int
    parent: int
    rotation: np.ndarray  # maps parent frame to child: R_child @ R_parent.T
    confidence: float


@dataclass(frozen=True, eq=False)
class SpanningTree:
    root: int
    parent_edges: tuple[TreeEdge, ...]
    total_confidence: float
    diagnostics: tuple[str, ...] = field(default=())


def _pick_root(g: EpipolarConfidenceGraph) -> int:
    # Root where the model is most certain: max summed incident confidence,
    # ties broken by lowest index.
    strength = np.zeros(g.n_vertices)
    for e in g.edges:
        strength[e.i] += e.confidence
        strength[e.j] += e.confidence
    return int(np.argmax(strength))


def maximum_spanning_tree(g: EpipolarConfidenceGraph) -> SpanningTree:
    """Deterministic maximum spanning tree of the confidence graph.

    Ties between equal-confidence edges are broken toward the
    lexicographically smallest (min(i,j), max(i,j)) pair, so the tree is
    independent of edge input order.
    """
    components = connected_components(g, min_confidence=-1.0)
    if len(components) > 1:
        raise NotConnectedError(components)

    adj: list[list] = [[] for _ in range(g.n_vertices)]
    for e in g.edges:
        adj[e.i].append(e)
        adj[e.j].append(e)

    root = _pick_root(g)
    in_tree = [False] * g.n_vertices
    in_tree[root] = True
    heap: list = []

    def push_frontier(v: int):
        for e in adj[v]:
            other = e.j if e.i == v else e.i
            if not in_tree[other]:
                heapq.heappush(heap, (-e.confidence, e.i, e.j, v, other, e))

    push_frontier(root)
    edges: list[TreeEdge] = []
    total = 0.0
    while heap and len(edges) < g.n_vertices - 1:
        neg_c, _, _, parent, child, e = heapq.heappop(heap)
        if in_tree[child]:
            continue
        in_tree[child] = True
        rot = e.rotation if parent == e.i else e.rotation.T
        edges.append(TreeEdge(child, parent, rot, e.confidence))
        total += e.confidence
        push_frontier(child)

    diagnostics = []
    weak = [te for te in edges if te.confidence < LOW_CONFIDENCE_WARN]
    if weak:
        pairs = ", ".join(f"({te.parent},{te.child})" for te in weak)
        diagnostics.append(
            f"{len(weak)} spanning-tree edge(s) have confidence < "
            f"{LOW_CONFIDENCE_WARN}: {pairs}")
    return SpanningTree(root, tuple(edges), total, tuple(diagnostics))


def propagate(tree: SpanningTree, g: EpipolarConfidenceGraph) -> np.ndarray:
    """Chain relative rotations from the root: (N, 3, 3) absolute rotations.

    R_root = I and R_child = tree_rotation @ R_parent, applied in BFS
    order from the root.
    """
    n = g.n_vertices
    if len(tree.parent_edges) != n - 1:
        raise InvalidArgumentError(
            f"tree has {len(tree.parent_edges)} edges, expected {n - 1}")
    children: dict[int, list[TreeEdge]] = {}
    for te in tree.parent_edges:
        children.setdefault(te.parent, []).append(te)

    rotations = np.zeros((n, 3, 3))
    rotations[tree.root] = np.eye(3)
    placed = [False] * n
    placed[tree.root] = True
    queue = [tree.root]
    while queue:
        v = queue.pop(0)
        for te in children.get(v, ()):
            rotations[te.child] = te.rotation @ rotations[v]
            placed[te.child] = True
            queue.append(te.child)
    if not all(placed):
        raise InvalidArgumentError("spanning tree does not cover every vertex")
    return rotations
