"""Epipolar confidence graph: data model, validation, text interchange.

Relative-rotation convention: the edge rotation r_ij estimates
R_j @ R_i.T, so reversing an edge transposes the rotation.

File format (UTF-8, one record per line, '#' starts a comment):

    N <n_vertices>
    VERTEX_GT <id> <9 floats row-major>       # optional ground truth
    EDGE <i> <j> <9 floats row-major> <confidence>

Records may appear in any order except that ``N`` must come first.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import so3
from .errors import (DuplicateEdgeError, GraphParseError, InvalidArgumentError)


@dataclass(frozen=True, eq=False)
class Edge:
    """Confidence-weighted relative rotation between vertices i < j."""
    i: int
    j: int
    rotation: np.ndarray  # (3, 3), estimates R_j @ R_i.T
    confidence: float


@dataclass(frozen=True, eq=False)
class EpipolarConfidenceGraph:
    n_vertices: int
    edges: tuple[Edge, ...]
    ground_truth: tuple[np.ndarray, ...] | None = None
    _arrays: dict = field(default_factory=dict, repr=False, compare=False)

    def edge_arrays(self):
        """Edges as (idx_i, idx_j, rotations, confidences) arrays, cached."""
        if not self._arrays:
            m = len(self.edges)
            ii = np.fromiter((e.i for e in self.edges), dtype=np.intp, count=m)
            jj = np.fromiter((e.j for e in self.edges), dtype=np.intp, count=m)
            rots = np.stack([e.rotation for e in self.edges]) if m else np.zeros((0, 3, 3))
            conf = np.fromiter((e.confidence for e in self.edges), dtype=float, count=m)
            self._arrays.update(ii=ii, jj=jj, rots=rots, conf=conf)
        a = self._arrays
        return a["ii"], a["jj"], a["rots"], a["conf"]


def build(n: int, edges, ground_truth=None) -> EpipolarConfidenceGraph:
    """Validate and normalize a graph (edges stored with i < j).

    An edge given as (j, i, r) is stored as (i, j, r.T). Duplicate pairs,
    out-of-range indices and confidences outside [0, 1] are rejected.
    """
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 vertices, got {n}")
    seen = set()
    normalized = []
    for e in edges:
        i, j, r, c = e.i, e.j, e.rotation, e.confidence
        if i == j:
            raise InvalidArgumentError(f"self-loop on vertex {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidArgumentError(f"edge ({i},{j}) out of range for N={n}")
        if not (0.0 <= c <= 1.0):
            raise InvalidArgumentError(f"confidence {c} outside [0, 1] on edge ({i},{j})")
        r = so3.as_rotation(r)
        if i > j:
            i, j, r = j, i, r.T
        if (i, j) in seen:
            raise DuplicateEdgeError(f"duplicate edge for pair ({i},{j})")
        seen.add((i, j))
        normalized.append(Edge(i, j, r, float(c)))
    if ground_truth is not None:
        ground_truth = tuple(so3.as_rotation(r) for r in ground_truth)
        if len(ground_truth) != n:
            raise InvalidArgumentError(
                f"ground truth has {len(ground_truth)} rotations, expected {n}")
    return EpipolarConfidenceGraph(n, tuple(normalized), ground_truth)


def connected_components(g: EpipolarConfidenceGraph,
                         min_confidence: float = 0.0) -> list[list[int]]:
    """Components of the subgraph keeping edges with c > min_confidence."""
    adj = [[] for _ in range(g.n_vertices)]
    for e in g.edges:
        if e.confidence > min_confidence:
            adj[e.i].append(e.j)
            adj[e.j].append(e.i)
    seen = [False] * g.n_vertices
    components = []
    for start in range(g.n_vertices):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        components.append(sorted(comp))
    return components


def is_connected(g: EpipolarConfidenceGraph, min_confidence: float = 0.0) -> bool:
    return len(connected_components(g, min_confidence)) == 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def serialize(g: EpipolarConfidenceGraph) -> str:
    """Graph to canonical text; floats carry 17 significant digits so
    parse(serialize(g)) reproduces every value bit-exactly."""
    lines = [f"N {g.n_vertices}"]
    if g.ground_truth is not None:
        for idx, r in enumerate(g.ground_truth):
            lines.append(f"VERTEX_GT {idx} " + " ".join(_fmt(x) for x in r.ravel()))
    for e in g.edges:
        lines.append(f"EDGE {e.i} {e.j} "
                     + " ".join(_fmt(x) for x in e.rotation.ravel())
                     + f" {_fmt(e.confidence)}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> EpipolarConfidenceGraph:
    """Parse the text format; raises GraphParseError with the line number."""
    n = None
    gt: dict[int, np.ndarray] = {}
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "N":
                if n is not None:
                    raise GraphParseError(lineno, "duplicate N record")
                if len(parts) != 2:
                    raise GraphParseError(lineno, "N record needs one integer")
                n = int(parts[1])
            elif tag == "VERTEX_GT":
                if n is None:
                    raise GraphParseError(lineno, "record before N")
                if len(parts) != 11:
                    raise GraphParseError(lineno, "VERTEX_GT needs id + 9 floats")
                idx = int(parts[1])
                if not 0 <= idx < n:
                    raise GraphParseError(lineno, f"vertex id {idx} out of range")
                if idx in gt:
                    raise GraphParseError(lineno, f"duplicate VERTEX_GT {idx}")
                m = np.array([float(x) for x in parts[2:]]).reshape(3, 3)
                gt[idx] = so3.as_rotation(m)
            elif tag == "EDGE":
                if n is None:
                    raise GraphParseError(lineno, "record before N")
                if len(parts) != 13:
                    raise GraphParseError(lineno, "EDGE needs i, j, 9 floats, confidence")
                i, j = int(parts[1]), int(parts[2])
                m = so3.as_rotation(
                    np.array([float(x) for x in parts[3:12]]).reshape(3, 3))
                c = float(parts[12])
                edges.append(Edge(i, j, m, c))
            else:
                raise GraphParseError(lineno, f"unknown record type {tag!r}")
        except GraphParseError:
            raise
        except (ValueError, InvalidArgumentError) as exc:
            raise GraphParseError(lineno, str(exc)) from exc
    if n is None:
        raise GraphParseError(0, "missing N record")
    ground_truth = None
    if gt:
        if len(gt) != n:
            missing = sorted(set(range(n)) - set(gt))
            raise GraphParseError(0, f"incomplete ground truth, missing vertices {missing}")
        ground_truth = [gt[k] for k in range(n)]
    try:
        return build(n, edges, ground_truth)
    except InvalidArgumentError as exc:
        raise GraphParseError(0, str(exc)) from exc
