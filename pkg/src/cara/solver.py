"""Iterative Lie-algebra weighted least squares over the confidence graph.

Each iteration linearizes the consistency residuals
``log(R_j^T @ r_ij @ R_i)`` around the current estimates and solves the
weighted normal equations. Because every weight block is a scalar times
the identity, the 3N x 3N system factors into a weighted graph Laplacian
acting on three right-hand-side columns; the Laplacian is assembled
sparse, anchored by deleting the anchor vertex's row/column, and
factorized once per weight setting.

Edges are consumed through a chunked stream abstraction so the same loop
serves both in-memory graphs and the edge-by-edge file mode used for
large scenes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import DegenerateWeightsError, InvalidArgumentError, NotConnectedError
from .graph import EpipolarConfidenceGraph, connected_components
from .tree_init import _pick_root

KERNEL_KINDS = ("confidence", "l2", "l_half", "cauchy", "geman_mcclure")

# Clamp for the l_half IRLS weight x^(-3/2) at zero residual.
L_HALF_EPS = 1e-5
# Weight floor applied when IRLS re-weighting disconnects the graph.
WEIGHT_FLOOR = 1e-6


@dataclass
class SolveConfig:
    max_iterations: int = 3
    anchor: str = "fix-root"          # "fix-root" | "tikhonov"
    tikhonov_lambda: float = 1e-8
    residual_tolerance: float = 1e-10
    irls_max_iterations: int = 20
    irls_rel_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgumentError("max_iterations must be >= 1")
        if self.anchor not in ("fix-root", "tikhonov"):
            raise InvalidArgumentError(f"unknown anchor mode {self.anchor!r}")
        if self.anchor == "tikhonov" and not self.tikhonov_lambda > 0:
            raise InvalidArgumentError("tikhonov_lambda must be positive")
        if self.irls_max_iterations < 1:
            raise InvalidArgumentError("irls_max_iterations must be >= 1")


@dataclass
class RobustKernel:
    kind: str = "confidence"
    alpha: float = math.radians(5.0)

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidArgumentError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("cauchy", "geman_mcclure") and not self.alpha > 0:
            raise InvalidArgumentError("alpha must be positive for this kernel")

    def weights(self, x: np.ndarray) -> np.ndarray:
        """IRLS weights psi(x)/x for residual angles x."""
        if self.kind == "l2":
            return np.ones_like(x)
        if self.kind == "cauchy":
            return 1.0 / (1.0 + (x / self.alpha) ** 2)
        if self.kind == "geman_mcclure":
            a2 = self.alpha ** 2
            return a2 / (a2 + x ** 2) ** 2
        if self.kind == "l_half":
            return np.maximum(x, L_HALF_EPS) ** -1.5
        raise InvalidArgumentError("confidence kernel has fixed weights c_ij")

    def rho(self, x: np.ndarray) -> np.ndarray:
        """Robust cost per residual angle."""
        if self.kind == "l2":
            return 0.5 * x ** 2
        if self.kind == "cauchy":
            return 0.5 * self.alpha ** 2 * np.log1p((x / self.alpha) ** 2)
        if self.kind == "geman_mcclure":
            return x ** 2 / (2.0 * (self.alpha ** 2 + x ** 2))
        if self.kind == "l_half":
            return np.sqrt(np.abs(x))
        raise InvalidArgumentError("confidence kernel cost is c * x^2")


@dataclass
class SolveReport:
    rotations: np.ndarray              # (N, 3, 3)
    loss_history: list[float]
    max_residual_history: list[float]
    iterations_run: int
    anchor_vertex: int
    diagnostics: list[str] = field(default_factory=list)


class EdgeStream:
    """Re-iterable chunked source of edge data for the solver.

    ``passes()`` yields (edge_indices, rotations) chunks covering every
    edge exactly once; it may be called once per solver iteration.
    """

    def __init__(self, n_vertices, ii, jj, confidences):
        self.n_vertices = int(n_vertices)
        self.ii = np.asarray(ii, dtype=np.intp)
        self.jj = np.asarray(jj, dtype=np.intp)
        self.confidences = np.asarray(confidences, dtype=float)

    def passes(self):
        raise NotImplementedError


class ArrayEdgeStream(EdgeStream):
    """In-memory stream: all edges in one chunk."""

    def __init__(self, n_vertices, ii, jj, confidences, rotations):
        super().__init__(n_vertices, ii, jj, confidences)
        self.rotations = np.asarray(rotations, dtype=float)

    @classmethod
    def from_graph(cls, g: EpipolarConfidenceGraph) -> "ArrayEdgeStream":
        ii, jj, rots, conf = g.edge_arrays()
        return cls(g.n_vertices, ii, jj, conf, rots)

    def passes(self):
        yield np.arange(len(self.ii)), self.rotations


def cal_loss(g: EpipolarConfidenceGraph, rotations: np.ndarray) -> float:
    """Confidence-weighted sum of squared geodesic residuals."""
    rotations = np.asarray(rotations, dtype=float)
    if rotations.shape != (g.n_vertices, 3, 3):
        raise InvalidArgumentError(
            f"expected {g.n_vertices} rotations, got shape {rotations.shape}")
    ii, jj, rots, conf = g.edge_arrays()
    if len(conf) == 0:
        return 0.0
    res = kernels.edge_residuals(rotations[ii], rotations[jj], rots)
    return float(conf @ np.einsum("ij,ij->i", res, res))


def _check_connectivity(g: EpipolarConfidenceGraph):
    comps = connected_components(g, min_confidence=-1.0)
    if len(comps) > 1:
        raise NotConnectedError(comps)
    comps = connected_components(g, min_confidence=0.0)
    if len(comps) > 1:
        raise DegenerateWeightsError(
            f"positive-confidence subgraph splits into {len(comps)} components; "
            "the weighted normal equations are singular")


def _components_from_arrays(n, ii, jj, mask):
    adj = [[] for _ in range(n)]
    for a, b in zip(ii[mask], jj[mask]):
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return count


def _factor_laplacian(n, ii, jj, w, anchor, config):
    """Factorized solve for the anchored / regularized weighted Laplacian."""
    rows = np.concatenate([ii, jj, ii, jj])
    cols = np.concatenate([ii, jj, jj, ii])
    data = np.concatenate([w, w, -w, -w])
    L = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsc()
    if config.anchor == "tikhonov":
        L = L + config.tikhonov_lambda * sp.identity(n, format="csc")
        keep = np.arange(n)
    else:
        keep = np.array([v for v in range(n) if v != anchor])
        L = L[keep][:, keep]
    try:
        lu = spla.splu(L.tocsc())
    except RuntimeError as exc:
        raise DegenerateWeightsError(f"normal equations are singular: {exc}") from exc
    if np.min(np.abs(lu.U.diagonal())) < 1e-14:
        raise DegenerateWeightsError("normal equations are numerically singular")

    def solve(rhs_full):
        delta = np.zeros((n, 3))
        delta[keep] = lu.solve(rhs_full[keep])
        return delta

    return solve


def _residual_pass(stream: EdgeStream, rotations, weights):
    """One sweep over the edges: accumulated rhs B^T W db, per-edge residual
    norms, and the max residual norm."""
    n = stream.n_vertices
    rhs = np.zeros((n, 3))
    norms = np.zeros(len(stream.ii))
    for idx, rots in stream.passes():
        ii = stream.ii[idx]
        jj = stream.jj[idx]
        res = kernels.edge_residuals(rotations[ii], rotations[jj], rots)
        wres = weights[idx, None] * res
        np.subtract.at(rhs, ii, wres)
        np.add.at(rhs, jj, wres)
        norms[idx] = np.sqrt(np.einsum("ij,ij->i", res, res))
    return rhs, norms


def _apply_update(rotations, delta, anchor, config):
    if config.anchor == "fix-root":
        delta = delta.copy()
        delta[anchor] = 0.0
    return rotations @ kernels.batch_exp(delta)


def cao_solve_stream(stream: EdgeStream, initial_rotations, config=None,
                     anchor_vertex=None, diagnostics=None) -> SolveReport:
    """Fixed-weight iterated WLS over an edge stream (memory O(N + |E|))."""
    config = config or SolveConfig()
    n = stream.n_vertices
    R = np.array(initial_rotations, dtype=float)
    if R.shape != (n, 3, 3):
        raise InvalidArgumentError(f"expected {n} initial rotations, got {R.shape}")
    conf = stream.confidences
    if anchor_vertex is None:
        anchor_vertex = 0
    diagnostics = list(diagnostics or [])

    solve = _factor_laplacian(n, stream.ii, stream.jj, conf, anchor_vertex, config)

    loss_history: list[float] = []
    max_residual_history: list[float] = []
    iterations_run = 0
    stopped_early = False
    for _ in range(config.max_iterations):
        rhs, norms, = _residual_pass(stream, R, conf)[:2]
        loss_history.append(float(conf @ norms ** 2))
        max_res = float(norms.max()) if len(norms) else 0.0
        max_residual_history.append(max_res)
        if max_res < config.residual_tolerance:
            stopped_early = True
            break
        delta = solve(rhs)
        R = _apply_update(R, delta, anchor_vertex, config)
        iterations_run += 1
    if not stopped_early:
        _, norms = _residual_pass(stream, R, conf)
        loss_history.append(float(conf @ norms ** 2))
        max_residual_history.append(float(norms.max()) if len(norms) else 0.0)
    return SolveReport(R, loss_history, max_residual_history, iterations_run,
                       anchor_vertex, diagnostics)


def cao_solve(g: EpipolarConfidenceGraph, initial_rotations,
              config: SolveConfig | None = None) -> SolveReport:
    """Confidence-weighted optimization (fixed weights c_ij)."""
    _check_connectivity(g)
    stream = ArrayEdgeStream.from_graph(g)
    return cao_solve_stream(stream, initial_rotations, config,
                            anchor_vertex=_pick_root(g))


def irls_solve(g: EpipolarConfidenceGraph, initial_rotations,
               kernel: RobustKernel | None = None,
               config: SolveConfig | None = None) -> SolveReport:
    """Iteratively re-weighted least squares under a robust kernel.

    ``kind="confidence"`` degenerates to :func:`cao_solve`. Otherwise
    each outer iteration re-derives per-edge weights from the current
    residual angles and takes one weighted least-squares step; it stops
    when the relative change of the robust objective falls below
    ``irls_rel_tol`` or after ``irls_max_iterations`` steps.
    """
    kernel = kernel or RobustKernel()
    config = config or SolveConfig()
    if kernel.kind == "confidence":
        return cao_solve(g, initial_rotations, config)

    comps = connected_components(g, min_confidence=-1.0)
    if len(comps) > 1:
        raise NotConnectedError(comps)

    stream = ArrayEdgeStream.from_graph(g)
    n = g.n_vertices
    R = np.array(initial_rotations, dtype=float)
    if R.shape != (n, 3, 3):
        raise InvalidArgumentError(f"expected {n} initial rotations, got {R.shape}")
    anchor = _pick_root(g)
    diagnostics: list[str] = []

    loss_history: list[float] = []
    max_residual_history: list[float] = []
    iterations_run = 0
    prev_obj = None
    while iterations_run < config.irls_max_iterations:
        _, norms = _residual_pass(stream, R, np.zeros(len(stream.ii)))
        obj = float(np.sum(kernel.rho(norms)))
        loss_history.append(obj)
        max_res = float(norms.max()) if len(norms) else 0.0
        max_residual_history.append(max_res)
        if max_res < config.residual_tolerance:
            break
        if prev_obj is not None:
            denom = max(abs(prev_obj), 1e-30)
            if abs(prev_obj - obj) <= config.irls_rel_tol * denom:
                break
        prev_obj = obj

        w = kernel.weights(norms)
        if _components_from_arrays(n, stream.ii, stream.jj, w > 0) > 1:
            w = np.maximum(w, WEIGHT_FLOOR)
            diagnostics.append(
                "re-weighting disconnected the graph; weights floored at "
                f"{WEIGHT_FLOOR}")
        rhs, _ = _residual_pass(stream, R, w)
        solve = _factor_laplacian(n, stream.ii, stream.jj, w, anchor, config)
        delta = solve(rhs)
        R = _apply_update(R, delta, anchor, config)
        iterations_run += 1
    else:
        # ran out of iterations: record the final objective
        _, norms = _residual_pass(stream, R, np.zeros(len(stream.ii)))
        loss_history.append(float(np.sum(kernel.rho(norms))))
        max_residual_history.append(float(norms.max()) if len(norms) else 0.0)
    return SolveReport(R, loss_history, max_residual_history, iterations_run,
                       anchor, diagnostics)
