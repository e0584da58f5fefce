"""Weighted graphs, random generators, topology perturbations, and the GFT.

Graphs are undirected with nonnegative weights and a zero diagonal.  The
Laplacian is L = D - W with d_mm = sum_n w_mn.  All operations are pure;
randomized ones take an explicit numpy Generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, TextIO

import numpy as np

from .errors import (
    AsymmetricWeights,
    DecompositionFailure,
    DimensionMismatch,
    DuplicateNodeId,
    InvalidProbability,
    NegativeWeight,
    NonzeroDiagonal,
    NoRoomToAdd,
    TooManyRemovals,
)

SYMMETRY_TOL = 1e-12
ZERO_EIG_TOL = 1e-9

# signature: (rng, id_a, id_b, graph) -> weight
WeightPolicy = Callable[[np.random.Generator, int, int, "Graph"], float]


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with stable integer node IDs."""

    node_ids: tuple
    weights: np.ndarray
    positions: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def laplacian(self) -> np.ndarray:
        degrees = self.weights.sum(axis=1)
        return np.diag(degrees) - self.weights

    def edge_list(self) -> list:
        """Edges as (id_a, id_b, weight) with id_a < id_b in index order."""
        iu, ju = np.nonzero(np.triu(self.weights, k=1))
        return [
            (self.node_ids[i], self.node_ids[j], float(self.weights[i, j]))
            for i, j in zip(iu, ju)
        ]

    def index_of(self, node_id) -> int:
        return self.node_ids.index(node_id)


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Laplacian."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class NodeMapping:
    """Correspondence between a historical and a current node set."""

    kept: frozenset
    removed: frozenset
    added: frozenset
    hist_index: dict
    curr_index: dict

    @classmethod
    def identity(cls, node_ids: Iterable) -> "NodeMapping":
        index = {v: i for i, v in enumerate(node_ids)}
        return cls(
            kept=frozenset(index),
            removed=frozenset(),
            added=frozenset(),
            hist_index=index,
            curr_index=dict(index),
        )

    def kept_sorted(self) -> list:
        return sorted(self.kept)


def build_graph(weights, node_ids=None, positions=None) -> Graph:
    """Validate raw inputs and assemble a Graph.

    Raises AsymmetricWeights / NegativeWeight / NonzeroDiagonal /
    DuplicateNodeId on invariant violations.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
        raise DimensionMismatch(f"weights must be square, got {weights.shape}")
    n = weights.shape[0]
    if node_ids is None:
        node_ids = tuple(range(n))
    else:
        node_ids = tuple(node_ids)
    if len(node_ids) != n:
        raise DimensionMismatch("node_ids length does not match weights")
    if len(set(node_ids)) != n:
        raise DuplicateNodeId("node_ids must be unique")
    if np.max(np.abs(weights - weights.T), initial=0.0) > SYMMETRY_TOL:
        raise AsymmetricWeights("weight matrix is not symmetric")
    weights = 0.5 * (weights + weights.T)
    if np.any(weights < 0):
        raise NegativeWeight("weights must be nonnegative")
    if np.any(np.diagonal(weights) != 0):
        raise NonzeroDiagonal("self loops are not allowed")
    if positions is not None:
        positions = np.asarray(positions, dtype=float)
        if positions.shape != (n, 2):
            raise DimensionMismatch("positions must be (N, 2)")
    return Graph(node_ids=node_ids, weights=weights, positions=positions)


def spectral_decompose(g: Graph) -> SpectralBasis:
    """Eigendecomposition of the Laplacian with a deterministic sign fix.

    Each eigenvector's first entry of magnitude > 1e-9 is made positive so
    repeated calls on the same graph are bitwise identical.
    """
    try:
        lam, u = np.linalg.eigh(g.laplacian)
    except np.linalg.LinAlgError as exc:
        raise DecompositionFailure(str(exc)) from exc
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    u = u[:, order]
    for i in range(u.shape[1]):
        col = u[:, i]
        significant = np.nonzero(np.abs(col) > ZERO_EIG_TOL)[0]
        if significant.size and col[significant[0]] < 0:
            u[:, i] = -col
    return SpectralBasis(eigenvalues=lam, eigenvectors=u)


def gft(basis: SpectralBasis, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != basis.n:
        raise DimensionMismatch(f"signal length {x.shape[-1]} != {basis.n}")
    return x @ basis.eigenvectors


def igft(basis: SpectralBasis, x_hat: np.ndarray) -> np.ndarray:
    x_hat = np.asarray(x_hat, dtype=float)
    if x_hat.shape[-1] != basis.n:
        raise DimensionMismatch(f"spectrum length {x_hat.shape[-1]} != {basis.n}")
    return x_hat @ basis.eigenvectors.T


def uniform_weights(low: float, high: float) -> WeightPolicy:
    """Policy drawing i.i.d. U(low, high) weights (ER-style)."""

    def policy(rng, id_a, id_b, graph):
        return float(rng.uniform(low, high))

    return policy


def kernel_weights(theta: float) -> WeightPolicy:
    """Policy weighting an edge by exp(-dist/theta) of its endpoints (RS-style)."""

    def policy(rng, id_a, id_b, graph):
        pa = graph.positions[graph.index_of(id_a)]
        pb = graph.positions[graph.index_of(id_b)]
        return float(np.exp(-np.linalg.norm(pa - pb) / theta))

    return policy


def gen_er(
    n: int,
    p: float,
    weight_low: float = 1.0,
    weight_high: float = 3.0,
    rng: np.random.Generator = None,
) -> Graph:
    """Erdos-Renyi graph: each pair connected with probability p, U(low, high) weights."""
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"p = {p}")
    if weight_low > weight_high:
        raise InvalidProbability("weight_low > weight_high")
    rng = np.random.default_rng(rng)
    iu, ju = np.triu_indices(n, k=1)
    present = rng.random(iu.size) < p
    w_vals = rng.uniform(weight_low, weight_high, size=iu.size)
    weights = np.zeros((n, n))
    weights[iu[present], ju[present]] = w_vals[present]
    weights += weights.T
    return build_graph(weights)


def gen_rs(
    n: int,
    k: int,
    theta: Optional[float] = None,
    rng: np.random.Generator = None,
) -> Graph:
    """Random sensor graph: uniform positions in the unit square, symmetrized
    k-nearest-neighbor edges, weights exp(-dist/theta).

    theta defaults to the mean pairwise distance over all node pairs of this
    instance, a scale-free choice that keeps weights well spread in (0, 1].
    """
    if k >= n:
        raise InvalidProbability(f"k = {k} must be < n = {n}")
    rng = np.random.default_rng(rng)
    positions = rng.random((n, 2))
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    adjacency = np.zeros((n, n), dtype=bool)
    for i in range(n):
        d = dist[i].copy()
        d[i] = np.inf
        neighbors = np.argsort(d, kind="stable")[:k]
        adjacency[i, neighbors] = True
    adjacency |= adjacency.T
    if theta is None:
        iu, ju = np.triu_indices(n, k=1)
        theta = float(dist[iu, ju].mean())
    weights = np.where(adjacency, np.exp(-dist / theta), 0.0)
    np.fill_diagonal(weights, 0.0)
    return build_graph(weights, positions=positions)


def _nonedge_pairs(weights: np.ndarray):
    iu, ju = np.triu_indices(weights.shape[0], k=1)
    absent = weights[iu, ju] == 0.0
    return iu[absent], ju[absent]


def perturb_edges(
    g: Graph, e: int, weight_policy: WeightPolicy, rng: np.random.Generator = None
) -> Graph:
    """Remove e random edges and add e edges between random non-adjacent pairs.

    Node set is unchanged; new weights come from weight_policy.
    """
    rng = np.random.default_rng(rng)
    iu, ju = np.triu_indices(g.n, k=1)
    present = g.weights[iu, ju] > 0.0
    edge_idx = np.nonzero(present)[0]
    if e > edge_idx.size:
        raise TooManyRemovals(f"cannot remove {e} of {edge_idx.size} edges")
    ni, nj = _nonedge_pairs(g.weights)
    if e > ni.size:
        raise NoRoomToAdd(f"cannot add {e} edges, only {ni.size} free pairs")
    weights = g.weights.copy()
    remove = rng.choice(edge_idx, size=e, replace=False)
    weights[iu[remove], ju[remove]] = 0.0
    weights[ju[remove], iu[remove]] = 0.0
    add = rng.choice(ni.size, size=e, replace=False)
    new_graph = Graph(node_ids=g.node_ids, weights=weights, positions=g.positions)
    for idx in add:
        a, b = int(ni[idx]), int(nj[idx])
        w = weight_policy(rng, g.node_ids[a], g.node_ids[b], new_graph)
        weights[a, b] = w
        weights[b, a] = w
    return build_graph(weights, node_ids=g.node_ids, positions=g.positions)


def perturb_nodes(
    g: Graph,
    v: int,
    p_v: float,
    weight_policy: WeightPolicy,
    rng: np.random.Generator = None,
):
    """Remove v random nodes and add v fresh-ID nodes with Bernoulli(p_v) edges.

    Returns (perturbed graph, NodeMapping).  Added nodes get fresh uniform
    positions when the input graph carries positions.
    """
    if v >= g.n:
        raise TooManyRemovals(f"cannot remove {v} of {g.n} nodes")
    if not 0.0 <= p_v <= 1.0:
        raise InvalidProbability(f"p_v = {p_v}")
    rng = np.random.default_rng(rng)
    remove_rows = rng.choice(g.n, size=v, replace=False)
    keep_rows = np.setdiff1d(np.arange(g.n), remove_rows)
    kept_ids = [g.node_ids[i] for i in keep_rows]
    removed_ids = [g.node_ids[i] for i in remove_rows]
    next_id = max(g.node_ids) + 1 if g.node_ids else 0
    added_ids = list(range(next_id, next_id + v))

    n_c = len(kept_ids) + v
    weights = np.zeros((n_c, n_c))
    weights[: len(kept_ids), : len(kept_ids)] = g.weights[np.ix_(keep_rows, keep_rows)]
    positions = None
    if g.positions is not None:
        positions = np.vstack([g.positions[keep_rows], rng.random((v, 2))])

    node_ids = tuple(kept_ids + added_ids)
    for a in range(len(kept_ids), n_c):
        connected = np.nonzero(rng.random(a) < p_v)[0]
        partial = Graph(node_ids=node_ids, weights=weights, positions=positions)
        for b in connected:
            w = weight_policy(rng, node_ids[a], node_ids[b], partial)
            weights[a, b] = w
            weights[b, a] = w
    graph_c = build_graph(weights, node_ids=node_ids, positions=positions)
    mapping = NodeMapping(
        kept=frozenset(kept_ids),
        removed=frozenset(removed_ids),
        added=frozenset(added_ids),
        hist_index={nid: i for i, nid in enumerate(g.node_ids)},
        curr_index={nid: i for i, nid in enumerate(node_ids)},
    )
    return graph_c, mapping


def save_graph(g: Graph, fh: TextIO) -> None:
    """Edge-list text format: `nodes <N>` header, optional `id`/`pos` lines,
    then one `id_a id_b weight` line per edge."""
    fh.write(f"nodes {g.n}\n")
    if g.node_ids != tuple(range(g.n)):
        fh.write("ids " + " ".join(str(i) for i in g.node_ids) + "\n")
    if g.positions is not None:
        for nid, (x, y) in zip(g.node_ids, g.positions):
            fh.write(f"pos {nid} {float(x)!r} {float(y)!r}\n")
    for a, b, w in g.edge_list():
        fh.write(f"{a} {b} {w!r}\n")


def load_graph(fh: TextIO) -> Graph:
    """Inverse of save_graph."""
    header = fh.readline().split()
    if len(header) != 2 or header[0] != "nodes":
        raise DimensionMismatch("missing `nodes <N>` header")
    n = int(header[1])
    node_ids = tuple(range(n))
    pos = {}
    edges = []
    for line in fh:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "ids":
            node_ids = tuple(int(t) for t in parts[1:])
        elif parts[0] == "pos":
            pos[int(parts[1])] = (float(parts[2]), float(parts[3]))
        else:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    index = {nid: i for i, nid in enumerate(node_ids)}
    weights = np.zeros((n, n))
    for a, b, w in edges:
        weights[index[a], index[b]] = w
        weights[index[b], index[a]] = w
    positions = None
    if pos:
        positions = np.array([pos[nid] for nid in node_ids])
    return build_graph(weights, node_ids=node_ids, positions=positions)
