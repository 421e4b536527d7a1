"""Degree/strength, strength assortativity, weighted clustering, components and
average shortest path length of a :class:`SignedNetwork`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .netbuild import SignedNetwork

# density above which clustering uses a dense matrix product
_DENSE_CLUSTERING_DENSITY = 0.05
_DIJKSTRA_BLOCK = 256


@dataclass(frozen=True, eq=False)
class NodeMetrics:
    degree: np.ndarray
    strength: np.ndarray


@dataclass(frozen=True)
class NetworkMetrics:
    n_nodes: int
    edge_count: int
    assortativity: float | None
    avg_clustering: float | None
    avg_path_len: float | None
    lcc_size: int
    n_components: int
    # metric name -> why it is undefined
    undefined: dict[str, str] = field(default_factory=dict)


def node_metrics(net: SignedNetwork) -> NodeMetrics:
    """Degree and strength; only retained edges (weight above theta) contribute."""
    return NodeMetrics(net.degrees.copy(), net.strengths.copy())


def _assortativity_terms(net: SignedNetwork) -> tuple[float, float, float]:
    """Numerator and denominator, plus a scale for the zero-denominator test.

    Both sums are evaluated in the centred form
    ``sum_ij A_ij (s_i - mu)(s_j - mu)`` and ``sum_i k_i (s_i - mu)^2`` with
    ``mu = sum_i k_i s_i / 2m``, which is algebraically identical but avoids
    cancelling two large terms.
    """
    k = net.degrees.astype(np.float64)
    s = net.strengths
    mu = float(k @ s) / (2.0 * net.edge_count)
    c = s - mu
    A = net.csr.astype(bool).astype(np.float64)
    num = float(c @ (A @ c))
    den = float(k @ (c * c))
    return num, den, float(k @ (s * s))


def assortativity(net: SignedNetwork) -> float | None:
    """Strength assortativity, evaluated over all node pairs as written.

    ``sum_ij (A_ij - k_i k_j / 2m) s_i s_j / sum_ij (k_i delta_ij - k_i k_j / 2m) s_i s_j``.
    Returns None with fewer than two edges or when the denominator vanishes.
    """
    if net.edge_count < 2:
        return None
    num, den, scale = _assortativity_terms(net)
    if den <= 1e-14 * scale:
        return None
    return num / den


def local_clustering(net: SignedNetwork) -> np.ndarray:
    """Per-node geometric-mean weighted clustering, weights normalised by the network maximum.

    The triangle sum runs over ordered neighbour pairs, so an equal-weight
    triangle scores exactly 1. Nodes with fewer than two neighbours score 0.
    """
    n = net.n
    if n == 0 or net.edge_count == 0:
        return np.zeros(n)
    W = net.csr
    wmax = W.data.max()
    M = W.copy()
    M.data = np.cbrt(M.data / wmax)
    density = 2.0 * net.edge_count / (n * (n - 1)) if n > 1 else 0.0
    if density >= _DENSE_CLUSTERING_DENSITY:
        D = M.toarray()
        tri = np.einsum("ij,ij->i", D @ D, D)
    else:
        tri = np.asarray((M @ M).multiply(M).sum(axis=1)).ravel()
    k = net.degrees.astype(np.float64)
    C = np.zeros(n)
    ok = k >= 2
    C[ok] = tri[ok] / (k[ok] * (k[ok] - 1.0))
    return C


def avg_clustering(net: SignedNetwork) -> float | None:
    if net.n == 0:
        return None
    return float(local_clustering(net).mean())


def components(net: SignedNetwork) -> list[np.ndarray]:
    """Connected components as sorted node-index arrays, largest first; ties by smallest member."""
    if net.n == 0:
        return []
    _, labels = connected_components(net.csr, directed=False)
    groups: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(node)
    comps = [np.array(g, dtype=np.intp) for g in groups.values()]
    comps.sort(key=lambda c: (-len(c), int(c[0])))
    return comps


def edge_distances(W: sp.csr_array) -> sp.csr_array:
    """Same sparsity, data ``sqrt(2(1-w))``; zero-length edges stay explicit."""
    D = sp.csr_array((np.sqrt(np.clip(2.0 * (1.0 - W.data), 0.0, None)), W.indices, W.indptr), shape=W.shape)
    return D


def avg_path_length(net: SignedNetwork, lcc: np.ndarray | None = None) -> float | None:
    """Mean shortest-path distance over ordered pairs of the largest component.

    Edge lengths are ``sqrt(2(1-w))``. Returns None when the largest
    component has fewer than two nodes.
    """
    if lcc is None:
        comps = components(net)
        if not comps:
            return None
        lcc = comps[0]
    n = len(lcc)
    if n < 2:
        return None
    W = net.csr[lcc][:, lcc]
    D = edge_distances(sp.csr_array(W))
    total = 0.0
    for lo in range(0, n, _DIJKSTRA_BLOCK):
        dist = dijkstra(D, directed=False, indices=np.arange(lo, min(lo + _DIJKSTRA_BLOCK, n)))
        total += float(dist.sum())
    return total / (n * (n - 1))


def network_metrics(net: SignedNetwork, with_paths: bool = True) -> NetworkMetrics:
    undefined: dict[str, str] = {}
    comps = components(net)
    lcc = comps[0] if comps else np.array([], dtype=np.intp)

    if net.edge_count < 2:
        r = None
        undefined["assortativity"] = "fewer than 2 edges"
    else:
        r = assortativity(net)
        if r is None:
            undefined["assortativity"] = "zero denominator (uniform strengths)"

    C = avg_clustering(net)
    if C is None:
        undefined["avg_clustering"] = "empty network"

    L = None
    if not with_paths:
        undefined["avg_path_len"] = "not computed"
    elif len(lcc) < 2:
        undefined["avg_path_len"] = "largest component has fewer than 2 nodes"
    else:
        L = avg_path_length(net, lcc)

    return NetworkMetrics(
        n_nodes=net.n,
        edge_count=net.edge_count,
        assortativity=r,
        avg_clustering=C,
        avg_path_len=L,
        lcc_size=len(lcc),
        n_components=len(comps),
        undefined=undefined,
    )
