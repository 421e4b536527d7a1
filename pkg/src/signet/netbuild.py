"""Sign-separated network construction from a correlation matrix.

Three kinds are built: ``anti`` (weights ``|rho|`` on negative pairs),
``positive`` (``rho`` on positive off-diagonal pairs) and the legacy
``fully_connected`` baseline with weights ``exp(-sqrt(2(1-rho)))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .correlation import CorrMatrix

logger = logging.getLogger(__name__)

Kind = Literal["anti", "positive", "fully_connected"]
KINDS: tuple[str, ...] = ("anti", "positive")

# above this node count weights are held as a sparse edge matrix
DENSE_LIMIT = 8192
_BLOCK_ROWS = 1024


@dataclass(frozen=True, eq=False)
class SignedNetwork:
    """One network of a window.

    ``weights`` is a dense ``N x N`` array of sign-split weights (including
    pairs at or below ``theta``) for ``N <= DENSE_LIMIT``, or a sparse CSR
    array holding only edges above that size. Either way the edge set is
    ``weights > theta`` off the diagonal.
    """

    kind: str
    nodes: tuple[str, ...]
    weights: np.ndarray | sp.csr_array
    theta: float = 0.0
    removed: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def is_empty(self) -> bool:
        return self.edge_count == 0

    @property
    def is_dense(self) -> bool:
        return isinstance(self.weights, np.ndarray)

    @cached_property
    def adjacency(self):
        if self.is_dense:
            A = self.weights > self.theta
            np.fill_diagonal(A, False)
            return A
        return (self.weights > self.theta).astype(bool)

    @cached_property
    def csr(self) -> sp.csr_array:
        """Symmetric CSR array of edge weights; non-edges absent."""
        if self.is_dense:
            W = np.where(self.adjacency, self.weights, 0.0)
            return sp.csr_array(W)
        return self.weights.multiply(self.adjacency).tocsr()

    @cached_property
    def edge_count(self) -> int:
        if self.is_dense:
            return int(np.count_nonzero(self.adjacency)) // 2
        return int(self.adjacency.nnz) // 2

    def edge_list(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unordered edges as ``(i, j, w)`` with ``i < j``, lexicographically sorted."""
        upper = sp.triu(self.csr, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return upper.row[order].astype(np.intp), upper.col[order].astype(np.intp), upper.data[order]

    @cached_property
    def degrees(self) -> np.ndarray:
        A = self.adjacency
        return np.asarray(A.sum(axis=1)).ravel().astype(np.int64)

    @cached_property
    def strengths(self) -> np.ndarray:
        return np.asarray(self.csr.sum(axis=1)).ravel()


def _split(rho: np.ndarray, sign: int) -> np.ndarray:
    if sign < 0:
        W = np.where(rho < 0, -rho, 0.0)
    else:
        W = np.where(rho > 0, rho, 0.0)
    np.fill_diagonal(W, 0.0)
    return W


def _sparse_split(rho: np.ndarray, sign: int, theta: float) -> sp.csr_array:
    n = rho.shape[0]
    rows, cols, vals = [], [], []
    for lo in range(0, n, _BLOCK_ROWS):
        block = rho[lo:lo + _BLOCK_ROWS] * sign
        r, c = np.nonzero(block > theta)
        keep = (r + lo) != c
        rows.append(r[keep] + lo)
        cols.append(c[keep])
        vals.append(block[r[keep], c[keep]])
    return sp.csr_array((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def _build_signed(corr: CorrMatrix, theta: float, sign: int, kind: str) -> SignedNetwork:
    if not 0 <= theta < 1:
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    rho = corr.rho
    if corr.n > DENSE_LIMIT:
        W = _sparse_split(rho, sign, theta)
        keep = np.diff(W.indptr) > 0
        W = W[keep][:, keep]
    else:
        W = _split(rho, sign)
        keep = (W > theta).any(axis=1)
        W = W[np.ix_(keep, keep)]
    nodes = tuple(s for s, k in zip(corr.roster, keep) if k)
    removed = tuple(s for s, k in zip(corr.roster, keep) if not k)
    net = SignedNetwork(kind, nodes, W, theta, removed)
    if net.is_empty:
        logger.debug("%s network empty at theta=%g", kind, theta)
    return net


def build_anti(corr: CorrMatrix, theta: float = 0.0) -> SignedNetwork:
    return _build_signed(corr, theta, -1, "anti")


def build_positive(corr: CorrMatrix, theta: float = 0.0) -> SignedNetwork:
    return _build_signed(corr, theta, +1, "positive")


def fully_connected_weight(rho):
    return np.exp(-np.sqrt(2.0 * (1.0 - np.asarray(rho, dtype=np.float64))))


def build_fully_connected(corr: CorrMatrix) -> SignedNetwork:
    """Complete graph with weights ``exp(-d)``, ``d = sqrt(2(1-rho))``; no node removal."""
    W = fully_connected_weight(corr.rho)
    np.fill_diagonal(W, 0.0)
    return SignedNetwork("fully_connected", corr.roster, W, 0.0, ())


def build_network(corr: CorrMatrix, kind: str, theta: float = 0.0) -> SignedNetwork:
    if kind == "anti":
        return build_anti(corr, theta)
    if kind == "positive":
        return build_positive(corr, theta)
    if kind == "fully_connected":
        return build_fully_connected(corr)
    raise ValueError(f"unknown network kind {kind!r}")


def write_edge_list(net: SignedNetwork, dest) -> None:
    i, j, w = net.edge_list()
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        fh.write("symbol_i,symbol_j,weight\n")
        for a, b, x in zip(i, j, w):
            fh.write(f"{net.nodes[a]},{net.nodes[b]},{float(x)!r}\n")


def write_node_table(net: SignedNetwork, dest) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        fh.write("symbol,strength\n")
        for sym, s in zip(net.nodes, net.strengths):
            fh.write(f"{sym},{float(s)!r}\n")
