"""Directed interaction topology: Laplacian, spanning tree, spectral summary.

All operations are pure functions on immutable inputs and are safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NoSpanningTree

# An eigenvalue counts as zero when |lam| < ZERO_EIG_RTOL * max(1, ||L||_inf),
# so the test survives uniform weight scaling.
ZERO_EIG_RTOL = 1e-8


@dataclass
class Digraph:
    """Weighted directed interaction topology on N agents.

    ``weights[i, j] > 0`` means agent j is an in-neighbor of agent i, i.e.
    information flows from j to i along the edge (j -> i).
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {w.shape}")
        if w.shape[0] < 1:
            raise ValueError("at least one agent required")
        if np.any(w < 0):
            raise ValueError("edge weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-weights must be zero")
        self.weights = w

    @property
    def n_agents(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n_agents: int, edges) -> "Digraph":
        """Build from an iterable of (source, receiver, weight) triples."""
        w = np.zeros((n_agents, n_agents))
        for src, dst, weight in edges:
            w[dst, src] = weight
        return cls(w)


@dataclass
class LaplacianSpectrum:
    """Eigenvalue summary of an interaction Laplacian.

    ``eigenvalues`` are sorted by ascending real part, ties broken by
    ascending imaginary part. ``left_null_vector`` is the left eigenvector of
    the zero eigenvalue, normalized so its entries sum to one; it weights each
    agent's contribution to the formation center. It is stored real: for a
    real Laplacian with a simple zero eigenvalue the kernel of L^T always
    admits a real basis vector.
    """

    eigenvalues: np.ndarray
    lambda2_re: float
    left_null_vector: np.ndarray


def build_laplacian(g: Digraph) -> np.ndarray:
    """In-degree matrix minus weighted adjacency; every row sums to zero."""
    w = g.weights
    return np.diag(w.sum(axis=1)) - w


def has_spanning_tree(g: Digraph) -> bool:
    """True iff some root node reaches every other node along directed edges.

    One depth-first reachability traversal per candidate root.
    """
    w = g.weights
    n = g.n_agents
    # successors[j] = receivers of j's information
    successors = [np.flatnonzero(w[:, j] > 0) for j in range(n)]
    for root in range(n):
        seen = np.zeros(n, dtype=bool)
        seen[root] = True
        stack = [root]
        count = 1
        while stack:
            j = stack.pop()
            for i in successors[j]:
                if not seen[i]:
                    seen[i] = True
                    count += 1
                    stack.append(int(i))
        if count == n:
            return True
    return False


def spectrum(laplacian: np.ndarray) -> LaplacianSpectrum:
    """Sorted eigenvalues, second-smallest real part, and left null vector.

    Raises NoSpanningTree when the zero eigenvalue is not simple (the
    topology has no spanning tree) or when the null vector cannot be
    normalized against the ones vector.
    """
    lap = np.asarray(laplacian, dtype=float)
    n = lap.shape[0]
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValueError("Laplacian must be square")
    if n < 2:
        raise ValueError("spectrum requires at least 2 agents")

    eigs = np.linalg.eigvals(lap)
    order = np.lexsort((eigs.imag, eigs.real))
    eigs = eigs[order]

    tol = ZERO_EIG_RTOL * max(1.0, float(np.abs(lap).sum(axis=1).max()))
    n_zero = int(np.count_nonzero(np.abs(eigs) < tol))
    if n_zero != 1:
        raise NoSpanningTree(
            f"zero eigenvalue has multiplicity {n_zero}; the digraph has no spanning tree"
        )

    kernel = scipy.linalg.null_space(lap.T)
    if kernel.shape[1] != 1:
        raise NoSpanningTree(
            f"left kernel of L has dimension {kernel.shape[1]}; expected 1"
        )
    vec = kernel[:, 0]
    total = vec.sum()
    if abs(total) < 1e-10 * np.linalg.norm(vec):
        raise NoSpanningTree("left null vector is orthogonal to the ones vector")
    vec = vec / total

    return LaplacianSpectrum(
        eigenvalues=eigs,
        lambda2_re=float(eigs[1].real),
        left_null_vector=vec,
    )
