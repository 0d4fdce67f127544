"""Distinct-index cycle sums

    S_k(A) = sum over pairwise-distinct (i_1, ..., i_k) of
             a_{i1 i2}^2 a_{i2 i3}^2 ... a_{ik i1}^2

and the cardinality |I_k| of the index set they range over.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numba
import numpy as np

from varprof.errors import DomainError, SizeError

BRUTE_LIMIT = 10 ** 8
MAX_DFS_K = 10


@dataclass(frozen=True)
class CycleSumResult:
    k: int
    value: float
    terms_visited: int
    method: str


def count_Ik(n: int, k: int) -> int:
    """``n (n-1) ... (n-k+1)``, zero when ``k > n``."""
    if n < 0 or k < 0:
        raise DomainError("n and k must be non-negative")
    return math.perm(n, k)


def _weights(A):
    w = getattr(A, "squared", None)
    if w is None:
        a = np.asarray(A, dtype=np.float64)
        w = a * a
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DomainError("cycle sums need a square profile")
    return w


def cycle_sum_brute(A, k: int) -> CycleSumResult:
    """Sum over every k-tuple of pairwise-distinct indices, one term at a time."""
    w = _weights(A)
    n = w.shape[0]
    if k < 1:
        raise DomainError("k must be positive")
    if n ** k > BRUTE_LIMIT:
        raise SizeError(f"n^k = {n}^{k} exceeds the brute-force guard {BRUTE_LIMIT}")
    terms = []
    visited = 0
    for idx in itertools.permutations(range(n), k):
        visited += 1
        prod = 1.0
        for p in range(k):
            prod *= w[idx[p], idx[(p + 1) % k]]
        terms.append(prod)
    return CycleSumResult(k, math.fsum(terms), visited, "brute")


@numba.njit(cache=True)
def _root_cycles(s, k, indptr, indices, weights, w):
    """Neumaier-compensated sum of closed walks s -> ... -> s of length k through
    distinct vertices all greater than s. Returns (sum, compensation, nodes)."""
    n = indptr.size - 1
    visited = np.zeros(n, dtype=np.bool_)
    path = np.empty(k, dtype=np.int64)
    pos = np.empty(k, dtype=np.int64)
    prod = np.empty(k, dtype=np.float64)
    total = 0.0
    comp = 0.0
    nodes = 1
    path[0] = s
    prod[0] = 1.0
    visited[s] = True
    start = indptr[s]
    # skip neighbours <= s (indices sorted)
    while start < indptr[s + 1] and indices[start] <= s:
        start += 1
    pos[0] = start
    depth = 0
    while depth >= 0:
        v = path[depth]
        if depth == k - 1:
            closing = w[v, s]
            if closing > 0.0:
                term = prod[depth] * closing
                t = total + term
                if abs(total) >= abs(term):
                    comp += (total - t) + term
                else:
                    comp += (term - t) + total
                total = t
            visited[v] = False
            depth -= 1
            continue
        p = pos[depth]
        end = indptr[v + 1]
        advanced = False
        while p < end:
            u = indices[p]
            p += 1
            if u > s and not visited[u]:
                pos[depth] = p
                depth += 1
                path[depth] = u
                prod[depth] = prod[depth - 1] * weights[p - 1]
                visited[u] = True
                nodes += 1
                # child iterates from the first neighbour above s
                q = indptr[u]
                while q < indptr[u + 1] and indices[q] <= s:
                    q += 1
                pos[depth] = q
                advanced = True
                break
        if not advanced:
            visited[v] = False
            depth -= 1
    return total, comp, nodes


@numba.njit(cache=True)
def _all_roots(k, indptr, indices, weights, w, sums, comps, nodes):
    n = indptr.size - 1
    for s in range(n):
        sums[s], comps[s], nodes[s] = _root_cycles(s, k, indptr, indices, weights, w)


def cycle_sum_dfs(A, k: int) -> CycleSumResult:
    """Depth-first enumeration of distinct-vertex closed walks over the support of ``A ∘ A``.

    Only walks whose smallest vertex is the start are enumerated; each such
    walk stands for its ``k`` cyclic shifts. Reversals are not merged since
    ``A`` need not be symmetric. Per-root partial sums are reduced in root
    order with ``math.fsum``, so the result is deterministic.
    """
    if k < 1:
        raise DomainError("k must be positive")
    if k > MAX_DFS_K:
        raise SizeError(f"k = {k} exceeds the DFS guard {MAX_DFS_K}")
    w = np.ascontiguousarray(_weights(A))
    n = w.shape[0]
    if k == 1:
        return CycleSumResult(1, math.fsum(np.diag(w)), n, "dfs")
    if k > n:
        return CycleSumResult(k, 0.0, 0, "dfs")
    if hasattr(A, "adjacency"):
        indptr, indices, weights = A.adjacency()
    else:
        rows, cols = np.nonzero(w)
        indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=n))]).astype(np.int64)
        indices, weights = cols.astype(np.int64), w[rows, cols]
    sums = np.zeros(n)
    comps = np.zeros(n)
    nodes = np.zeros(n, dtype=np.int64)
    _all_roots(k, indptr, indices, np.ascontiguousarray(weights, dtype=np.float64), w, sums, comps, nodes)
    value = k * math.fsum(np.concatenate([sums, comps]).tolist())
    return CycleSumResult(k, value, int(nodes.sum()), "dfs")


def cycle_sum(A, k: int) -> CycleSumResult:
    return cycle_sum_dfs(A, k)


def walk_trace(A, k: int) -> float:
    """``Tr((A ∘ A)^k)``, the unrestricted closed-walk sum that dominates ``S_k``."""
    w = _weights(A)
    return float(np.trace(np.linalg.matrix_power(w, k)))
