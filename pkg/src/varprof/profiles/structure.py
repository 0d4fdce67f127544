"""Broad-connectivity and super-regularity predicates on the support of a profile.

Index sets in witnesses are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from varprof.errors import DomainError
from varprof.profiles.core import as_array

# Exhaustive subset enumeration is used up to this many elements.
EXACT_LIMIT = 12


@dataclass
class PredicateResult:
    """Outcome of a structural predicate.

    ``status`` is ``"true"`` (verified exactly), ``"not-falsified"`` (only a
    randomized search was possible and found nothing) or ``"false"``. On
    ``"false"``, ``condition`` names the first violated condition and
    ``witness`` describes the violation. ``failures`` holds a witness for every
    violated condition, not only the first.
    """

    status: str
    condition: str | None = None
    witness: Any = None
    exact: bool = True
    failures: dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.status != "false"


def _check_open_unit(name, value, closed_right=False):
    if not (0 < value <= 1 if closed_right else 0 < value < 1):
        interval = "(0, 1]" if closed_right else "(0, 1)"
        raise DomainError(f"{name} must lie in {interval}, got {value}")


def _degree_conditions(s, delta):
    n, m = s.shape
    failures = {}
    rows = np.flatnonzero(s.sum(axis=1) < delta * m)
    if rows.size:
        failures["i"] = {"row": int(rows[0])}
    cols = np.flatnonzero(s.sum(axis=0) < delta * n)
    if cols.size:
        failures["ii"] = {"col": int(cols[0])}
    return failures


def _subset_masks(m):
    codes = np.arange(1, 2 ** m, dtype=np.int64)
    return ((codes[:, None] >> np.arange(m)) & 1).astype(bool)


def _structured_column_sets(s):
    """Candidate column sets: row supports, their complements and contiguous blocks."""
    n, m = s.shape
    seen = set()
    out = []

    def add(idx):
        key = tuple(int(x) for x in idx)
        if key and key not in seen:
            seen.add(key)
            out.append(np.array(key))

    for i in range(n):
        add(np.flatnonzero(~s[i]))
    for i in range(n):
        add(np.flatnonzero(s[i]))
    for parts in range(2, 9):
        size = max(1, m // parts)
        for start in range(0, m - size + 1, size):
            block = np.arange(start, start + size)
            add(block)
            add(np.setdiff1d(np.arange(m), block))
    return out


def _expansion_deficit(s, cols, delta, nu):
    """Return the delta-neighbourhood of column set ``cols`` if it is too small, else None."""
    n = s.shape[0]
    size = len(cols)
    hits = s[:, cols].sum(axis=1)
    nbhd = np.flatnonzero(hits >= delta * size)
    if nbhd.size < min(n, (1 + nu) * size):
        return nbhd
    return None


def is_broadly_connected(A, delta: float, nu: float, witnesses=None, n_random: int = 2000,
                         seed: int = 0) -> PredicateResult:
    """Check ``(delta, nu)``-broad connectivity of the support of ``A``.

    Conditions: every row meets at least ``delta m`` columns, every column at
    least ``delta n`` rows, and every column set ``J`` has at least
    ``min(n, (1 + nu)|J|)`` rows meeting at least ``delta |J|`` of its columns.
    The last condition is enumerated exhaustively when ``m <= 12``; otherwise
    structured candidates, any user ``witnesses`` and ``n_random`` random sets
    are tried and a pass is reported as ``"not-falsified"``.
    """
    _check_open_unit("delta", delta, closed_right=True)
    _check_open_unit("nu", nu)
    s = as_array(A) > 0
    n, m = s.shape
    failures = _degree_conditions(s, delta)
    exact = m <= EXACT_LIMIT

    candidates = [np.asarray(sorted(w), dtype=np.int64) for w in (witnesses or [])]
    candidates += _structured_column_sets(s)
    for cols in candidates:
        if cols.size == 0:
            continue
        nbhd = _expansion_deficit(s, cols, delta, nu)
        if nbhd is not None:
            failures["iii"] = {"J": cols.tolist(), "neighbourhood": nbhd.tolist()}
            break

    if "iii" not in failures:
        if exact:
            masks = _subset_masks(m)
            sizes = masks.sum(axis=1)
            hits = masks.astype(np.int64) @ s.T.astype(np.int64)
            nbhd_sizes = (hits >= delta * sizes[:, None]).sum(axis=1)
            bad = np.flatnonzero(nbhd_sizes < np.minimum(n, (1 + nu) * sizes))
            if bad.size:
                cols = np.flatnonzero(masks[bad[0]])
                nbhd = np.flatnonzero(hits[bad[0]] >= delta * cols.size)
                failures["iii"] = {"J": cols.tolist(), "neighbourhood": nbhd.tolist()}
        else:
            rng = np.random.default_rng(seed)
            for _ in range(n_random):
                size = int(rng.integers(1, m + 1))
                cols = np.sort(rng.choice(m, size=size, replace=False))
                nbhd = _expansion_deficit(s, cols, delta, nu)
                if nbhd is not None:
                    failures["iii"] = {"J": cols.tolist(), "neighbourhood": nbhd.tolist()}
                    break
    return _finish(failures, exact)


def _finish(failures, exact):
    if failures:
        first = min(failures, key=["i", "ii", "iii"].index)
        return PredicateResult("false", first, failures[first], exact, failures)
    return PredicateResult("true" if exact else "not-falsified", exact=exact)


def _worst_partner(counts, size_self, min_size, delta):
    """For fixed I, find the J (of size >= min_size) minimising e(I, J) - delta |I||J|.

    ``counts[j]`` is the number of support entries of column j inside I; the
    worst J of a given size takes the smallest counts. Returns the violating
    J or None.
    """
    order = np.argsort(counts, kind="stable")
    csum = np.cumsum(counts[order])
    sizes = np.arange(1, counts.size + 1)
    slack = csum - delta * size_self * sizes
    slack[: max(min_size, 1) - 1] = np.inf
    j = int(np.argmin(slack))
    if slack[j] < 0:
        return np.sort(order[: j + 1]), int(csum[j])
    return None


def is_super_regular(A, delta: float, epsilon: float, n_random: int = 2000,
                     seed: int = 0) -> PredicateResult:
    """Check ``(delta, epsilon)``-super regularity of the support of ``A``.

    Condition (iii), ``e(I, J) >= delta |I||J|`` for all ``|I| >= epsilon n``
    and ``|J| >= epsilon m``, is decided exactly when ``min(n, m) <= 12``: the
    smaller side is enumerated and the worst partner set is found by sorting.
    Larger profiles fall back to structured and random row sets.
    """
    _check_open_unit("delta", delta, closed_right=True)
    _check_open_unit("epsilon", epsilon)
    s = as_array(A) > 0
    transposed = s.shape[0] > s.shape[1]
    if transposed:
        s = s.T
    n, m = s.shape
    failures = _degree_conditions(s.T if transposed else s, delta)
    min_i = math.ceil(epsilon * n - 1e-12)
    min_j = math.ceil(epsilon * m - 1e-12)
    exact = n <= EXACT_LIMIT

    if exact:
        row_sets = (np.flatnonzero(mask) for mask in _subset_masks(n) if mask.sum() >= min_i)
    else:
        row_sets = _random_row_sets(s, min_i, n_random, seed)
    si = s.astype(np.int64)
    for rows in row_sets:
        found = _worst_partner(si[rows].sum(axis=0), rows.size, min_j, delta)
        if found is not None:
            cols, e = found
            I, J = (cols, rows) if transposed else (rows, cols)
            failures["iii"] = {"I": I.tolist(), "J": J.tolist(), "e": e}
            break
    return _finish(failures, exact)


def _random_row_sets(s, min_size, n_random, seed):
    n = s.shape[0]
    by_degree = np.argsort(s.sum(axis=1), kind="stable")
    for size in range(min_size, n + 1):
        yield np.sort(by_degree[:size])
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        size = int(rng.integers(min_size, n + 1))
        yield np.sort(rng.choice(n, size=size, replace=False))
