"""Constructors for the profile families used in the CLT experiments."""

from __future__ import annotations

import math

import numpy as np

from varprof.errors import DomainError
from varprof.profiles.core import FamilyTag, StdDevProfile, band_support


def all_ones(n: int, m: int | None = None) -> StdDevProfile:
    m = n if m is None else m
    if n < 1 or m < 1:
        raise DomainError("dimensions must be positive")
    return StdDevProfile(np.ones((n, m)), symmetric=(n == m), family_tag=FamilyTag.ALL_ONES,
                         params={"n": n, "m": m})


def from_array(a, symmetric: bool | None = None) -> StdDevProfile:
    """Wrap an arbitrary non-negative array; symmetry is detected if not given."""
    a = np.asarray(a, dtype=np.float64)
    if symmetric is None:
        symmetric = a.ndim == 2 and a.shape[0] == a.shape[1] and np.array_equal(a, a.T)
    return StdDevProfile(a, symmetric=symmetric, family_tag=FamilyTag.CUSTOM)


def make_separable(v, w) -> StdDevProfile:
    """Profile with ``A ∘ A = v w^T``, i.e. ``a_ij = sqrt(v_i w_j)``.

    All components of ``v`` and ``w`` must lie in ``(0, 1]``.
    """
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    for name, vec in (("v", v), ("w", w)):
        if vec.ndim != 1 or vec.size == 0:
            raise DomainError(f"{name} must be a non-empty vector")
        if np.any(vec <= 0) or np.any(vec > 1):
            raise DomainError(f"components of {name} must lie in (0, 1]")
    a = np.sqrt(np.outer(v, w))
    return StdDevProfile(a, symmetric=(v.shape == w.shape and np.array_equal(v, w)),
                         family_tag=FamilyTag.SEPARABLE,
                         params={"v": v.tolist(), "w": w.tolist()})


def make_sampled(f, n: int) -> StdDevProfile:
    """Profile with ``a_ij^2 = f(i/n, j/n)`` for ``i, j = 1..n``.

    ``f`` may be vectorised over numpy arrays; scalar-only callables also work.
    """
    if n < 1:
        raise DomainError("n must be positive")
    grid = np.arange(1, n + 1) / n
    x, y = np.meshgrid(grid, grid, indexing="ij")
    try:
        vals = np.asarray(f(x, y), dtype=np.float64)
        if vals.shape != (n, n):
            vals = np.broadcast_to(vals, (n, n)).astype(np.float64)
    except (TypeError, ValueError):
        vals = np.array([[f(xi, yj) for yj in grid] for xi in grid], dtype=np.float64)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        bad = np.argwhere(~(vals > 0))
        i, j = bad[0] + 1 if bad.size else (0, 0)
        raise DomainError(f"f must be strictly positive on the grid; fails at (i, j) = ({i}, {j})")
    a = np.sqrt(vals)
    return StdDevProfile(a, symmetric=bool(np.array_equal(a, a.T)), family_tag=FamilyTag.SAMPLED,
                         params={"n": n})


def make_band(n: int, band: int, periodic: bool = True) -> StdDevProfile:
    """0/1 band profile of half-width ``band``.

    Periodic: ``min(|i-j|, n-|i-j|) <= band``; otherwise ``|i-j| <= band``.
    """
    if n < 2 or not 1 <= band < n:
        raise DomainError(f"band width must satisfy 1 <= band < n (got band={band}, n={n})")
    tag = FamilyTag.BAND_PERIODIC if periodic else FamilyTag.BAND_NONPERIODIC
    return StdDevProfile(band_support(n, band, periodic).astype(np.float64), symmetric=True,
                         family_tag=tag, params={"n": n, "band": band, "periodic": periodic})


def make_block_sparse(n: int, c: float) -> StdDevProfile:
    """Ones on a leading ``ceil(c n) x ceil(c n)`` block, zeros elsewhere."""
    if not 0 < c < 1:
        raise DomainError("block fraction c must lie in (0, 1)")
    size = math.ceil(c * n)
    a = np.zeros((n, n))
    a[:size, :size] = 1.0
    return StdDevProfile(a, symmetric=True, family_tag=FamilyTag.BLOCK_SPARSE,
                         params={"n": n, "c": c, "block": size})


def make_anti_diagonal(n: int, width: int, periodic: bool = True) -> StdDevProfile:
    """Anti-diagonal band with ``width`` ones in the first row.

    With 0-based indices, the periodic variant has ``a_ij = 1`` iff
    ``(i + j - (n - width)) mod n < width`` (every row holds ``width`` ones);
    the non-periodic variant iff ``n - width <= i + j <= n + width - 2``.
    """
    if not 1 <= width <= n:
        raise DomainError("width must satisfy 1 <= width <= n")
    s = np.add.outer(np.arange(n), np.arange(n))
    if periodic:
        mask = (s - (n - width)) % n < width
    else:
        mask = (s >= n - width) & (s <= n + width - 2)
    return StdDevProfile(mask.astype(np.float64), symmetric=True, family_tag=FamilyTag.ANTI_DIAGONAL,
                         params={"n": n, "width": width, "periodic": periodic})


def make_bounded_below(n: int, alpha: float = 0.2, seed: int = 0) -> StdDevProfile:
    """Symmetric profile with entries in ``[n^-alpha, 1]`` (uniformly bounded below).

    Entries are drawn once from a fixed seed so the profile is deterministic.
    """
    if not 0 <= alpha < 0.25:
        raise DomainError("alpha must lie in [0, 1/4)")
    lo = n ** -alpha
    rng = np.random.default_rng(seed)
    u = rng.uniform(lo, 1.0, size=(n, n))
    a = np.triu(u) + np.triu(u, 1).T
    return StdDevProfile(a, symmetric=True, family_tag=FamilyTag.CUSTOM,
                         params={"n": n, "alpha": alpha, "seed": seed, "kind": "bounded-below"})


_REMARK42_BLOCKS = {
    "i": lambda r: ((r + 1) % 5, (r + 2) % 5),
    "ii": lambda r: ((r + 1) % 5,),
}


def make_remark42(variant: str, n: int, scaled: bool = True) -> StdDevProfile:
    """The block counterexample profiles.

    Variants ``i`` and ``ii`` are 5x5 grids of ``n/5``-sized blocks whose
    nonzero blocks are all-ones, multiplied by ``1/sqrt(n)`` when ``scaled``.
    Block row ``r`` is nonzero in block columns ``r+1, r+2`` (variant i) or
    ``r+1`` (variant ii), cyclically. Variant ``iii`` is the unscaled 0/1
    matrix whose trailing ``3n/4`` square block is zero.
    """
    variant = str(variant).lower()
    if variant in _REMARK42_BLOCKS:
        if n < 5 or n % 5:
            raise DomainError(f"block-profile variant {variant} needs n divisible by 5 (got {n})")
        b = n // 5
        a = np.zeros((n, n))
        for r in range(5):
            for c in _REMARK42_BLOCKS[variant](r):
                a[r * b:(r + 1) * b, c * b:(c + 1) * b] = 1.0
        if scaled:
            a /= math.sqrt(n)
        tag = FamilyTag.REMARK42_I if variant == "i" else FamilyTag.REMARK42_II
        return StdDevProfile(a, symmetric=False, family_tag=tag,
                             params={"n": n, "variant": variant, "scaled": scaled})
    if variant == "iii":
        if n < 4 or n % 4:
            raise DomainError(f"block-profile variant iii needs n divisible by 4 (got {n})")
        q = n // 4
        a = np.ones((n, n))
        a[q:, q:] = 0.0
        return StdDevProfile(a, symmetric=True, family_tag=FamilyTag.REMARK42_III,
                             params={"n": n, "variant": variant})
    raise DomainError(f"unknown block-profile variant {variant!r}; expected i, ii or iii")
