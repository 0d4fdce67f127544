"""The standard deviation profile type."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from varprof.errors import DomainError

# Below this nonzero fraction a profile is treated as sparse.
SPARSE_DENSITY = 0.10


class FamilyTag(str, enum.Enum):
    ALL_ONES = "all-ones"
    SEPARABLE = "separable"
    SAMPLED = "sampled"
    BAND_PERIODIC = "band-periodic"
    BAND_NONPERIODIC = "band-nonperiodic"
    ERDOS_RENYI = "erdos-renyi"
    BLOCK_SPARSE = "block-sparse"
    ANTI_DIAGONAL = "anti-diagonal"
    REMARK42_I = "remark42-i"
    REMARK42_II = "remark42-ii"
    REMARK42_III = "remark42-iii"
    CUSTOM = "custom"


def band_support(n, band, periodic):
    """Boolean mask of a (periodic) band of half-width ``band``."""
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    if periodic:
        dist = np.minimum(dist, n - dist)
    return dist <= band


@dataclass(frozen=True, eq=False)
class StdDevProfile:
    """Deterministic non-negative matrix ``A`` multiplying a random matrix entrywise.

    Entries are held densely and frozen. ``params`` records the constructor
    arguments so presets and reports can describe where a profile came from.
    """

    entries: np.ndarray
    symmetric: bool = False
    family_tag: FamilyTag = FamilyTag.CUSTOM
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64, copy=True)
        if a.ndim != 2 or 0 in a.shape:
            raise DomainError(f"profile must be a non-empty 2-d array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("profile entries must be finite")
        if np.any(a < 0):
            raise DomainError("profile entries must be non-negative")
        a[a == 0] = 0.0  # normalise -0.0
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "family_tag", FamilyTag(self.family_tag))
        if self.symmetric:
            if a.shape[0] != a.shape[1]:
                raise DomainError("symmetric profile must be square")
            if not np.array_equal(a, a.T):
                raise DomainError("profile flagged symmetric but a_ij != a_ji")
        if self.family_tag in (FamilyTag.BAND_PERIODIC, FamilyTag.BAND_NONPERIODIC):
            if not np.all((a == 0) | (a == 1)):
                raise DomainError("band profiles must be 0/1")
            band = self.params.get("band")
            if band is not None:
                periodic = self.family_tag is FamilyTag.BAND_PERIODIC
                if not np.array_equal(a == 1, band_support(self.n, band, periodic)):
                    raise DomainError("band profile support does not match its band width")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    @property
    def dims(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.entries))

    @property
    def density(self) -> float:
        return self.nnz / self.entries.size

    @property
    def is_sparse(self) -> bool:
        return self.density < SPARSE_DENSITY

    @property
    def max_abs(self) -> float:
        return float(self.entries.max())

    @property
    def squared(self) -> np.ndarray:
        """The variance profile ``A ∘ A``."""
        return self.entries * self.entries

    @property
    def support(self) -> np.ndarray:
        return self.entries > 0

    def adjacency(self):
        """CSR arrays ``(indptr, indices, weights)`` of the support of ``A ∘ A``.

        Column indices within a row are sorted ascending.
        """
        w = self.squared
        rows, cols = np.nonzero(w)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return indptr, cols.astype(np.int64), w[rows, cols]

    def scaled(self, c: float) -> "StdDevProfile":
        if c <= 0:
            raise DomainError("scale factor must be positive")
        return StdDevProfile(c * self.entries, self.symmetric, FamilyTag.CUSTOM,
                             {"scaled_from": self.family_tag.value, "c": c})

    def permuted(self, perm) -> "StdDevProfile":
        """Return ``P A P^T`` for the permutation ``i -> perm[i]``."""
        perm = np.asarray(perm)
        if self.n != self.m or sorted(perm.tolist()) != list(range(self.n)):
            raise DomainError("permutation must be a rearrangement of range(n) on a square profile")
        inv = np.argsort(perm)
        return StdDevProfile(self.entries[np.ix_(inv, inv)], self.symmetric, FamilyTag.CUSTOM,
                             {"permuted_from": self.family_tag.value})

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.dims).encode())
        h.update(self.entries.tobytes())
        h.update(self.family_tag.value.encode())
        return h.hexdigest()[:16]

    def describe(self) -> dict[str, Any]:
        return {
            "family": self.family_tag.value,
            "dims": list(self.dims),
            "symmetric": self.symmetric,
            "nnz": self.nnz,
            "params": {k: v for k, v in self.params.items() if _jsonable(v)},
            "fingerprint": self.fingerprint(),
        }

    def __repr__(self):
        return (f"StdDevProfile({self.family_tag.value}, dims={self.dims}, "
                f"symmetric={self.symmetric}, nnz={self.nnz})")


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, list, tuple)) or v is None


def as_array(A) -> np.ndarray:
    """Entries of a profile, or the argument itself as a float array."""
    if isinstance(A, StdDevProfile):
        return A.entries
    return np.asarray(A, dtype=np.float64)
