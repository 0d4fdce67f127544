"""Plain-text profile files.

Dense files start with ``n m symmetric_flag`` followed by ``n`` rows of ``m``
entries. Sparse files start with ``n m nnz`` followed by ``nnz`` lines of
``i j value`` with 1-based indices. Floats are written with ``repr`` so a
save/load round trip is exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from varprof.errors import DomainError
from varprof.profiles.core import FamilyTag, StdDevProfile


def save_profile(profile: StdDevProfile, path, sparse: bool | None = None) -> Path:
    """Write ``profile``; ``sparse=None`` picks the coordinate format for sparse profiles."""
    path = Path(path)
    a = profile.entries
    n, m = a.shape
    if sparse is None:
        sparse = profile.is_sparse
    lines = []
    if sparse:
        rows, cols = np.nonzero(a)
        lines.append(f"{n} {m} {rows.size}")
        lines.extend(f"{i + 1} {j + 1} {float(a[i, j])!r}" for i, j in zip(rows, cols))
    else:
        lines.append(f"{n} {m} {int(profile.symmetric)}")
        lines.extend(" ".join(repr(float(x)) for x in row) for row in a)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_profile(path, sparse: bool | None = None) -> StdDevProfile:
    """Read a profile file, detecting dense versus sparse layout from its shape.

    When both layouts would parse (possible only if ``m == 3``), ``sparse``
    decides; it defaults to dense.
    """
    path = Path(path)
    lines = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 3:
        raise DomainError(f"{path}: first line must hold three integers")
    try:
        n, m, third = (int(t) for t in lines[0])
    except ValueError as exc:
        raise DomainError(f"{path}: malformed header {' '.join(lines[0])!r}") from exc
    body = lines[1:]
    dense_ok = len(body) == n and all(len(r) == m for r in body) and third in (0, 1)
    sparse_ok = len(body) == third and all(len(r) == 3 for r in body)
    if sparse is None:
        sparse = sparse_ok and not dense_ok
    if sparse:
        if not sparse_ok:
            raise DomainError(f"{path}: expected {third} 'i j value' lines")
        a = np.zeros((n, m))
        for ln, (i, j, v) in enumerate(body, start=2):
            i, j = int(i), int(j)
            if not (1 <= i <= n and 1 <= j <= m):
                raise DomainError(f"{path}:{ln}: index ({i}, {j}) out of range")
            a[i - 1, j - 1] = float(v)
        symmetric = n == m and np.array_equal(a, a.T)
    else:
        if not dense_ok:
            raise DomainError(f"{path}: expected {n} rows of {m} entries")
        a = np.array([[float(x) for x in row] for row in body], dtype=np.float64).reshape(n, m)
        symmetric = bool(third)
    return StdDevProfile(a, symmetric=symmetric, family_tag=FamilyTag.CUSTOM,
                         params={"source": str(path)})
