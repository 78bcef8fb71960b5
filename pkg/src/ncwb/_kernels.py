"""Hot loop of assignment enumeration: filtered search over a finite product space.

Both backends solve the same problem. Variable ``i`` ranges over
``values[i, :radix[i]]``; a candidate is kept iff every linear row satisfies
``|A[r] . x - b[r]| <= tol``. A row is tested as soon as its last nonzero
column has been assigned, so infeasible prefixes are pruned. Results are
digit tuples in lexicographic order.

``numba`` backend: iterative depth-first search compiled with ``@njit``.
``numpy`` backend: breadth-first frontier expansion, processed in bounded
chunks depth-first so memory stays flat.

The backend defaults to numba when importable, unless ``NCWB_DISABLE_NUMBA``
is set.
"""
from __future__ import annotations

import numpy as np

from ._config import numba_disabled

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

CHUNK = 1 << 16


def default_backend() -> str:
    return "numba" if HAS_NUMBA and not numba_disabled() else "numpy"


def _row_completion(a):
    """Column index after which each row is fully determined (-1 for empty rows)."""
    last = np.full(a.shape[0], -1, dtype=np.int64)
    for r in range(a.shape[0]):
        nz = np.flatnonzero(a[r])
        if len(nz):
            last[r] = nz[-1]
    return last


def _search_numpy(values, radix, a, b, tol, last):
    n = len(radix)
    empty_ok = np.all(np.abs(b[last < 0]) <= tol)
    if not empty_ok:
        return np.zeros((0, n), dtype=np.int64)
    rows_at = [np.flatnonzero(last == i) for i in range(n)]

    def expand(digits, partial, level):
        if level == n:
            return [digits]
        if len(digits) > CHUNK:
            out = []
            for lo in range(0, len(digits), CHUNK):
                out.extend(expand(digits[lo:lo + CHUNK], partial[lo:lo + CHUNK], level))
            return out
        r = radix[level]
        choice = np.tile(np.arange(r), len(digits))
        parent = np.repeat(np.arange(len(digits)), r)
        new_partial = partial[parent] + np.outer(values[level, choice], a[:, level])
        rows = rows_at[level]
        if len(rows):
            keep = np.all(np.abs(new_partial[:, rows] - b[rows]) <= tol, axis=1)
        else:
            keep = slice(None)
        new_digits = np.column_stack([digits[parent], choice])[keep]
        new_partial = new_partial[keep]
        if len(new_digits) == 0:
            return []
        return expand(new_digits, new_partial, level + 1)

    parts = expand(np.zeros((1, 0), dtype=np.int64), np.zeros((1, a.shape[0])), 0)
    parts = [p for p in parts if len(p)]
    if not parts:
        return np.zeros((0, n), dtype=np.int64)
    return np.vstack(parts).astype(np.int64)


if HAS_NUMBA:
    @njit(cache=True)
    def _search_numba(values, radix, a, b, tol, last):
        n = radix.shape[0]
        m = a.shape[0]
        for r in range(m):
            if last[r] < 0 and abs(b[r]) > tol:
                return np.zeros((0, n), dtype=np.int64)
        cap = 64
        out = np.zeros((cap, n), dtype=np.int64)
        count = 0
        if n == 0:
            return np.zeros((1, 0), dtype=np.int64)
        digits = np.full(n, -1, dtype=np.int64)
        partial = np.zeros((n + 1, m))
        level = 0
        while level >= 0:
            digits[level] += 1
            if digits[level] >= radix[level]:
                digits[level] = -1
                level -= 1
                continue
            v = values[level, digits[level]]
            ok = True
            for r in range(m):
                partial[level + 1, r] = partial[level, r] + a[r, level] * v
                if last[r] == level and abs(partial[level + 1, r] - b[r]) > tol:
                    ok = False
            if not ok:
                continue
            if level < n - 2:
                level += 1
                continue
            if level == n - 1:  # only reached when n == 1
                out, cap = _emit(out, cap, count, digits)
                count += 1
                continue
            # last variable: scan its candidates in a tight loop
            k = n - 1
            for d in range(radix[k]):
                w = values[k, d]
                good = True
                for r in range(m):
                    if last[r] == k and abs(partial[k, r] + a[r, k] * w - b[r]) > tol:
                        good = False
                        break
                if good:
                    digits[k] = d
                    out, cap = _emit(out, cap, count, digits)
                    count += 1
            digits[k] = -1
        return out[:count].copy()

    @njit(cache=True)
    def _emit(out, cap, count, digits):
        if count == cap:
            grown = np.zeros((cap * 2, out.shape[1]), dtype=np.int64)
            grown[:cap] = out
            out = grown
            cap *= 2
        out[count] = digits
        return out, cap


def search(values, radix, a, b, tol, backend=None) -> np.ndarray:
    """Feasible digit tuples of the product space, shape ``(n_solutions, n)``."""
    backend = backend or default_backend()
    values = np.ascontiguousarray(values, dtype=np.float64)
    radix = np.ascontiguousarray(radix, dtype=np.int64)
    a = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, len(radix))
    b = np.ascontiguousarray(b, dtype=np.float64)
    last = _row_completion(a)
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return _search_numba(values, radix, a, b, float(tol), last)
    if backend == "numpy":
        return _search_numpy(values, radix, a, b, float(tol), last)
    raise ValueError(f"unknown backend {backend!r}")
