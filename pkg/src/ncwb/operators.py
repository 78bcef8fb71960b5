"""Dense complex Hermitian linear algebra on small Hilbert spaces.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``. The
``as_*`` helpers validate and return a fresh read-only copy; every other
function here is pure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _config as cfg
from .errors import DimensionMismatch, NotHermitian, NumericalFailure, OutOfRange


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def is_hermitian(a, tol=cfg.TOL_HERM) -> bool:
    a = as_operator(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def as_hermitian(a, tol=cfg.TOL_HERM) -> np.ndarray:
    """Validate conjugate symmetry and return the exactly symmetrised copy."""
    a = as_operator(a)
    err = np.max(np.abs(a - a.conj().T))
    if err > tol:
        raise NotHermitian(f"conjugate-symmetry violated by {err:.3e} (tolerance {tol:.1e})")
    return _readonly((a + a.conj().T) / 2)


def eigenvalues(a) -> np.ndarray:
    return np.linalg.eigvalsh(as_hermitian(a))


def is_effect(e, tol=cfg.TOL_EIG) -> bool:
    """True iff ``0 <= e <= I`` within ``tol``."""
    ev = eigenvalues(e)
    return bool(ev[0] >= -tol and ev[-1] <= 1 + tol)


def is_projector(e, tol=cfg.TOL_SUM) -> bool:
    e = as_hermitian(e)
    return bool(np.max(np.abs(e @ e - e)) <= tol)


def as_effect(e, tol=cfg.TOL_EIG) -> np.ndarray:
    e = as_hermitian(e)
    if not is_effect(e, tol):
        ev = eigenvalues(e)
        raise OutOfRange(f"not an effect: spectrum spans [{ev[0]:.3g}, {ev[-1]:.3g}]")
    return e


def is_density(rho, tol_eig=cfg.TOL_EIG, tol_trace=cfg.TOL_TRACE) -> bool:
    rho = as_hermitian(rho)
    return bool(eigenvalues(rho)[0] >= -tol_eig and abs(np.trace(rho).real - 1) <= tol_trace)


def as_density(rho, tol_eig=cfg.TOL_EIG, tol_trace=cfg.TOL_TRACE) -> np.ndarray:
    rho = as_hermitian(rho)
    lo = eigenvalues(rho)[0]
    tr = np.trace(rho).real
    if lo < -tol_eig or abs(tr - 1) > tol_trace:
        raise OutOfRange(f"not a density operator: min eigenvalue {lo:.3g}, trace {tr:.12g}")
    return rho


def ket(*amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def pure(v) -> np.ndarray:
    """Rank-one projector onto the (normalised) vector ``v``."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return _readonly(np.outer(v, v.conj()))


def basis_projector(i, dim) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[i, i] = 1
    return _readonly(out)


@dataclass(frozen=True, eq=False)
class SpectralResolution:
    """Distinct eigenvalues (ascending) and their eigenspace projectors."""

    eigenvalues: np.ndarray
    projectors: np.ndarray  # (n, d, d)

    def __len__(self):
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ijk->jk", self.eigenvalues, self.projectors)


def spectral_decompose(h, tol_degen=cfg.TOL_DEGEN, tol_herm=cfg.TOL_HERM,
                       tol_sum=cfg.TOL_SUM) -> SpectralResolution:
    """Spectral resolution ``h = sum_i s_i P_i`` with merged degenerate eigenvalues.

    Eigenvalues closer than ``tol_degen`` (absolute gap, chained) are merged
    into one cluster whose value is the cluster mean; the cluster's
    eigenvectors are combined into a single eigenspace projector.
    """
    h = as_hermitian(h, tol_herm)
    vals, vecs = np.linalg.eigh(h)
    clusters = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] < tol_degen:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    svals = np.array([vals[c].mean() for c in clusters])
    projs = np.array([vecs[:, c] @ vecs[:, c].conj().T for c in clusters])
    res = SpectralResolution(svals, projs)
    err = np.max(np.abs(res.reconstruct() - h))
    if err > tol_sum + tol_degen * h.shape[0]:
        raise NumericalFailure(f"spectral reconstruction residue {err:.3e}")
    svals.setflags(write=False)
    projs.setflags(write=False)
    return res


def _same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")


def hs_inner(a, b, tol=cfg.TOL_TRACE) -> float:
    """Hilbert-Schmidt inner product ``tr(ab)`` of two Hermitian operators."""
    a, b = as_operator(a), as_operator(b)
    _same_dim(a, b)
    val = np.einsum("ij,ji->", a, b)
    if abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise NotHermitian(f"tr(AB) has imaginary part {val.imag:.3e}")
    return float(val.real)


def born(rho, effect, tol=cfg.TOL_TRACE) -> float:
    """Outcome probability ``tr(rho E)``, clamped into ``[0, 1]`` within ``tol``."""
    rho, effect = as_operator(rho), as_operator(effect)
    _same_dim(rho, effect)
    val = np.einsum("ij,ji->", rho, effect)
    if abs(val.imag) > tol:
        raise OutOfRange(f"Born value has imaginary residue {val.imag:.3e}")
    p = float(val.real)
    if p < -tol or p > 1 + tol:
        raise OutOfRange(f"Born value {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def partial_trace_second(op, dim_first, dim_second) -> np.ndarray:
    """Trace out the right tensor factor (system index varies slowest)."""
    op = as_operator(op)
    if op.shape[0] != dim_first * dim_second:
        raise DimensionMismatch(f"{op.shape[0]} != {dim_first} x {dim_second}")
    return np.einsum("iaja->ij", op.reshape(dim_first, dim_second, dim_first, dim_second))
