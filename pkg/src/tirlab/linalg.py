"""Dense matrix spectra and the nuclear-norm family.

Matrices are plain 2-D float64 numpy arrays. Singular values come from Jacobi
rotations on the small side of the matrix (``n`` snapshot columns against ``m``
feature rows), never from a general bidiagonal SVD.
"""

import numpy as np

from tirlab import _accel, _kernels

JACOBI_TOL = 1e-12
MAX_SWEEPS = 100
PSD_SLACK = 1e-9
# one-sided rotations stop once columns are orthogonal to working precision
ORTHO_TOL = 1e-15


class ConvergenceError(RuntimeError):
    """Jacobi iteration hit the sweep cap."""


def as_matrix(p):
    """Validate and return ``p`` as a finite 2-D float64 array."""
    a = np.asarray(p, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _sym_kernel():
    return _kernels.sym_jacobi_numba if _accel.NUMBA_ENABLED else _kernels.sym_jacobi_numpy


def _onesided_kernel():
    return _kernels.onesided_jacobi_numba if _accel.NUMBA_ENABLED else _kernels.onesided_jacobi_numpy


def sym_eigenvalues(g, psd=True):
    """Eigenvalues of a symmetric matrix, descending.

    With ``psd=True`` (the Gram-matrix use) eigenvalues in ``[-1e-9, 0)`` are
    clamped to zero and anything more negative raises ``ValueError``.
    """
    a = as_matrix(g)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix is not square: {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    eig, sweeps = _sym_kernel()(a[None, :, :], JACOBI_TOL, MAX_SWEEPS)
    if sweeps[0] < 0:
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    vals = np.sort(eig[0])[::-1]
    if psd:
        if vals[-1] < -PSD_SLACK:
            raise ValueError(f"matrix is not positive semidefinite (eigenvalue {vals[-1]:.3e})")
        vals = np.maximum(vals, 0.0)
    return vals


def gram_singular_values(p):
    """Singular values via explicit eigenvalues of the smaller Gram matrix."""
    a = as_matrix(p)
    g = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    g = 0.5 * (g + g.T)
    return np.sqrt(sym_eigenvalues(g, psd=True))


def batch_singular_values(stack):
    """Singular values of every matrix in an ``(B, m, n)`` stack, shape ``(B, min(m, n))``.

    Columns are orthogonalised directly, which is the Gram-matrix Jacobi
    iteration without forming ``PᵀP``; small singular values keep full
    relative accuracy instead of the square-root-of-epsilon floor. Values at
    or below ``max(m, n) * eps * sigma_1`` are rounding residue of a
    rank-deficient matrix and are returned as exact zeros, since
    ``sigma ** (1/k)`` would otherwise blow them up.
    """
    x = np.asarray(stack, dtype=np.float64)
    if x.ndim != 3 or x.shape[1] < 1 or x.shape[2] < 1:
        raise ValueError(f"expected a (B, m, n) stack, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has non-finite entries")
    if x.shape[2] > x.shape[1]:
        x = np.swapaxes(x, 1, 2)
    x = np.ascontiguousarray(x)
    if x.shape[0] == 0:
        return np.zeros((0, x.shape[2]))
    sigma, sweeps = _onesided_kernel()(x, ORTHO_TOL, MAX_SWEEPS)
    if np.any(sweeps < 0):
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    sigma = -np.sort(-sigma, axis=1)
    cutoff = max(x.shape[1], x.shape[2]) * np.finfo(np.float64).eps * sigma[:, :1]
    sigma[sigma <= cutoff] = 0.0
    return sigma


def singular_values(p):
    """Singular values of ``p`` in non-increasing order, ``min(m, n)`` of them."""
    return batch_singular_values(as_matrix(p)[None, :, :])[0]


def nuclear_norm(p):
    return float(np.sum(singular_values(p)))


def frobenius_norm(p):
    a = as_matrix(p)
    return float(np.sqrt(np.sum(a * a)))


def spectrum_power_sum(sigma, k):
    """``sum(sigma ** (1/k))`` over the last axis; zero singular values add exactly 0."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sigma = np.asarray(sigma, dtype=np.float64)
    if k == 1:
        return sigma.sum(axis=-1)
    return np.where(sigma > 0.0, np.power(np.maximum(sigma, 0.0), 1.0 / k), 0.0).sum(axis=-1)


def weighted_nuclear_norm(p, k):
    """Self-weighted nuclear norm ``sum_i sigma_i ** (1/k)``.

    Equivalent to weighting each singular value by ``sigma_i ** ((1 - k) / k)``,
    so larger singular values count less as ``k`` grows. ``k = 1`` gives the
    plain nuclear norm.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return float(spectrum_power_sum(singular_values(p), k))


def singular_value_weights(sigma, k):
    """Implied per-value weights ``sigma ** ((1 - k) / k)``; zero where ``sigma == 0``."""
    sigma = np.asarray(sigma, dtype=np.float64)
    out = np.zeros_like(sigma)
    pos = sigma > 0.0
    out[pos] = sigma[pos] ** ((1.0 - k) / k)
    return out


def k_schedule(u, U, k_ini):
    """Linear decay of the weighting exponent from ``k_ini`` at round 0 to 1 at round ``U``."""
    if U < 1:
        raise ValueError(f"U must be >= 1, got {U}")
    if k_ini < 1:
        raise ValueError(f"k_ini must be >= 1, got {k_ini}")
    if u < 0 or u > U:
        raise ValueError(f"round {u} outside [0, {U}]")
    if u == U:
        return 1.0
    return k_ini - (u / U) * (k_ini - 1.0)
