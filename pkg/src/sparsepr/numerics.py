"""Vector primitives: hard thresholding, phase-invariant distances, metrics, SPD solves."""

import numpy as np
from scipy.linalg import lapack

from .errors import ParameterError, SingularSystemError

PSNR_CAP_DB = 300.0


def as_vector(v, name="vector"):
    """Return ``v`` as a 1-D float or complex array, rejecting NaN/Inf."""
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64, copy=False)
    else:
        arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} has non-finite entries")
    return arr


def as_support(indices, n=None):
    """Sorted, duplicate-free int array; range-checked against ``n`` when given."""
    idx = np.unique(np.asarray(indices, dtype=np.int64))
    if n is not None and idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise ParameterError(f"support indices out of range [0, {n})")
    return idx


def is_complex(*vs):
    return any(np.iscomplexobj(v) for v in vs)


def top_s_indices(scores, s):
    """Indices of the ``s`` largest scores, ties to the lowest index, returned sorted."""
    order = np.argsort(-np.asarray(scores), kind="stable")
    return np.sort(order[:s])


def hard_threshold(v, s):
    """Keep the ``s`` largest-modulus entries of ``v`` and zero the rest.

    Returns
    -------
    w : ndarray
        Same dtype as ``v``; equals ``v`` on the support, zero elsewhere.
    support : ndarray of int
        The ``s`` retained indices, sorted. Ties in modulus go to the lower index.
    """
    v = as_vector(v)
    n = v.size
    if not 1 <= s <= n:
        raise ParameterError(f"sparsity s={s} outside [1, {n}]")
    support = top_s_indices(np.abs(v), s)
    w = np.zeros_like(v)
    w[support] = v[support]
    return w, support


def support_of(v):
    return np.flatnonzero(np.asarray(v) != 0)


def align_phase(z, x):
    """Rotate ``z`` by the global sign/phase that brings it closest to ``x``."""
    if is_complex(z, x):
        inner = np.vdot(z, x)  # z^* x
        if inner == 0:
            return z.astype(np.complex128)
        return z * (inner / abs(inner))
    if np.linalg.norm(x - z) <= np.linalg.norm(x + z):
        return z
    return -z


def dist(z, x):
    """Distance between ``z`` and ``x`` modulo global sign (real) or phase (complex).

    The complex value equals ``sqrt(|z|^2 + |x|^2 - 2|<z, x>|)``; it is
    evaluated through the explicitly aligned difference, which keeps full
    relative accuracy when the distance is tiny.
    """
    z = as_vector(z, "z")
    x = as_vector(x, "x")
    if z.shape != x.shape:
        raise ParameterError(f"length mismatch: {z.size} vs {x.size}")
    if is_complex(z, x):
        return float(np.linalg.norm(align_phase(z, x) - x))
    return float(min(np.linalg.norm(z - x), np.linalg.norm(z + x)))


def relative_error(z, x):
    """``dist(z, x) / ||x||``."""
    nx = np.linalg.norm(as_vector(x, "x"))
    if nx == 0:
        raise ZeroDivisionError("relative error undefined for a zero reference")
    return dist(z, x) / nx


def psnr(reference, estimate):
    """Peak signal-to-noise ratio in dB after global phase alignment.

    ``V = max|reference|``; the result is capped at ``PSNR_CAP_DB`` when the
    aligned MSE falls below ``1e-30 * V**2``.
    """
    ref = as_vector(reference, "reference")
    est = as_vector(estimate, "estimate")
    if ref.shape != est.shape:
        raise ParameterError(f"length mismatch: {ref.size} vs {est.size}")
    peak = np.max(np.abs(ref))
    if peak == 0:
        raise ParameterError("reference signal is identically zero")
    mse = np.mean(np.abs(align_phase(est, ref) - ref) ** 2)
    if mse < 1e-30 * peak**2:
        return PSNR_CAP_DB
    return float(min(10.0 * np.log10(peak**2 / mse), PSNR_CAP_DB))


def symmetrize(M):
    return 0.5 * (M + M.T)


def solve_spd(M, b):
    """Solve ``M x = b`` for symmetric positive-definite ``M`` by Cholesky.

    Raises
    ------
    SingularSystemError
        When the factorization breaks down; ``pivot`` gives the failing minor.
    """
    M = np.asarray(M, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != b.shape[0]:
        raise ParameterError(f"incompatible shapes {M.shape} and {b.shape}")
    c, info = lapack.dpotrf(M, lower=False, clean=True)
    if info > 0:
        raise SingularSystemError(
            f"matrix not positive definite at pivot {info - 1}", pivot=info - 1
        )
    if info < 0:
        raise ParameterError(f"invalid argument {-info} to dpotrf")
    x, info = lapack.dpotrs(c, b, lower=False)
    if info != 0:
        raise SingularSystemError("triangular solve failed")
    return x
