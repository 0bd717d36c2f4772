"""Initial points: support-restricted spectral estimate and oracle perturbation."""

from dataclasses import dataclass

import numpy as np

from .errors import InitializationError, ParameterError
from .numerics import top_s_indices
from .rng import Stream
from .sensing import SparseSignal, intensities


@dataclass(frozen=True)
class InitReport:
    z0: np.ndarray
    support_estimate: np.ndarray
    power_iterations_used: int
    eigen_residual: float
    converged: bool


def spectral_scores(A, y):
    """Diagonal of ``(1/m) sum_i y_i a_i a_i^*``: ``(1/m) sum_i y_i |a_ij|**2``."""
    y = intensities(y)
    return A.column_energy(y) / y.size


def spectral_support(A, y, s):
    """Indices of the ``s`` largest diagonal scores (ties to the lowest index)."""
    if not 1 <= s <= A.n:
        raise ParameterError(f"sparsity s={s} outside [1, {A.n}]")
    return top_s_indices(spectral_scores(A, y), s)


def restricted_matrix(A, y, S, field="real"):
    """``(1/m) sum_i y_i [a_i]_S [a_i]_S^*``; its real part when ``field == "real"``.

    Rows of the operator are ``a_i^*``, so ``[a_i]_S = conj(A[i, S])``.
    """
    y = intensities(y)
    B = np.conj(A.columns(S))
    M = (B.T * y) @ B.conj() / y.size
    M = 0.5 * (M + M.conj().T)
    return M.real if field == "real" else M


def power_iteration(M, tol=1e-8, max_iter=1000):
    """Leading eigenpair of a Hermitian PSD matrix.

    Starts from the normalised all-ones vector and stops once the iterate
    moves by at most ``tol`` (after fixing its phase).

    Returns
    -------
    v, lam, iterations, residual, converged
        ``residual`` is ``||M v - lam v|| / lam``.
    """
    t = M.shape[0]
    v = np.ones(t, dtype=M.dtype) / np.sqrt(t)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        w = w / nw
        phase = np.vdot(w, v)  # w^* v; rotate w onto v before comparing
        if phase != 0:
            w = w * (phase / abs(phase))
        delta = np.linalg.norm(w - v)
        v = w
        if delta <= tol:
            converged = True
            break
    lam = float(np.real(np.vdot(v, M @ v)))
    resid = float(np.linalg.norm(M @ v - lam * v) / lam) if lam > 0 else float("inf")
    return v, lam, it, resid, converged


def spectral_init(A, y, s, field="real"):
    """Spectral initial point supported on the estimated support.

    The leading eigenvector of the restricted matrix is rotated so that its
    largest-modulus entry is real positive, embedded on the support and
    scaled to norm ``sqrt(mean(y))``.
    """
    yv = intensities(y)
    nu = float(np.mean(yv))
    if not nu > 0:
        raise InitializationError(f"mean intensity must be positive, got {nu}")
    S = spectral_support(A, yv, s)
    M = restricted_matrix(A, yv, S, field)
    v, _, iters, resid, ok = power_iteration(M)
    lead = v[np.argmax(np.abs(v))]
    v = v * (np.conj(lead) / abs(lead))
    if field == "real":
        z0 = np.zeros(A.n)
        v = np.real(v)
    else:
        z0 = np.zeros(A.n, np.complex128)
    z0[S] = np.sqrt(nu) * v / np.linalg.norm(v)
    return InitReport(z0, S, iters, resid, ok)


def perturbed_oracle_init(truth, r_target, seed):
    """``x + w`` with ``w`` a random direction on the true support, scaled so
    that ``relative_error(x + w, x) == r_target``.

    The direction is uniform on the unit sphere of the support coordinates.
    Its length ``t`` solves ``dist(x + t d, x) = r ||x||`` for the phase- or
    sign-invariant distance (the minimiser can be ``-x`` or a rotated ``x``).
    """
    if not 0 < r_target < 1:
        raise ParameterError(f"r_target must lie in (0, 1), got {r_target}")
    x = truth.vector if isinstance(truth, SparseSignal) else np.asarray(truth)
    S = truth.support if isinstance(truth, SparseSignal) else np.flatnonzero(x)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ParameterError("truth must be nonzero")
    stream = Stream(seed)
    cplx = np.iscomplexobj(x)
    d = stream.complex_normal(S.size) if cplx else stream.normal(S.size)
    d = d / np.linalg.norm(d)
    xs = x[S]
    target = r_target * nx
    # dist(x + t d, x)^2 = min over phase of ||x + t d - e^{i phi} x||^2
    #   = t^2 + 2 nx^2 + 2 t Re<x, d> - 2 |nx^2 + t <x, d>|
    # (real case: the phase set is {+1, -1}).
    inner = np.vdot(xs, d)

    def dist2(t):
        if cplx:
            return t * t + 2 * nx**2 + 2 * t * inner.real - 2 * abs(nx**2 + t * inner)
        plus = t * t
        minus = t * t + 4 * nx**2 + 4 * t * inner.real
        return min(plus, minus)

    # dist2 is increasing in t until it reaches the target for r < 1; bisect.
    lo, hi = 0.0, target
    while dist2(hi) < target**2:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dist2(mid) < target**2:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    z = x.copy()
    z[S] = xs + t * d
    return z
