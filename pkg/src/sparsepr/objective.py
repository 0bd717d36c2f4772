"""Intensity loss and its Gauss-Newton machinery.

With residuals ``F_j(z) = (|<a_j, z>|**2 - y_j) / (2 sqrt(m))`` the loss is
``f(z) = sum_j F_j(z)**2 = (1/4m) sum_j (|<a_j, z>|**2 - y_j)**2``.

Real iterates use the Jacobian row ``(a_jR a_jR^T z + a_jI a_jI^T z)^T / sqrt(m)``.
Complex iterates are treated as ``2|T|`` real unknowns ordered
``[Re z_T, Im z_T]``, so the same normal-equation code serves both fields.
"""

from typing import NamedTuple

import numpy as np

from .errors import ParameterError, SingularSystemError
from .numerics import as_support, solve_spd, symmetrize
from .sensing import intensities


def _prepare(z, A, y):
    z = np.asarray(z)
    y = intensities(y)
    if z.shape != (A.n,):
        raise ParameterError(f"iterate length {z.shape} does not match ensemble n={A.n}")
    if y.shape != (A.m,):
        raise ParameterError(f"data length {y.shape} does not match ensemble m={A.m}")
    c = A.apply(z)
    return z, y, c, np.abs(c) ** 2 - y


def loss(z, A, y):
    """``(1/4m) sum_j (|<a_j, z>|**2 - y_j)**2``."""
    _, y, _, r = _prepare(z, A, y)
    return float(np.dot(r, r) / (4 * y.size))


def residual(z, A, y):
    """Residual vector ``F(z)`` with ``||F(z)||**2 == loss(z)``."""
    _, y, _, r = _prepare(z, A, y)
    return r / (2 * np.sqrt(y.size))


def wirtinger_gradient(z, A, y):
    """``(1/m) sum_j (|a_j^* z|**2 - y_j) a_j a_j^* z``.

    Equals ``df/dRe(z) + i df/dIm(z)``; for real ``z`` its real part is
    :func:`gradient`.
    """
    _, y, c, r = _prepare(z, A, y)
    return A.adjoint(r * c) / y.size


def gradient(z, A, y):
    """Gradient of the loss over real ``z``."""
    if np.iscomplexobj(z):
        raise ParameterError("gradient() takes real iterates; use wirtinger_gradient()")
    return np.real(wirtinger_gradient(z, A, y))


def _jacobian_from(c, B, m, complex_mode):
    w = np.conj(c)[:, None] * B
    if complex_mode:
        return np.hstack([w.real, -w.imag]) / np.sqrt(m)
    return w.real / np.sqrt(m)


def jacobian(z, A, T):
    """Jacobian of ``F`` at ``z`` restricted to the columns ``T``.

    Returns an ``m x |T|`` array (``m x 2|T|`` for complex ``z``).
    """
    z = np.asarray(z)
    T = as_support(T, A.n)
    c = A.apply(z)
    return _jacobian_from(c, A.columns(T), A.m, np.iscomplexobj(z))


class GaussNewtonSystem(NamedTuple):
    H: np.ndarray
    g: np.ndarray
    support: np.ndarray


def gn_system(z, A, y, S):
    """Normal equations ``H = J_S^T J_S``, ``g = J_S^T F(z)``."""
    S = as_support(S, A.n)
    if S.size == 0:
        raise ParameterError("Gauss-Newton support must be nonempty")
    z, y, c, r = _prepare(z, A, y)
    J = _jacobian_from(c, A.columns(S), y.size, np.iscomplexobj(z))
    F = r / (2 * np.sqrt(y.size))
    return GaussNewtonSystem(symmetrize(J.T @ J), J.T @ F, S)


def _phase_direction(z, S):
    """Unit null direction of the complex Jacobian (global phase rotation).

    Only defined when ``z`` lives on ``S``; returns None otherwise.
    """
    off = np.ones(z.size, bool)
    off[S] = False
    if np.any(z[off] != 0):
        return None
    zs = z[S]
    v = np.concatenate([-zs.imag, zs.real])
    nv = np.linalg.norm(v)
    return v / nv if nv > 0 else None


def _solve_with_fallback(H, g):
    try:
        return solve_spd(H, g)
    except SingularSystemError:
        shift = 1e-12 * np.trace(H) / H.shape[0]
        return solve_spd(H + shift * np.eye(H.shape[0]), g)


def gn_step(z, A, y, S):
    """One Gauss-Newton step on the subspace ``supp(w) in S``.

    Returns ``z'`` with ``z'_S = z_S - H^{-1} g`` and zeros off ``S``. In
    complex mode the step is the minimum-norm solution: the global-phase null
    direction of ``H`` is pinned before factorising.

    Raises
    ------
    SingularSystemError
        When ``H`` stays singular after one Tikhonov shift of
        ``1e-12 * trace(H) / dim``.
    """
    z = np.asarray(z)
    system = gn_system(z, A, y, S)
    H, g, S = system
    complex_mode = np.iscomplexobj(z)
    if complex_mode:
        v = _phase_direction(z, S)
        if v is not None:
            H = H + (np.trace(H) / H.shape[0]) * np.outer(v, v)
    delta = _solve_with_fallback(H, g)
    out = np.zeros_like(z)
    if complex_mode:
        t = S.size
        out[S] = z[S] - (delta[:t] + 1j * delta[t:])
    else:
        out[S] = z[S] - delta
    return out
