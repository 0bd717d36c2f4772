"""Multi-level orthonormal Haar (Daubechies-1) transforms.

Coefficient layout, 1-D: ``[a_L | d_L | d_{L-1} | ... | d_1]`` where ``a_L`` is
the coarsest approximation and ``d_1`` the finest detail band. 2-D uses the
Mallat layout: each level transforms rows then columns of the current
approximation block (top-left quadrant) in place.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_R2 = np.sqrt(2.0)


@dataclass(frozen=True)
class WaveletSpec:
    levels: int = 4
    family: str = "db1"

    def __post_init__(self):
        if self.levels < 0:
            raise ParameterError("levels must be nonnegative")
        if self.family not in ("db1", "haar"):
            raise ParameterError(f"only Daubechies-1 is supported, got {self.family!r}")

    def check_length(self, n):
        if n % (1 << self.levels):
            raise ParameterError(f"length {n} not divisible by 2**{self.levels}")


def _spec(spec):
    if spec is None:
        return WaveletSpec()
    if isinstance(spec, int):
        return WaveletSpec(spec)
    return spec


def _copy(x):
    x = np.asarray(x)
    return np.array(x, dtype=np.complex128 if np.iscomplexobj(x) else np.float64)


def _analysis(x, n, axis):
    """One Haar level on the first ``n`` entries along ``axis`` (in place on a copy)."""
    x = np.moveaxis(x, axis, -1)
    head = x[..., :n]
    even, odd = head[..., 0::2], head[..., 1::2]
    a = (even + odd) / _R2
    d = (even - odd) / _R2
    x[..., : n // 2] = a
    x[..., n // 2 : n] = d
    return np.moveaxis(x, -1, axis)


def _synthesis(c, n, axis):
    c = np.moveaxis(c, axis, -1)
    a = c[..., : n // 2].copy()
    d = c[..., n // 2 : n].copy()
    c[..., 0:n:2] = (a + d) / _R2
    c[..., 1:n:2] = (a - d) / _R2
    return np.moveaxis(c, -1, axis)


def haar_forward_1d(x, spec=None, axis=-1):
    """Forward transform along ``axis``; batched over the other axes."""
    spec = _spec(spec)
    out = _copy(x)
    n = out.shape[axis]
    spec.check_length(n)
    for _ in range(spec.levels):
        out = _analysis(out, n, axis)
        n //= 2
    return out


def haar_inverse_1d(c, spec=None, axis=-1):
    """Exact inverse of :func:`haar_forward_1d`."""
    spec = _spec(spec)
    out = _copy(c)
    n_full = out.shape[axis]
    spec.check_length(n_full)
    n = n_full >> spec.levels
    for _ in range(spec.levels):
        n *= 2
        out = _synthesis(out, n, axis)
    return out


def _check_image(img, spec):
    if img.ndim < 2:
        raise ParameterError(f"expected a 2-D array, got shape {img.shape}")
    spec.check_length(img.shape[-2])
    spec.check_length(img.shape[-1])


def haar_forward_2d(img, spec=None):
    """Separable transform over the last two axes (batched over leading ones)."""
    spec = _spec(spec)
    out = _copy(img)
    _check_image(out, spec)
    r, c = out.shape[-2:]
    for _ in range(spec.levels):
        block = out[..., :r, :c]
        block = _analysis(block, c, -1)
        block = _analysis(block, r, -2)
        out[..., :r, :c] = block
        r //= 2
        c //= 2
    return out


def haar_inverse_2d(coeffs, spec=None):
    """Exact inverse of :func:`haar_forward_2d`."""
    spec = _spec(spec)
    out = _copy(coeffs)
    _check_image(out, spec)
    r = out.shape[-2] >> spec.levels
    c = out.shape[-1] >> spec.levels
    for _ in range(spec.levels):
        r *= 2
        c *= 2
        block = out[..., :r, :c]
        block = _synthesis(block, r, -2)
        block = _synthesis(block, c, -1)
        out[..., :r, :c] = block
    return out
