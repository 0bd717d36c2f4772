"""Sparse signals, sensing ensembles and intensity measurements.

Conventions
-----------
An ensemble of ``m`` sensing vectors ``a_j`` in C^n is represented by the
operator ``A`` whose j-th row is ``a_j^*``, so ``A @ x`` gives the inner
products ``<a_j, x> = a_j^* x`` and the noiseless data are ``|A @ x|**2``.
For Gaussian ensembles ``A`` is stored explicitly. A partial DFT ensemble
stores only the selected row indices of the unitary DFT
``F[j, k] = exp(-2 pi i j k / n) / sqrt(n)`` and synthesises rows on demand.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .numerics import as_support, as_vector
from .rng import Stream

REAL = "real"
COMPLEX = "complex"
FIELDS = (REAL, COMPLEX)


@dataclass(frozen=True)
class SparseSignal:
    vector: np.ndarray
    support: np.ndarray
    field: str = REAL
    seed: int | None = None

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ParameterError(f"unknown field {self.field!r}")
        vec = as_vector(self.vector, "signal")
        sup = as_support(self.support, vec.size)
        off = np.ones(vec.size, bool)
        off[sup] = False
        if np.any(vec[off] != 0):
            raise ParameterError("signal has nonzeros outside its support")
        vec.setflags(write=False)
        sup.setflags(write=False)
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "support", sup)

    @property
    def n(self):
        return self.vector.size

    @property
    def s(self):
        return self.support.size

    @property
    def x_min(self):
        """Smallest modulus over the support (0 for an empty support)."""
        if self.support.size == 0:
            return 0.0
        return float(np.min(np.abs(self.vector[self.support])))

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))


def gen_sparse_signal(n, s, field=REAL, seed=0):
    """Draw an ``s``-sparse signal of length ``n``.

    The support is uniform over all ``s``-subsets; nonzero values are i.i.d.
    N(0, 1), or CN(0, 1) when ``field == "complex"``.
    """
    if not 1 <= s <= n:
        raise ParameterError(f"need 1 <= s <= n, got s={s}, n={n}")
    if field not in FIELDS:
        raise ParameterError(f"unknown field {field!r}")
    stream = Stream(seed)
    support = np.sort(stream.sample_without_replacement(n, s))
    if field == COMPLEX:
        values = stream.complex_normal(s)
        vec = np.zeros(n, np.complex128)
    else:
        values = stream.normal(s)
        vec = np.zeros(n)
    vec[support] = values
    return SparseSignal(vec, support, field, seed)


class SensingEnsemble:
    """Linear sensing operator ``x -> (<a_j, x>)_j``.

    Subclasses provide ``apply``, ``adjoint`` and ``columns``.
    """

    kind = "abstract"

    def __init__(self, m, n, seed=None):
        self.m = int(m)
        self.n = int(n)
        self.seed = seed

    def apply(self, x):
        raise NotImplementedError

    def adjoint(self, r):
        raise NotImplementedError

    def columns(self, idx):
        """Dense ``m x len(idx)`` block of the operator."""
        raise NotImplementedError

    def matrix(self):
        return self.columns(np.arange(self.n))

    def subset(self, rows):
        """Ensemble made of the given measurement rows."""
        raise NotImplementedError

    def column_energy(self, weights):
        """``sum_j weights_j |A[j, k]|**2`` for every column ``k``."""
        return np.real(weights @ np.abs(self.matrix()) ** 2)

    def _check_x(self, x):
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ParameterError(f"expected length {self.n}, got shape {x.shape}")
        return x


class DenseEnsemble(SensingEnsemble):
    """Ensemble held as an explicit ``m x n`` matrix of conjugated sensing vectors."""

    def __init__(self, matrix, kind="dense", seed=None):
        A = np.asarray(matrix)
        if A.ndim != 2:
            raise ParameterError("ensemble matrix must be two-dimensional")
        super().__init__(A.shape[0], A.shape[1], seed)
        A = A.copy()
        A.setflags(write=False)
        self._A = A
        self.kind = kind

    def apply(self, x):
        return self._A @ self._check_x(x)

    def adjoint(self, r):
        return self._A.conj().T @ np.asarray(r)

    def columns(self, idx):
        return self._A[:, np.asarray(idx, dtype=np.int64)]

    def matrix(self):
        return self._A

    def column_energy(self, weights):
        return np.asarray(weights) @ (np.abs(self._A) ** 2)

    def subset(self, rows):
        return DenseEnsemble(self._A[np.asarray(rows)], self.kind, self.seed)


class PartialDFT(SensingEnsemble):
    """Rows ``row_indices`` of the unitary n-point DFT."""

    kind = "partial_dft"

    def __init__(self, row_indices, n, seed=None):
        rows = np.asarray(row_indices, dtype=np.int64)
        if rows.ndim != 1 or rows.size == 0:
            raise ParameterError("row index list must be a nonempty 1-D sequence")
        if np.unique(rows).size != rows.size:
            raise ParameterError("row indices must be distinct")
        if rows.min() < 0 or rows.max() >= n:
            raise ParameterError(f"row indices out of range [0, {n})")
        super().__init__(rows.size, n, seed)
        rows.setflags(write=False)
        self.rows = rows

    def apply(self, x):
        return np.fft.fft(self._check_x(x))[self.rows] / np.sqrt(self.n)

    def adjoint(self, r):
        full = np.zeros(self.n, np.complex128)
        full[self.rows] = r
        return np.fft.ifft(full) * np.sqrt(self.n)

    def columns(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        phase = np.outer(self.rows, idx) % self.n  # exact before scaling
        return np.exp(-2j * np.pi * phase / self.n) / np.sqrt(self.n)

    def column_energy(self, weights):
        return np.full(self.n, np.sum(weights) / self.n)

    def subset(self, rows):
        return PartialDFT(self.rows[np.asarray(rows)], self.n, self.seed)


ENSEMBLE_KINDS = ("complex_gaussian", "real_gaussian", "partial_dft")


def sample_ensemble(kind, m, n, seed=0):
    """Draw a sensing ensemble.

    ``complex_gaussian``: entries with real and imaginary parts i.i.d. N(0, 1/2).
    ``real_gaussian``: entries i.i.d. N(0, 1).
    ``partial_dft``: ``m`` distinct DFT rows drawn uniformly, stored sorted.
    """
    if m < 1 or n < 1:
        raise ParameterError(f"need m, n >= 1, got m={m}, n={n}")
    stream = Stream(seed)
    if kind == "complex_gaussian":
        A = stream.complex_normal(m * n).reshape(m, n)
        return DenseEnsemble(A, kind, seed)
    if kind == "real_gaussian":
        A = stream.normal(m * n).reshape(m, n)
        return DenseEnsemble(A, kind, seed)
    if kind == "partial_dft":
        if m > n:
            raise ParameterError(f"partial DFT needs m <= n, got m={m}, n={n}")
        rows = np.sort(stream.sample_without_replacement(n, m))
        return PartialDFT(rows, n, seed)
    raise ParameterError(f"unknown ensemble kind {kind!r}")


@dataclass(frozen=True)
class Measurements:
    y: np.ndarray
    sigma: float = 0.0
    noise_seed: int | None = None
    clean: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        y = as_vector(self.y, "measurements")
        if np.iscomplexobj(y):
            raise ParameterError("measurements must be real")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def m(self):
        return self.y.size


def intensities(y):
    """Plain array view of ``Measurements`` or array-like data."""
    if isinstance(y, Measurements):
        return y.y
    return np.asarray(y, dtype=np.float64)


def measure(A, x):
    """Noiseless intensities ``y_j = |<a_j, x>|**2``."""
    vec = x.vector if isinstance(x, SparseSignal) else np.asarray(x)
    if vec.shape != (A.n,):
        raise ParameterError(f"signal length {vec.shape} does not match ensemble n={A.n}")
    y = np.abs(A.apply(vec)) ** 2
    return Measurements(y, 0.0, None, clean=y)


def add_noise(meas, sigma, seed):
    """Return ``y + sigma * eps`` with ``eps`` i.i.d. N(0, 1) drawn from ``seed``."""
    if sigma < 0:
        raise ParameterError(f"sigma must be nonnegative, got {sigma}")
    y = intensities(meas)
    base = meas.clean if isinstance(meas, Measurements) and meas.clean is not None else y
    eps = Stream(seed).normal(y.size)
    return Measurements(y + sigma * eps, float(sigma), int(seed), clean=base)
