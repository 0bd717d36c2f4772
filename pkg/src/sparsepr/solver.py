"""Gradient hard thresholding pursuit with Gauss-Newton subspace refinement.

Each outer iteration takes a projected gradient step
``u = H_s(z - mu * grad f(z))``, fixes ``S = supp(u)`` and refines on that
support with ``L`` Gauss-Newton steps started from ``u``.
"""

import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import InitializationError, ParameterError, SingularSystemError
from .numerics import dist, hard_threshold
from .objective import gn_step, loss, wirtinger_gradient
from .sensing import SparseSignal, intensities

AUTO_STEP = 0.394
PGD_POINT = "pgd_point"
PREVIOUS_ITERATE = "previous_iterate"


@dataclass(frozen=True)
class SolverConfig:
    s: int
    K: int = 60
    L: int = 1
    step: float | str = "auto"
    stop_tol: float = 1e-14
    resample: bool = False
    inner_start: str = PGD_POINT

    def __post_init__(self):
        if self.s < 1:
            raise ParameterError(f"sparsity must be >= 1, got {self.s}")
        if self.K < 1 or self.L < 1:
            raise ParameterError(f"need K >= 1 and L >= 1, got K={self.K}, L={self.L}")
        if self.stop_tol < 0:
            raise ParameterError("stop_tol must be nonnegative")
        if self.inner_start not in (PGD_POINT, PREVIOUS_ITERATE):
            raise ParameterError(f"unknown inner_start {self.inner_start!r}")
        if self.step != "auto" and not (isinstance(self.step, (int, float)) and self.step > 0):
            raise ParameterError(f"step must be 'auto' or a positive number, got {self.step!r}")

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown solver fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass
class IterateState:
    z: np.ndarray
    support: np.ndarray
    k: int
    loss: float
    dist_to_truth: float | None = None


@dataclass
class IterRecord:
    k: int
    loss: float
    rel_err: float | None
    support_size: int
    elapsed_s: float


@dataclass
class SolveResult:
    final: IterateState
    history: list
    status: str
    step: float
    wall_times: dict = field(default_factory=lambda: {"pgd": 0.0, "gauss_newton": 0.0})

    @property
    def z(self):
        return self.final.z

    @property
    def iterations(self):
        return self.final.k

    def to_dict(self, include_vector=False):
        out = {
            "status": self.status,
            "iterations": self.final.k,
            "step": self.step,
            "final_loss": self.final.loss,
            "final_dist": self.final.dist_to_truth,
            "support": self.final.support.tolist(),
            "wall_times": dict(self.wall_times),
            "history": [asdict(h) for h in self.history],
        }
        if include_vector:
            z = self.final.z
            if np.iscomplexobj(z):
                out["z"] = {"re": z.real.tolist(), "im": z.imag.tolist()}
            else:
                out["z"] = z.tolist()
        return out


class SolveError(SingularSystemError):
    """A solve aborted on a singular system; ``result`` holds the partial run."""

    def __init__(self, message, result, pivot=None):
        super().__init__(message, pivot)
        self.result = result


def step_size(y, policy="auto"):
    """Step size: ``policy`` verbatim when numeric, else ``0.394 / mean(y)``.

    ``mean(y)`` estimates ``||x||**2`` since ``E|<a, x>|**2 = ||x||**2`` for
    ``a ~ CN(0, I)``.
    """
    if policy != "auto":
        return float(policy)
    nu = float(np.mean(intensities(y)))
    if not nu > 0:
        raise InitializationError(f"mean intensity must be positive, got {nu}")
    return AUTO_STEP / nu


def _pgd(z, A, y, mu, s):
    grad = wirtinger_gradient(z, A, y)
    if not np.iscomplexobj(z):
        grad = grad.real
    return hard_threshold(z - mu * grad, s)


def _iterate(z, pgd_data, gn_data, mu, cfg, times=None):
    """One outer iteration; returns (z_next, support).

    On a singular Gauss-Newton system the PGD step is retried once with
    ``mu / 2`` before the error propagates.
    """
    for attempt, mu_k in enumerate((mu, mu / 2)):
        t0 = time.perf_counter()
        u, S = _pgd(z, *pgd_data, mu_k, cfg.s)
        t1 = time.perf_counter()
        if cfg.inner_start == PGD_POINT:
            w = u
        else:
            w = np.zeros_like(z)
            w[S] = z[S]
        try:
            for _ in range(cfg.L):
                w = gn_step(w, *gn_data, S)
        except SingularSystemError:
            if attempt == 1:
                raise
            continue
        finally:
            if times is not None:
                times["pgd"] += t1 - t0
                times["gauss_newton"] += time.perf_counter() - t1
        return w, S


def grahtp_iteration(state, A, y, cfg, mu=None):
    """Advance ``state`` by one outer iteration on data ``(A, y)``."""
    if mu is None:
        mu = step_size(y, cfg.step)
    z, S = _iterate(state.z, (A, y), (A, y), mu, cfg)
    return IterateState(z, S, state.k + 1, loss(z, A, y))


def _prepare_init(init, s):
    z = np.array(init)
    if z.ndim != 1:
        raise ParameterError("initial point must be a vector")
    if np.count_nonzero(z) > s:
        z, _ = hard_threshold(z, s)
    return z


def _truth_vector(truth):
    if truth is None:
        return None
    return truth.vector if isinstance(truth, SparseSignal) else np.asarray(truth)


def _run(init, cfg, data_for_iter, loss_data, mu_for_iter, truth, n_iters):
    x = _truth_vector(truth)
    xnorm = float(np.linalg.norm(x)) if x is not None else None

    def rel(z):
        if x is None or xnorm == 0:
            return None
        return dist(z, x) / xnorm

    z = _prepare_init(init, cfg.s)
    times = {"pgd": 0.0, "gauss_newton": 0.0}
    t_start = time.perf_counter()
    f0 = loss(z, *loss_data(0))
    r0 = rel(z)
    state = IterateState(z, np.flatnonzero(z), 0, f0, None if r0 is None else r0 * xnorm)
    history = [IterRecord(0, f0, r0, int(np.count_nonzero(z)), 0.0)]
    status = "max_iters"
    mu0 = mu_for_iter(0)
    if f0 == 0.0:
        status = "converged"
        n_iters = 0
    for k in range(n_iters):
        pgd_data, gn_data = data_for_iter(k)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                z_next, S = _iterate(state.z, pgd_data, gn_data, mu_for_iter(k), cfg, times)
        except SingularSystemError as exc:
            result = SolveResult(state, history, "singular_system", mu0, times)
            raise SolveError(f"iteration {k}: {exc}", result, getattr(exc, "pivot", None)) from exc
        if not np.all(np.isfinite(z_next)):
            # Far from the solution a Gauss-Newton step can overshoot without
            # bound; keep the last finite iterate.
            status = "diverged"
            break
        with np.errstate(over="ignore"):
            fk = loss(z_next, *loss_data(k + 1))
        rk = rel(z_next)
        change = np.linalg.norm(z_next - state.z) / max(np.linalg.norm(state.z), 1e-30)
        state = IterateState(z_next, S, k + 1, fk, None if rk is None else rk * xnorm)
        history.append(IterRecord(k + 1, fk, rk, S.size, time.perf_counter() - t_start))
        if change <= cfg.stop_tol or fk == 0.0:
            status = "converged"
            break
    return SolveResult(state, history, status, mu0, times)


def solve(A, y, cfg, init, truth=None):
    """Run up to ``cfg.K`` outer iterations from ``init``.

    Stops early once ``||z_{k+1} - z_k|| / max(||z_k||, 1e-30) <= cfg.stop_tol``
    or the loss is exactly zero. ``truth`` (optional) adds per-iteration
    relative errors to the history.
    """
    mu = step_size(y, cfg.step) if np.any(intensities(y) != 0) or cfg.step != "auto" else 0.0
    return _run(
        init,
        cfg,
        lambda k: ((A, y), (A, y)),
        lambda k: (A, y),
        lambda k: mu,
        truth,
        cfg.K,
    )


def partition_rows(m, K):
    """Split ``range(m)`` into ``2K`` equal consecutive blocks, dropping ``m mod 2K`` rows."""
    parts = 2 * K
    size = m // parts
    if size == 0:
        raise ParameterError(f"cannot split {m} rows into {parts} partitions")
    return [np.arange(i * size, (i + 1) * size) for i in range(parts)]


def solve_resampled(A, y, cfg, init, truth=None):
    """Resampled variant: iteration ``k`` uses block ``2k`` for the PGD step
    and block ``2k + 1`` for the Gauss-Newton refinement (zero-based)."""
    y = intensities(y)
    blocks = partition_rows(A.m, cfg.K)
    if blocks[0].size < cfg.s:
        raise ParameterError(
            f"partition of {blocks[0].size} rows is smaller than the sparsity {cfg.s}"
        )
    parts = [(A.subset(b), y[b]) for b in blocks]
    mus = [step_size(parts[2 * k][1], cfg.step) for k in range(cfg.K)]
    return _run(
        init,
        cfg,
        lambda k: (parts[2 * k], parts[2 * k + 1]),
        lambda k: parts[max(2 * k - 1, 0)],
        lambda k: mus[k],
        truth,
        cfg.K,
    )
