"""Seeded Monte-Carlo experiment families.

Every number a runner emits is a function of the config alone: trial ``t``
draws its signal, ensemble, noise and initial point from seeds derived from
``seed_base + t``. Result tables hold only deterministic columns; wall-clock
measurements go to a separate timing table.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..initialization import perturbed_oracle_init, spectral_init
from ..numerics import psnr, relative_error, top_s_indices
from ..rng import Stream, derive_seed
from ..sensing import (
    DenseEnsemble,
    SensingEnsemble,
    SparseSignal,
    add_noise,
    gen_sparse_signal,
    measure,
    sample_ensemble,
)
from ..solver import SolveError, solve, solve_resampled
from ..wavelet import (
    WaveletSpec,
    haar_forward_1d,
    haar_forward_2d,
    haar_inverse_1d,
    haar_inverse_2d,
)
from .config import SUCCESS_TOL

TRACE_HEADER = ("trial", "iter", "rel_err", "loss", "elapsed_s")


def _grahtp(A, y, cfg, init, truth):
    if cfg.resample:
        return solve_resampled(A, y, cfg, init, truth)
    return solve(A, y, cfg, init, truth)


# Extension point: third-party baselines register a callable with the same
# signature as ``_grahtp`` returning a SolveResult-like object.
SOLVERS = {"grahtp": _grahtp}


def register_solver(name, fn):
    SOLVERS[name] = fn


class ComposedEnsemble(SensingEnsemble):
    """Sensing ensemble applied after an inverse Haar transform.

    Acts on wavelet coefficients ``c`` as ``G @ W^{-1} c``. ``shape`` is
    ``None`` for 1-D signals or ``(rows, cols)`` for images flattened in C
    order.
    """

    kind = "composed"

    def __init__(self, base, spec, shape=None):
        super().__init__(base.m, base.n, base.seed)
        self.base = base
        self.spec = spec
        self.shape = shape
        self._matrix = None

    def _inverse(self, c):
        if self.shape is None:
            return haar_inverse_1d(c, self.spec)
        return haar_inverse_2d(np.reshape(c, self.shape), self.spec).ravel()

    def _forward(self, x):
        if self.shape is None:
            return haar_forward_1d(x, self.spec, axis=-1)
        lead = x.shape[:-1]
        out = haar_forward_2d(np.reshape(x, lead + tuple(self.shape)), self.spec)
        return out.reshape(lead + (self.n,))

    def apply(self, c):
        return self.base.apply(self._inverse(self._check_x(c)))

    def adjoint(self, r):
        # W is orthonormal, so (G W^{-1})^* = W G^*.
        return self._forward(self.base.adjoint(r))

    def matrix(self):
        if self._matrix is None:
            # Row j of G W^T is W applied to row j of G.
            M = self._forward(np.asarray(self.base.matrix()))
            M.setflags(write=False)
            self._matrix = M
        return self._matrix

    def columns(self, idx):
        return self.matrix()[:, np.asarray(idx, dtype=np.int64)]

    def column_energy(self, weights):
        return np.asarray(weights) @ (np.abs(self.matrix()) ** 2)

    def subset(self, rows):
        return DenseEnsemble(self.matrix()[np.asarray(rows)], self.kind, self.seed)


def trial_seeds(seed_base, trial):
    base = seed_base + trial
    names = ("signal", "ensemble", "noise", "init")
    return {name: derive_seed(base, i) for i, name in enumerate(names)}


@dataclass
class TrialOutcome:
    params: dict
    trial: int
    final_r: float
    iterations: int
    status: str
    solve_time: float
    history: list
    iters_to_target: int | None = None
    psnr: float | None = None
    arrays: dict = field(default_factory=dict)

    @property
    def success(self):
        return self.final_r <= SUCCESS_TOL


def _noise_seed(cfg, seeds):
    if cfg.noise_seed_offset:
        return derive_seed(seeds["noise"], cfg.noise_seed_offset)
    return seeds["noise"]


def _initial_point(cfg, A, y, truth, s_solver, seed):
    if cfg.init["kind"] == "oracle_perturbed":
        return perturbed_oracle_init(truth, cfg.init["r"], seed)
    return spectral_init(A, y, s_solver, field=cfg.field).z0


def _solve_trial(cfg, A, meas, truth, s_solver, seeds, params, trial, target=None):
    scfg = cfg.solver_config(s_solver)
    z0 = _initial_point(cfg, A, meas, truth, s_solver, seeds["init"])
    t0 = time.perf_counter()
    try:
        res = SOLVERS[cfg.algorithm](A, meas, scfg, z0, truth)
    except SolveError as exc:
        res = exc.result
    elapsed = time.perf_counter() - t0
    z = res.final.z
    to_target = None
    if target is not None:
        to_target = next((h.k for h in res.history if h.rel_err is not None and h.rel_err <= target), None)
    out = TrialOutcome(
        params, trial, relative_error(z, truth.vector), res.final.k, res.status,
        elapsed, res.history, to_target,
    )
    out.arrays["z"] = z
    out.arrays["truth"] = truth.vector
    return out


def run_instance(cfg, n, m, s, trial):
    """Generate and solve one synthetic instance of the (n, m, s) cell."""
    seeds = trial_seeds(cfg.seed_base, trial)
    x = gen_sparse_signal(n, s, cfg.field, seeds["signal"])
    A = sample_ensemble(cfg.ensemble, m, n, seeds["ensemble"])
    meas = measure(A, x)
    if cfg.sigma > 0:
        meas = add_noise(meas, cfg.sigma, _noise_seed(cfg, seeds))
    s_solver = cfg.solver.get("s", s)
    target = cfg.target_r if cfg.family == "dft" else None
    return _solve_trial(cfg, A, meas, x, s_solver, seeds, {"n": n, "m": m, "s": s}, trial, target)


def _map(fn, tasks, threads):
    if threads <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


# ---------------------------------------------------------------- tables


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ResultTable:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, **row):
        self.rows.append(row)

    def to_csv(self):
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(row.get(c)) for c in self.columns))
        return "\n".join(lines) + "\n"

    def column(self, name):
        return [row.get(name) for row in self.rows]


COLUMN_DOCS = {
    "n": "signal dimension (number of wavelet coefficients for reconstruction families)",
    "sigma": "standard deviation of additive Gaussian noise on the intensities",
    "m": "number of measurements",
    "s": "true sparsity",
    "trials": "number of seeded trials in the cell",
    "successes": "trials with relative error <= 1e-6",
    "success_rate": "successes / trials",
    "median_iters": "median outer iterations used (all trials)",
    "mean_final_r": "mean final relative error",
    "target_rate": "fraction of trials reaching rel_err <= target_r within K iterations",
    "median_iters_to_target": "median first iteration with rel_err <= target_r (reaching trials)",
    "mean_psnr_db": "mean PSNR in dB after global phase alignment (capped at 300)",
    "mean_time_s": "timing.csv only: mean solver wall time; excludes generation and initialization",
    "mean_time_success_s": "timing.csv only: mean solver wall time over successful trials",
}


def _summary(outcomes):
    finals = [o.final_r for o in outcomes]
    iters = [o.iterations for o in outcomes]
    succ = sum(o.success for o in outcomes)
    return {
        "trials": len(outcomes),
        "successes": succ,
        "success_rate": succ / len(outcomes),
        "median_iters": float(np.median(iters)),
        "mean_final_r": float(np.mean(finals)),
    }


def _timing_row(params, outcomes):
    times = [o.solve_time for o in outcomes]
    ok = [o.solve_time for o in outcomes if o.success]
    return dict(params, mean_time_s=float(np.mean(times)),
                mean_time_success_s=float(np.mean(ok)) if ok else None)


@dataclass
class Report:
    family: str
    table: ResultTable
    timing: ResultTable
    outcomes: list
    traces: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)


def _traces(outcomes):
    out = {}
    for o in outcomes:
        out[o.trial] = [
            (o.trial, h.k, h.rel_err, h.loss, h.elapsed_s) for h in o.history
        ]
    return out


def _cells(cfg):
    return [(n, m, s) for n, s, m in product(cfg.n_values, cfg.s_values, cfg.m_values)]


def _run_cells(cfg, threads, extra_cols=()):
    cells = _cells(cfg)
    tasks = [(cfg, n, m, s, t) for (n, m, s) in cells for t in range(cfg.trials)]
    results = _map(run_instance, tasks, threads)
    cols = ["n", "m", "s", "trials", "successes", "success_rate", "median_iters", "mean_final_r"]
    table = ResultTable(cols + list(extra_cols))
    timing = ResultTable(["n", "m", "s", "mean_time_s", "mean_time_success_s"])
    grouped = []
    for i, (n, m, s) in enumerate(cells):
        group = results[i * cfg.trials:(i + 1) * cfg.trials]
        params = {"n": n, "m": m, "s": s}
        table.add(**params, **_summary(group))
        timing.add(**_timing_row(params, group))
        grouped.append(group)
    return table, timing, results, grouped


def run_convergence(cfg, threads=1):
    """Per-iteration relative error traces for seeded trials of one (n, m, s)."""
    table, timing, outcomes, _ = _run_cells(cfg, threads)
    return Report("convergence", table, timing, outcomes, _traces(outcomes) if cfg.write_traces else {})


def run_timing(cfg, threads=1):
    """Solver wall time across signal dimensions (timing.csv carries the times)."""
    table, timing, outcomes, _ = _run_cells(cfg, threads)
    return Report("timing", table, timing, outcomes)


def run_transition_curve(cfg, threads=1):
    """Success rate against m for a single sparsity."""
    table, timing, outcomes, _ = _run_cells(cfg, threads)
    return Report("transition_curve", table, timing, outcomes)


def run_transition_grid(cfg, threads=1):
    """Success-rate matrix over the (s, m) grid, one row per cell."""
    table, timing, outcomes, _ = _run_cells(cfg, threads)
    return Report("transition_grid", table, timing, outcomes)


def run_dft(cfg, threads=1):
    """Partial-DFT runs from an oracle-perturbed start; reports iterations to ``target_r``."""
    table, timing, outcomes, grouped = _run_cells(
        cfg, threads, extra_cols=("target_rate", "median_iters_to_target")
    )
    for row, group in zip(table.rows, grouped):
        hits = [o.iters_to_target for o in group if o.iters_to_target is not None]
        row["target_rate"] = len(hits) / len(group)
        row["median_iters_to_target"] = float(np.median(hits)) if hits else None
    return Report("dft", table, timing, outcomes, _traces(outcomes) if cfg.write_traces else {})


# ---------------------------------------------------------- reconstruction


def wavelet_sparse_coefficients(n, s, decay, seed):
    """Synthetic ``s``-sparse Haar coefficient vector with decaying magnitudes.

    The k-th drawn position gets ``sign(g_k) * (1 + |g_k|) * decay**k`` with
    ``g_k ~ N(0, 1)``, mimicking the fast coefficient decay of piecewise
    smooth signals. ``decay = 1`` gives flat magnitudes.
    """
    stream = Stream(seed)
    positions = stream.sample_without_replacement(n, s)
    g = stream.normal(s)
    vec = np.zeros(n)
    vec[positions] = np.sign(g) * (1 + np.abs(g)) * decay ** np.arange(s)
    return SparseSignal(vec, np.sort(positions), "real", seed)


def _reconstruct_1d_trial(cfg, trial):
    n, m, s = cfg.n_values[0], cfg.m_values[0], cfg.s_values[0]
    spec = WaveletSpec(cfg.levels)
    seeds = trial_seeds(cfg.seed_base, trial)
    coeffs = wavelet_sparse_coefficients(n, s, cfg.decay, seeds["signal"])
    signal = haar_inverse_1d(coeffs.vector, spec)
    G = sample_ensemble(cfg.ensemble, m, n, seeds["ensemble"])
    A = ComposedEnsemble(G, spec)
    meas = measure(G, signal)
    if cfg.sigma > 0:
        meas = add_noise(meas, cfg.sigma, _noise_seed(cfg, seeds))
    s_solver = cfg.solver.get("s", s)
    out = _solve_trial(cfg, A, meas, coeffs, s_solver, seeds, {"n": n, "m": m, "s": s}, trial)
    estimate = haar_inverse_1d(np.real(out.arrays["z"]), spec)
    out.psnr = psnr(signal, estimate)
    out.arrays.update(signal=signal, estimate=estimate)
    return out


def run_reconstruct_1d(cfg, threads=1):
    """Wavelet-sparse 1-D signals sensed through ``G W^{-1}``; reports PSNR."""
    outcomes = _map(_reconstruct_1d_trial, [(cfg, t) for t in range(cfg.trials)], threads)
    n, m, s = cfg.n_values[0], cfg.m_values[0], cfg.s_values[0]
    params = {"n": n, "m": m, "s": s}
    table = ResultTable(["n", "m", "s", "sigma", "trials", "successes", "success_rate",
                         "median_iters", "mean_final_r", "mean_psnr_db"])
    table.add(**params, sigma=float(cfg.sigma), **_summary(outcomes),
              mean_psnr_db=float(np.mean([o.psnr for o in outcomes])))
    timing = ResultTable(["n", "m", "s", "mean_time_s", "mean_time_success_s"])
    timing.add(**_timing_row(params, outcomes))
    files = {}
    for o in outcomes:
        rows = ["index,true,estimate"]
        rows += [f"{i},{_fmt(a)},{_fmt(b)}" for i, (a, b) in
                 enumerate(zip(o.arrays["signal"], o.arrays["estimate"]))]
        files[f"signal_{o.trial}.csv"] = "\n".join(rows) + "\n"
    return Report("reconstruct_1d", table, timing, outcomes, files=files)


def phantom(size):
    """Piecewise-constant test image on ``[0, 1]`` with dyadic-aligned blocks."""
    img = np.zeros((size, size))
    u = size // 8
    img[u:3 * u, 2 * u:6 * u] = 1.0
    img[4 * u:7 * u, u:3 * u] = 0.5
    img[5 * u:6 * u, 4 * u:7 * u] = 0.8
    img[3 * u:4 * u, 5 * u:7 * u] = 0.3
    return img


def load_image(path):
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0


def image_to_pgm_bytes(img, lo=0.0, hi=1.0):
    import io as _io

    from PIL import Image

    scaled = np.clip((np.asarray(img) - lo) / max(hi - lo, 1e-300), 0, 1)
    buf = _io.BytesIO()
    Image.fromarray(np.round(scaled * 255).astype(np.uint8), mode="L").save(buf, format="PPM")
    return buf.getvalue()


def _image_target(cfg):
    spec = WaveletSpec(cfg.levels)
    img = load_image(cfg.image) if cfg.image else phantom(cfg.image_size)
    spec.check_length(img.shape[0])
    spec.check_length(img.shape[1])
    coeffs = haar_forward_2d(img, spec).ravel()
    keep = cfg.keep or cfg.s_values[0]
    support = top_s_indices(np.abs(coeffs), min(keep, coeffs.size))
    support = support[coeffs[support] != 0]
    target = np.zeros_like(coeffs)
    target[support] = coeffs[support]
    return SparseSignal(target, support), img.shape


def _reconstruct_2d_trial(cfg, trial, target, shape):
    m = cfg.m_values[0]
    spec = WaveletSpec(cfg.levels)
    seeds = trial_seeds(cfg.seed_base, trial)
    n = target.n
    G = sample_ensemble(cfg.ensemble, m, n, seeds["ensemble"])
    A = ComposedEnsemble(G, spec, shape)
    true_img = haar_inverse_2d(target.vector.reshape(shape), spec)
    meas = measure(G, true_img.ravel())
    if cfg.sigma > 0:
        meas = add_noise(meas, cfg.sigma, _noise_seed(cfg, seeds))
    s_solver = cfg.solver.get("s", cfg.s_values[0])
    params = {"n": n, "m": m, "s": target.s}
    out = _solve_trial(cfg, A, meas, target, s_solver, seeds, params, trial)
    z = np.real(out.arrays["z"])
    if np.dot(z, target.vector) < 0:
        z = -z
    estimate = haar_inverse_2d(z.reshape(shape), spec)
    out.psnr = psnr(true_img.ravel(), estimate.ravel())
    out.arrays.update(true_image=true_img, estimate=estimate, coeffs=z)
    return out


def run_reconstruct_2d(cfg, threads=1):
    """Image with thresholded Haar coefficients sensed through ``G W^{-1}``."""
    target, shape = _image_target(cfg)
    tasks = [(cfg, t, target, shape) for t in range(cfg.trials)]
    outcomes = _map(_reconstruct_2d_trial, tasks, threads)
    params = {"n": target.n, "m": cfg.m_values[0], "s": target.s}
    table = ResultTable(["n", "m", "s", "sigma", "trials", "successes", "success_rate",
                         "median_iters", "mean_final_r", "mean_psnr_db"])
    table.add(**params, sigma=float(cfg.sigma), **_summary(outcomes),
              mean_psnr_db=float(np.mean([o.psnr for o in outcomes])))
    timing = ResultTable(["n", "m", "s", "mean_time_s", "mean_time_success_s"])
    timing.add(**_timing_row(params, outcomes))
    true_img = outcomes[0].arrays["true_image"]
    lo, hi = float(true_img.min()), float(true_img.max())
    files = {"image_true.pgm": image_to_pgm_bytes(true_img, lo, hi)}
    for o in outcomes:
        files[f"image_{o.trial}.pgm"] = image_to_pgm_bytes(o.arrays["estimate"], lo, hi)
        rows = ["index,true,estimate"]
        rows += [f"{i},{_fmt(a)},{_fmt(b)}" for i, (a, b) in
                 enumerate(zip(target.vector, o.arrays["coeffs"]))]
        files[f"coeffs_{o.trial}.csv"] = "\n".join(rows) + "\n"
    return Report("reconstruct_2d", table, timing, outcomes, files=files)


RUNNERS = {
    "convergence": run_convergence,
    "timing": run_timing,
    "transition_curve": run_transition_curve,
    "transition_grid": run_transition_grid,
    "reconstruct_1d": run_reconstruct_1d,
    "reconstruct_2d": run_reconstruct_2d,
    "dft": run_dft,
}


def run_experiment(cfg, threads=1):
    return RUNNERS[cfg.family](cfg, threads)
