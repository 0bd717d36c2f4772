"""``sparsepr`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from .. import __version__, io
from ..errors import InitializationError, ParameterError, SingularSystemError
from ..numerics import relative_error
from ..sensing import add_noise, gen_sparse_signal, measure, sample_ensemble
from ..solver import SolveError
from .config import FAMILIES, SUCCESS_TOL, ConfigError, config_from_dict, load_config
from .experiments import (
    COLUMN_DOCS,
    SOLVERS,
    TRACE_HEADER,
    ResultTable,
    _fmt,
    _initial_point,
    _noise_seed,
    run_experiment,
    trial_seeds,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_ALIASES = {"dft": "dft", "reconstruct1d": "reconstruct_1d", "reconstruct2d": "reconstruct_2d"}


def _common(p, config_required=False):
    p.add_argument("--config", required=config_required, help="experiment config (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="concurrent trials (default 1)")
    p.add_argument("--seed", type=int, default=None, help="override seed_base")


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsepr", description="Sparse phase retrieval toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write one seeded instance (signal, ensemble, measurements)")
    _common(p)
    p.add_argument("--trial", type=int, default=0)

    p = sub.add_parser("solve", help="solve an instance written by gen (or generated from --config)")
    _common(p)
    p.add_argument("--instance", help="directory written by gen")
    p.add_argument("--trial", type=int, default=0)

    p = sub.add_parser("bench", help="run an experiment family")
    p.add_argument("family", choices=FAMILIES)
    _common(p)
    p.add_argument("--plot", action="store_true", help="also render PNG figures")

    for name in _ALIASES:
        p = sub.add_parser(name, help=f"shorthand for 'bench {_ALIASES[name]}'")
        _common(p)
        p.add_argument("--plot", action="store_true", help="also render PNG figures")
    return parser


def _config(args, family):
    if args.config:
        return load_config(args.config, family, args.seed)
    if family is None:
        raise ConfigError("--config", "required for this command")
    d = {"family": family}
    if args.seed is not None:
        d["seed_base"] = args.seed
    return config_from_dict(d)


def _write_text(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_meta(out, meta):
    with open(os.path.join(out, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _trace_csv(rows):
    lines = [",".join(TRACE_HEADER)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _meta(command, cfg, columns, files, extra=None):
    meta = {
        "schema_version": 1,
        "package": "sparsepr",
        "version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "success_definition": f"relative error <= {SUCCESS_TOL:g}",
        "columns": {c: COLUMN_DOCS.get(c, "") for c in columns},
        "timing_note": "wall times are solver-only (exclude data generation and "
                       "initialization) and live in timing.csv, not results.csv",
        "files": sorted(files),
    }
    meta.update(extra or {})
    return meta


def cmd_bench(args, family):
    cfg = _config(args, family)
    if args.threads < 1:
        raise ConfigError("--threads", "must be >= 1")
    os.makedirs(args.out, exist_ok=True)
    report = run_experiment(cfg, args.threads)
    files = {"results.csv": report.table.to_csv(), "timing.csv": report.timing.to_csv()}
    for trial, rows in sorted(report.traces.items()):
        files[f"trace_{trial}.csv"] = _trace_csv(rows)
    files.update(report.files)
    for name, content in files.items():
        path = os.path.join(args.out, name)
        if isinstance(content, bytes):
            with open(path, "wb") as fh:
                fh.write(content)
        else:
            _write_text(path, content)
    names = list(files) + ["meta.json"]
    if getattr(args, "plot", False):
        from .plotting import render

        names += render(report, args.out)
    statuses = {}
    for o in report.outcomes:
        statuses[o.status] = statuses.get(o.status, 0) + 1
    _write_meta(args.out, _meta(f"bench {cfg.family}", cfg, report.table.columns, names,
                                {"status_counts": dict(sorted(statuses.items()))}))
    finals = np.array([o.final_r for o in report.outcomes])
    if not np.all(np.isfinite(finals)):
        print("non-finite relative error in at least one trial", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _instance(cfg, trial):
    n, m, s = cfg.n_values[0], cfg.m_values[0], cfg.s_values[0]
    seeds = trial_seeds(cfg.seed_base, trial)
    x = gen_sparse_signal(n, s, cfg.field, seeds["signal"])
    A = sample_ensemble(cfg.ensemble, m, n, seeds["ensemble"])
    meas = measure(A, x)
    if cfg.sigma > 0:
        meas = add_noise(meas, cfg.sigma, _noise_seed(cfg, seeds))
    return x, A, meas, seeds


def cmd_gen(args):
    cfg = _config(args, None)
    x, A, meas, _ = _instance(cfg, args.trial)
    os.makedirs(args.out, exist_ok=True)
    io.dump(io.signal_to_dict(x), os.path.join(args.out, "signal.json"))
    io.dump(io.ensemble_to_dict(A), os.path.join(args.out, "ensemble.json"))
    io.dump(io.measurements_to_dict(meas), os.path.join(args.out, "measurements.json"))
    io.dump(cfg.to_dict(), os.path.join(args.out, "config.json"))
    return EXIT_OK


def cmd_solve(args):
    if args.instance:
        d = args.instance
        cfg_path = args.config or os.path.join(d, "config.json")
        cfg = load_config(cfg_path, None, args.seed)
        try:
            x = io.signal_from_dict(io.load(os.path.join(d, "signal.json")))
            A = io.ensemble_from_dict(io.load(os.path.join(d, "ensemble.json")))
            meas = io.measurements_from_dict(io.load(os.path.join(d, "measurements.json")))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError("--instance", f"cannot read instance: {exc}") from exc
        seeds = trial_seeds(cfg.seed_base, args.trial)
    else:
        cfg = _config(args, None)
        x, A, meas, seeds = _instance(cfg, args.trial)
    s = cfg.solver.get("s", x.s)
    scfg = cfg.solver_config(s)
    z0 = _initial_point(cfg, A, meas, x, s, seeds["init"])
    os.makedirs(args.out, exist_ok=True)
    status = EXIT_OK
    try:
        res = SOLVERS[cfg.algorithm](A, meas, scfg, z0, x)
    except SolveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        res = exc.result
        status = EXIT_NUMERICAL
    r = relative_error(res.z, x.vector)
    if not np.isfinite(r):
        status = EXIT_NUMERICAL
    table = ResultTable(["n", "m", "s", "status", "iterations", "final_loss", "final_r", "success"])
    table.add(n=A.n, m=A.m, s=x.s, status=res.status, iterations=res.iterations,
              final_loss=res.final.loss, final_r=r, success=r <= SUCCESS_TOL)
    _write_text(os.path.join(args.out, "results.csv"), table.to_csv())
    rows = [(args.trial, h.k, h.rel_err, h.loss, h.elapsed_s) for h in res.history]
    _write_text(os.path.join(args.out, f"trace_{args.trial}.csv"), _trace_csv(rows))
    io.dump(res.to_dict(include_vector=True), os.path.join(args.out, "result.json"))
    files = ["results.csv", f"trace_{args.trial}.csv", "result.json", "meta.json"]
    _write_meta(args.out, _meta("solve", cfg, table.columns, files))
    return status


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "bench":
            return cmd_bench(args, args.family)
        return cmd_bench(args, _ALIASES[args.command])
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularSystemError, InitializationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
