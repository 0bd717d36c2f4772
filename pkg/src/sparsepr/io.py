"""JSON serialization of signals, ensembles and measurements.

Arrays are written as ``{"dtype": ..., "shape": [...], "b64": ...}`` holding
the little-endian bytes of a C-ordered float64 or complex128 buffer, which
round-trips bit-exactly. Every document carries ``"schema": SCHEMA_VERSION``.

Signal::

    {"schema": 1, "type": "signal", "field": "real", "n": 8, "seed": 3,
     "support": [1, 5], "vector": <array>}

Ensemble (Gaussian ensembles are regenerated from their seed unless
``explicit`` is requested; partial DFT stores its row indices)::

    {"schema": 1, "type": "ensemble", "kind": "complex_gaussian",
     "m": 20, "n": 8, "seed": 11, "matrix": <array, optional>}
    {"schema": 1, "type": "ensemble", "kind": "partial_dft",
     "m": 4, "n": 8, "seed": 2, "rows": [0, 3, 5, 6]}

Measurements::

    {"schema": 1, "type": "measurements", "sigma": 0.0, "noise_seed": null,
     "y": <array>}
"""

import base64
import json

import numpy as np

from .errors import ParameterError
from .sensing import DenseEnsemble, Measurements, PartialDFT, SparseSignal, sample_ensemble

SCHEMA_VERSION = 1


def encode_array(a):
    a = np.ascontiguousarray(a)
    dtype = "complex128" if np.iscomplexobj(a) else "float64"
    buf = a.astype("<c16" if dtype == "complex128" else "<f8").tobytes()
    return {"dtype": dtype, "shape": list(a.shape), "b64": base64.b64encode(buf).decode("ascii")}


def decode_array(d):
    wire = {"float64": ("<f8", np.float64), "complex128": ("<c16", np.complex128)}
    if d.get("dtype") not in wire:
        raise ParameterError(f"unsupported array dtype {d.get('dtype')!r}")
    stored, native = wire[d["dtype"]]
    raw = base64.b64decode(d["b64"])
    return np.frombuffer(raw, dtype=stored).reshape(d["shape"]).astype(native)


def signal_to_dict(sig):
    return {
        "schema": SCHEMA_VERSION,
        "type": "signal",
        "field": sig.field,
        "n": sig.n,
        "seed": sig.seed,
        "support": sig.support.tolist(),
        "vector": encode_array(sig.vector),
    }


def signal_from_dict(d):
    _check(d, "signal")
    return SparseSignal(decode_array(d["vector"]), d["support"], d["field"], d.get("seed"))


def ensemble_to_dict(A, explicit=False):
    out = {"schema": SCHEMA_VERSION, "type": "ensemble", "kind": A.kind,
           "m": A.m, "n": A.n, "seed": A.seed}
    if isinstance(A, PartialDFT):
        out["rows"] = A.rows.tolist()
    elif explicit or A.seed is None:
        out["matrix"] = encode_array(A.matrix())
    return out


def ensemble_from_dict(d):
    _check(d, "ensemble")
    if d["kind"] == "partial_dft":
        return PartialDFT(d["rows"], d["n"], d.get("seed"))
    if "matrix" in d:
        return DenseEnsemble(decode_array(d["matrix"]), d["kind"], d.get("seed"))
    return sample_ensemble(d["kind"], d["m"], d["n"], d["seed"])


def measurements_to_dict(meas):
    return {"schema": SCHEMA_VERSION, "type": "measurements", "sigma": meas.sigma,
            "noise_seed": meas.noise_seed, "y": encode_array(meas.y)}


def measurements_from_dict(d):
    _check(d, "measurements")
    return Measurements(decode_array(d["y"]), d["sigma"], d.get("noise_seed"))


def _check(d, kind):
    if d.get("type") != kind:
        raise ParameterError(f"expected a {kind} document, got type={d.get('type')!r}")
    if d.get("schema") != SCHEMA_VERSION:
        raise ParameterError(f"unsupported schema version {d.get('schema')!r}")


def dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        return json.load(fh)
