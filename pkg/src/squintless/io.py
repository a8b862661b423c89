"""JSON/CSV serialization. Complex numbers are always written as ``[re, im]``."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .model import MultiFreqTensor, Scenario, ScenarioError, Source

FORMAT_VERSION = 1


class TensorFileError(ValueError):
    pass


def to_jsonable(obj):
    """Recursively convert numpy/complex/dataclass values into plain JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if hasattr(obj, "_asdict"):
        return {k: to_jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_finite(obj.real), _finite(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(obj)
    return obj


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None


def complex_array(values, where: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}: expected [re, im] pairs") from None
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ScenarioError(f"{where}: expected [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# -- scenarios --------------------------------------------------------------

def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise ScenarioError(f"{where}: expected an object")
    if key not in d:
        raise ScenarioError(f"{where}.{key}: missing required field" if where else
                            f"{key}: missing required field")
    return d[key]


def _int_field(d, key, where=""):
    v = _require(d, key, where)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{key}: expected an integer")
    return v


def scenario_from_dict(d: dict, seed: int | None = None) -> Scenario:
    """Build a validated :class:`Scenario`.

    ``coeffs`` is a list of ``[re, im]`` pairs, or ``{"random_phase": m}`` for
    modulus-``m`` entries with phases drawn from ``seed``.
    """
    n_rx = _int_field(d, "n_rx")
    n_tx = _int_field(d, "n_tx")
    n_freq = _int_field(d, "n_freq")
    raw = _require(d, "sources", "")
    if not isinstance(raw, list):
        raise ScenarioError("sources: expected a list")
    rng = np.random.default_rng(seed)
    sources = []
    for i, s in enumerate(raw):
        where = f"sources[{i}]"
        wr = _require(s, "omega_r", where)
        wt = _require(s, "omega_t", where)
        c = _require(s, "coeffs", where)
        if isinstance(c, dict):
            m = float(_require(c, "random_phase", f"{where}.coeffs"))
            coeffs = m * np.exp(2j * np.pi * rng.random(n_freq))
        else:
            coeffs = complex_array(c, f"{where}.coeffs")
        try:
            sources.append(Source(float(wr), float(wt), coeffs))
        except ScenarioError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    return Scenario(n_rx, n_tx, n_freq, sources)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "n_rx": s.n_rx, "n_tx": s.n_tx, "n_freq": s.n_freq,
        "sources": [{"omega_r": src.omega_r, "omega_t": src.omega_t,
                     "coeffs": to_jsonable(src.coeffs)} for src in s.sources],
    }


def load_scenario(path, seed: int | None = None) -> Scenario:
    return scenario_from_dict(read_json(path), seed)


# -- tensors ----------------------------------------------------------------

def tensor_to_dict(t: MultiFreqTensor) -> dict:
    return {
        "header": {"n_rx": t.n_rx, "n_tx": t.n_tx, "n_freq": t.n_freq,
                   "format_version": FORMAT_VERSION},
        "slices": to_jsonable(t.slices),
    }


def tensor_from_dict(d: dict) -> MultiFreqTensor:
    if not isinstance(d, dict) or "header" not in d or "slices" not in d:
        raise TensorFileError("tensor file needs 'header' and 'slices'")
    h = d["header"]
    try:
        dims = (int(h["n_freq"]), int(h["n_rx"]), int(h["n_tx"]))
        version = int(h["format_version"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TensorFileError(f"corrupted header: {exc}") from None
    if version != FORMAT_VERSION:
        raise TensorFileError(f"unsupported format_version {version}")
    try:
        arr = complex_array(d["slices"], "slices")
    except ScenarioError as exc:
        raise TensorFileError(str(exc)) from None
    if arr.shape != dims:
        raise TensorFileError(f"header dims {dims} do not match payload shape {arr.shape}")
    return MultiFreqTensor(arr)


def write_tensor(path, t: MultiFreqTensor) -> None:
    write_json(path, tensor_to_dict(t))


def read_tensor(path) -> MultiFreqTensor:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TensorFileError(f"{path}: invalid JSON ({exc})") from None
    return tensor_from_dict(d)


# -- grids ------------------------------------------------------------------

def write_heatmap_csv(path, omega_r, omega_t, values) -> None:
    """Rows indexed by omega_r, columns by omega_t; the first row holds omega_t."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_r\\omega_t"] + [repr(float(x)) for x in omega_t])
        for wr, row in zip(omega_r, values):
            w.writerow([repr(float(wr))] + [repr(float(v)) for v in row])


def read_heatmap_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    omega_t = np.array([float(x) for x in rows[0][1:]])
    omega_r = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return omega_r, omega_t, values


def write_pairing_csv(path, pairing) -> None:
    P = len(pairing.pairs[0].amplitudes) if pairing.pairs else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_r", "omega_t"] + [f"abs_c{p}" for p in range(1, P + 1)] + ["residual"])
        for pr in pairing.pairs:
            w.writerow([repr(pr.omega_r), repr(pr.omega_t)]
                       + [repr(float(abs(c))) for c in pr.amplitudes] + [repr(pairing.residual)])
