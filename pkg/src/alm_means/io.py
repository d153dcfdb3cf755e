"""
Job files, matrix files and JSON output.

A job is a JSON document::

    {
      "arity": 2,
      "means": [{"kind": "geometric", "r": 0.5}, ...],
      "matrices": [[[2.0]], [[3.0]], [[6.0]]],
      "config": {"tol": 1e-12, "max_iter": 10000}
    }

``arity`` 2 takes three two-variable means and three matrices.  For larger
arities each mean descriptor is one of

* ``{"weights": [w_1, ..., w_n]}``: the arithmetic mean with these weights,
* ``{"alm_triple": [m1, m2, m3]}``: the 3-variable ALM mean of a triple,
* ``{"alm_tower": [d_0, ..., d_n]}``: the ALM mean built from ``n + 1``
  descriptors of arity ``n``,

and ``n + 1`` matrices are required.  A matrix is a nested row-major list,
an object ``{"dim": n, "data": [...]}`` (flat or nested data), or
``{"file": "path"}`` pointing to a whitespace-delimited text file, resolved
relative to the job file.

All floats are written with 17 significant digits, which round-trips
doubles exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import alm, kubo_ando
from .errors import JobError, ParameterError


@dataclass
class MeanJobSpec:
    arity: int
    means: list
    matrices: list
    config: alm.AlmConfig = field(default_factory=alm.AlmConfig)


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj, indent: int | None = None) -> str:
    """JSON text with every float printed to 17 significant digits."""
    return _encode(_plain(obj), indent, 0)


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, kubo_ando.TwoVarMean):
        try:
            return kubo_ando.mean_to_dict(obj)
        except Exception:
            return {"kind": obj.kind, "name": obj.name, "weight": obj.weight}
    if isinstance(obj, alm.MultiMean):
        return {"name": obj.name, "arity": obj.arity, "weights": obj.weights.tolist()}
    return obj


def _encode(obj, indent, level):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, (list, dict)):
        items = list(obj.items()) if isinstance(obj, dict) else list(enumerate(obj))
        if not items:
            return "{}" if isinstance(obj, dict) else "[]"
        open_, close = ("{", "}") if isinstance(obj, dict) else ("[", "]")
        parts = []
        for k, v in items:
            val = _encode(v, indent, level + 1)
            parts.append(f"{json.dumps(k)}: {val}" if isinstance(obj, dict) else val)
        if indent is None or _is_numeric_block(obj):
            return open_ + ", ".join(parts) + close
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        return open_ + "\n" + ",\n".join(pad + p for p in parts) + "\n" + end + close
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _is_numeric_block(obj):
    # vectors and matrices of numbers stay on one line
    if isinstance(obj, dict):
        return False
    return all(not isinstance(v, (list, dict)) for v in obj) or all(
        isinstance(v, list) and all(not isinstance(x, (list, dict)) for x in v) for v in obj)


def read_matrix_text(path) -> np.ndarray:
    """Whitespace-delimited square matrix, one row per line."""
    try:
        data = np.loadtxt(path, dtype=float, ndmin=2)
    except (OSError, ValueError) as exc:
        raise JobError(f"{path}: {exc}") from exc
    return _square(data, str(path))


def read_matrix(path) -> np.ndarray:
    """Read a matrix from ``.json`` (nested list or matrix object) or text."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return parse_matrix(load_json(path), base=path.parent, where=str(path))
    return read_matrix_text(path)


def _square(data, where):
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise JobError(f"{where}: matrix must be square, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise JobError(f"{where}: matrix has non-finite entries")
    return data


def parse_matrix(obj, base: Path | None = None, where: str = "matrix") -> np.ndarray:
    if isinstance(obj, dict):
        if "file" in obj:
            p = Path(obj["file"])
            if base is not None and not p.is_absolute():
                p = base / p
            return read_matrix(p)
        if "data" not in obj:
            raise JobError(f"{where}: matrix object needs 'data' or 'file'")
        data = np.asarray(obj["data"], dtype=float)
        dim = obj.get("dim")
        if dim is not None:
            try:
                data = data.reshape(int(dim), int(dim))
            except ValueError as exc:
                raise JobError(f"{where}: data does not match dim={dim}") from exc
        return _square(np.atleast_2d(data), where)
    try:
        data = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise JobError(f"{where}: not a numeric matrix") from exc
    if data.ndim == 0:
        data = data.reshape(1, 1)
    return _square(data, where)


def load_json(path):
    """Parse JSON, reporting line and column of syntax errors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise JobError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise JobError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                       f"{exc.msg}") from exc


def parse_config(obj, base: alm.AlmConfig | None = None) -> alm.AlmConfig:
    obj = obj or {}
    known = {f.name for f in fields(alm.AlmConfig)}
    unknown = set(obj) - known
    if unknown:
        raise JobError(f"unknown config keys {sorted(unknown)}")
    try:
        return alm.with_config(base, **obj)
    except (TypeError, ParameterError) as exc:
        raise JobError(f"bad config: {exc}") from exc


def parse_multimean(desc, cfg: alm.AlmConfig, where: str = "mean"):
    """Build a :class:`~alm_means.alm.MultiMean` from a job descriptor."""
    if not isinstance(desc, dict):
        raise JobError(f"{where}: mean descriptor must be an object")
    if "weights" in desc:
        try:
            return alm.arithmetic_multimean(desc["weights"])
        except ParameterError as exc:
            raise JobError(f"{where}: {exc}") from exc
    if "alm_triple" in desc:
        sigmas = [parse_two_var(d, f"{where}.alm_triple[{i}]")
                  for i, d in enumerate(desc["alm_triple"])]
        if len(sigmas) != 3:
            raise JobError(f"{where}: alm_triple needs three means")
        return alm.build_alm_multimean(alm.validate_triple(*sigmas, unsafe=cfg.unsafe_allow), cfg)
    if "alm_tower" in desc:
        subs = [parse_multimean(d, cfg, f"{where}.alm_tower[{i}]")
                for i, d in enumerate(desc["alm_tower"])]
        return alm.build_alm_n_multimean(subs, cfg)
    if "kind" in desc:
        return alm.from_two_var(parse_two_var(desc, where))
    raise JobError(f"{where}: unrecognized mean descriptor {desc!r}")


def parse_two_var(desc, where="mean"):
    try:
        return kubo_ando.mean_from_dict(desc)
    except ParameterError as exc:
        raise JobError(f"{where}: {exc}") from exc


def parse_job(obj, base: Path | None = None, cfg: alm.AlmConfig | None = None) -> MeanJobSpec:
    if not isinstance(obj, dict):
        raise JobError("job must be a JSON object")
    for key in ("means", "matrices"):
        if key not in obj:
            raise JobError(f"job is missing '{key}'")
    config = parse_config(obj.get("config"), cfg)
    arity = int(obj.get("arity", 2))
    matrices = [parse_matrix(m, base, f"matrices[{i}]") for i, m in enumerate(obj["matrices"])]
    if len(matrices) != arity + 1:
        raise JobError(f"arity {arity} needs {arity + 1} matrices, got {len(matrices)}")
    if len({m.shape for m in matrices}) != 1:
        raise JobError("all matrices must have the same dimension")
    if arity == 2:
        means = [parse_two_var(d, f"means[{i}]") for i, d in enumerate(obj["means"])]
    else:
        means = [parse_multimean(d, config, f"means[{i}]") for i, d in enumerate(obj["means"])]
    if len(means) != arity + 1:
        raise JobError(f"arity {arity} needs {arity + 1} means, got {len(means)}")
    return MeanJobSpec(arity, means, matrices, config)


def load_job(path, cfg: alm.AlmConfig | None = None) -> MeanJobSpec:
    path = Path(path)
    return parse_job(load_json(path), base=path.parent, cfg=cfg)


def run_job(job: MeanJobSpec) -> alm.AlmOutcome:
    if job.arity == 2:
        return alm.alm_compute(job.means, *job.matrices, job.config)
    return alm.alm_compute_n(job.means, job.matrices, job.config)


def job_to_dict(job: MeanJobSpec) -> dict:
    """Inverse of :func:`parse_job` for jobs made of serializable means."""
    if job.arity != 2:
        raise ParameterError("only arity-2 jobs can be serialized")
    cfg = {f.name: getattr(job.config, f.name) for f in fields(alm.AlmConfig)}
    return {
        "arity": 2,
        "means": [kubo_ando.mean_to_dict(s) for s in job.means],
        "matrices": [m.tolist() for m in job.matrices],
        "config": {k: v for k, v in cfg.items() if v is not None},
    }
