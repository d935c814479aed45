"""CSV/JSON artifacts and model configuration files.

CSV files are headered, comma-separated and UTF-8. Floats are written with
``repr`` so a write/read cycle is exact. An optional first line
``# {json}`` carries the artifact metadata (tool version, config, seed).
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .densities import reference_from_dict
from .models import ModelSpec

TOOL = "coranks"


class ArtifactError(ValueError):
    """Malformed input file or refused output; the message names the field."""


def artifact_meta(command: str, config: dict, seed) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command,
            "config": config, "seed": seed}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False)


def check_writable(path, force: bool = False) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise ArtifactError(f"output {str(path)!r} exists; pass --force to overwrite")
    if not path.parent.exists():
        raise ArtifactError(f"output directory {str(path.parent)!r} does not exist")
    return path


def write_json(path, obj, force: bool = False) -> Path:
    path = check_writable(path, force)
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
    return path


def read_json(path, what: str = "config") -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"{what} {str(path)!r}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{what} {str(path)!r}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ArtifactError(f"{what} {str(path)!r}: top level must be an object")
    return obj


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def write_csv(path, header, rows, meta: dict | None = None, force: bool = False) -> Path:
    path = check_writable(path, force)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if meta is not None:
            fh.write("# " + json.dumps(_jsonable(meta), sort_keys=True, ensure_ascii=False) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    return path


def read_csv(path, what: str = "input") -> tuple[dict | None, list[str], np.ndarray]:
    """Return ``(meta, header, values)``; every cell must parse as a float."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ArtifactError(f"{what} {str(path)!r}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ArtifactError(f"{what} {str(path)!r}: not UTF-8") from exc
    meta = None
    start = 0
    if lines and lines[0].startswith("#"):
        try:
            meta = json.loads(lines[0][1:])
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{what} {str(path)!r}: metadata line is not JSON") from exc
        start = 1
    rows = list(csv.reader(lines[start:]))
    rows = [r for r in rows if r]
    if not rows:
        raise ArtifactError(f"{what} {str(path)!r}: missing header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ArtifactError(f"{what} {str(path)!r}: duplicate column names in header")
    if len(rows) < 2:
        raise ArtifactError(f"{what} {str(path)!r}: no data rows")
    values = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:]):
        line = i + start + 2
        if len(row) != len(header):
            raise ArtifactError(
                f"{what} {str(path)!r} line {line}: {len(row)} fields, header has {len(header)}")
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ArtifactError(
                    f"{what} {str(path)!r} line {line}, column {header[j]!r}: "
                    f"not a number: {cell!r}") from None
            if not math.isfinite(values[i, j]):
                raise ArtifactError(
                    f"{what} {str(path)!r} line {line}, column {header[j]!r}: non-finite value")
    return meta, header, values


def columns(header, values, prefix: str, what: str = "input") -> np.ndarray:
    """Columns ``prefix_1 .. prefix_d`` in order."""
    idx = []
    j = 1
    while f"{prefix}_{j}" in header:
        idx.append(header.index(f"{prefix}_{j}"))
        j += 1
    if not idx:
        raise ArtifactError(f"{what}: missing column {prefix}_1")
    return np.ascontiguousarray(values[:, idx])


def rank_sign_rows(ranksigns):
    d = ranksigns.d
    header = ["rank", *[f"sign_{j + 1}" for j in range(d)], *[f"image_{j + 1}" for j in range(d)]]
    rows = ([int(r), *s, *g] for r, s, g in zip(ranksigns.rank, ranksigns.sign, ranksigns.image))
    return header, rows


# ---------------------------------------------------------------------------
# model configuration


def _field(cfg: dict, key: str, where: str, default=...):
    if key in cfg:
        return cfg[key]
    if default is ...:
        raise ArtifactError(f"config field {where}{key!r} is required")
    return default


def reference_from_config(cfg, where: str = "f0"):
    if isinstance(cfg, str):
        cfg = {"name": cfg}
    if not isinstance(cfg, dict):
        raise ArtifactError(f"config field {where!r} must be a name or an object")
    try:
        return reference_from_dict(cfg)
    except (TypeError, ValueError, KeyError) as exc:
        raise ArtifactError(f"config field {where!r}: {exc}") from exc


def model_from_config(cfg: dict, base_dir=".") -> ModelSpec:
    """``{kind, d, f0, covariates?}``; ``covariates`` is a CSV path relative
    to ``base_dir`` (all columns used) or an inline list of rows."""
    kind = _field(cfg, "kind", "", "location")
    f0cfg = _field(cfg, "f0", "", "gaussian")
    if isinstance(f0cfg, str):
        f0cfg = {"name": f0cfg}
    if "d" in cfg:
        f0cfg = {**f0cfg, "d": cfg["d"]}
    f0 = reference_from_config(f0cfg)
    cov = cfg.get("covariates")
    if isinstance(cov, str):
        _, _, cov = read_csv(Path(base_dir) / cov, what="covariates")
    try:
        model = ModelSpec(kind, f0, None if cov is None else np.asarray(cov, dtype=float))
    except ValueError as exc:
        raise ArtifactError(f"config field 'kind'/'covariates': {exc}") from exc
    if "k" in cfg and int(cfg["k"]) != model.k:
        raise ArtifactError(f"config field 'k': {cfg['k']} does not match the model (k={model.k})")
    return model


def parse_vector(text, name: str, size: int | None = None) -> np.ndarray:
    if isinstance(text, (list, tuple, np.ndarray)):
        vals = np.asarray(text, dtype=float).reshape(-1)
    else:
        try:
            vals = np.array([float(t) for t in str(text).split(",") if t.strip()])
        except ValueError:
            raise ArtifactError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if size is not None and vals.size != size:
        raise ArtifactError(f"{name}: expected {size} values, got {vals.size}")
    if not np.all(np.isfinite(vals)):
        raise ArtifactError(f"{name}: values must be finite")
    return vals
