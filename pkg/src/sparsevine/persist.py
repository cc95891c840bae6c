"""Model files and delimited-text data.

Models are stored as JSON with an explicit format version.  Floats are
written with ``repr`` (shortest round-trip form), so loading a saved model
reproduces it exactly and saving it again gives the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .bicop import BicopModel
from .criteria import CriterionConfig
from .errors import DomainError, FormatError, InputError
from .fit import VineModel, tally_for
from .structure import RVineStructure, VineEdge, validate

__all__ = [
    "FORMAT_NAME",
    "FORMAT_VERSION",
    "Table",
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "loads_model",
    "save_model",
    "load_model",
    "read_table",
    "write_table",
]

FORMAT_NAME = "sparsevine-model"
FORMAT_VERSION = 1


def model_to_dict(model: VineModel, meta: dict | None = None) -> dict:
    trees = []
    for tree in model.structure.trees:
        rows = []
        for e in tree:
            pc = model.pair_copulas[e]
            tau = model.edge_taus.get(e)
            rows.append(
                {
                    "conditioned": list(e.conditioned),
                    "conditioning": list(e.conditioning),
                    "family": pc.family.value,
                    "rotation": pc.rotation,
                    "params": list(pc.params),
                    "loglik": pc.loglik,
                    "nobs": pc.nobs,
                    "at_boundary": pc.at_boundary,
                    "tau": tau,
                }
            )
        trees.append(rows)
    t = model.tally
    out = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "d": model.d,
        "criterion": {"kind": model.criterion.kind.value, "psi0": model.criterion.psi0},
        "threshold": model.threshold,
        "trunc_level": model.trunc_level,
        "nobs": t.nobs,
        "loglik": t.loglik,
        "npars": t.npars,
        "q_per_tree": list(t.q_per_tree),
        "bic": model.bic if t.nobs > 0 else None,
        "mbicv": model.mbicv if t.nobs > 0 else None,
        "trees": trees,
    }
    if meta:
        out["meta"] = meta
    return out


def _need(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{where}: missing field '{key}'")
    val = obj[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise FormatError(f"{where}: field '{key}' has the wrong type ({type(val).__name__})")
    return val


def model_from_dict(data: dict) -> tuple[VineModel, dict]:
    """Rebuild a model; returns it with the file's ``meta`` block."""
    if not isinstance(data, dict) or data.get("format") != FORMAT_NAME:
        raise FormatError("not a sparsevine model file")
    version = _need(data, "version", int, "model")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {version} (this build reads {FORMAT_VERSION})")
    d = _need(data, "d", int, "model")
    crit = _need(data, "criterion", dict, "model")
    try:
        criterion = CriterionConfig(_need(crit, "kind", str, "criterion"), _need(crit, "psi0", float, "criterion"))
    except ValueError as exc:
        raise FormatError(f"criterion: {exc}") from exc
    trees_raw = _need(data, "trees", list, "model")
    trees, pcs, taus = [], {}, {}
    for m, rows in enumerate(trees_raw, start=1):
        if not isinstance(rows, list):
            raise FormatError(f"tree {m}: expected a list of edges")
        edges = []
        for k, row in enumerate(rows):
            where = f"tree {m}, edge {k}"
            try:
                e = VineEdge(tuple(_need(row, "conditioned", list, where)), tuple(_need(row, "conditioning", list, where)))
                pc = BicopModel(
                    _need(row, "family", str, where),
                    _need(row, "rotation", int, where),
                    tuple(float(p) for p in _need(row, "params", list, where)),
                    nobs=_need(row, "nobs", int, where),
                    loglik=_need(row, "loglik", float, where),
                    at_boundary=_need(row, "at_boundary", bool, where),
                )
            except (ValueError, TypeError, DomainError) as exc:
                if isinstance(exc, FormatError):
                    raise
                raise FormatError(f"{where}: {exc}") from exc
            tau = row.get("tau")
            if tau is not None:
                if not isinstance(tau, (int, float)) or isinstance(tau, bool) or not -1.0 <= tau <= 1.0:
                    raise FormatError(f"{where}: tau must be a number in [-1, 1]")
                taus[e] = float(tau)
            edges.append(e)
            pcs[e] = pc
        trees.append(tuple(edges))
    try:
        structure = RVineStructure(d, tuple(trees))
    except DomainError as exc:
        raise FormatError(f"structure: {exc}") from exc
    report = validate(structure)
    if not report.valid or not structure.is_complete:
        raise FormatError("invalid structure: " + "; ".join(report.violations or ("incomplete tree sequence",)))
    nobs = _need(data, "nobs", int, "model")
    loglik = _need(data, "loglik", float, "model")
    tally = tally_for(structure, pcs, loglik, nobs)
    if list(tally.q_per_tree) != data.get("q_per_tree") or tally.npars != data.get("npars"):
        raise FormatError("stored parameter counts do not match the pair-copulas")
    threshold = _need(data, "threshold", float, "model")
    trunc = _need(data, "trunc_level", int, "model")
    if not (threshold >= 0.0 and math.isfinite(threshold)) or not 0 <= trunc <= d - 1:
        raise FormatError("threshold or truncation level out of range")
    model = VineModel(structure, pcs, threshold, trunc, tally, taus, criterion)
    meta = data.get("meta") or {}
    if not isinstance(meta, dict):
        raise FormatError("meta must be an object")
    return model, meta


def dumps_model(model: VineModel, meta: dict | None = None) -> str:
    return json.dumps(model_to_dict(model, meta), indent=1, allow_nan=False) + "\n"


def loads_model(text: str) -> tuple[VineModel, dict]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(data)


def save_model(model: VineModel, path, meta: dict | None = None) -> None:
    Path(path).write_text(dumps_model(model, meta))


def load_model(path) -> tuple[VineModel, dict]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from exc
    return loads_model(text)


# ---------------------------------------------------------------------------
# Delimited text
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Table:
    """Numeric columns with names and, optionally, a leading label column."""

    names: tuple[str, ...]
    values: np.ndarray
    labels: tuple[str, ...] | None = None


def read_table(source, label_column: bool = False) -> Table:
    """Read comma-separated text with a header row.

    Lines starting with ``#`` are skipped.  With ``label_column`` the first
    column (dates, say) is kept as text.  Errors name the offending line
    and column.
    """
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc}") from exc
    else:
        text = source.read()
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1) if r and not r[0].startswith("#")]
    if not rows:
        raise FormatError("input is empty")
    (_, header), body = rows[0], rows[1:]
    header = [h.strip() for h in header]
    first = 1 if label_column else 0
    names = tuple(header[first:])
    if not names:
        raise FormatError("header has no data columns")
    width = len(header)
    values = np.empty((len(body), len(names)))
    labels = []
    for r, (line, row) in enumerate(body):
        if len(row) != width:
            raise FormatError(f"line {line}: expected {width} fields, found {len(row)}")
        if label_column:
            labels.append(row[0].strip())
        for c in range(first, width):
            try:
                values[r, c - first] = float(row[c])
            except ValueError:
                raise FormatError(f"line {line}, column {c + 1} ('{header[c]}'): not a number: {row[c]!r}") from None
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        r, c = bad[0]
        raise InputError(f"line {body[r][0]}, column {c + 1 + first} ('{names[c]}'): non-finite value")
    return Table(names, values, tuple(labels) if label_column else None)


def write_table(fh: TextIO, names: Sequence[str], values: np.ndarray, comments: Sequence[str] = ()) -> None:
    """Comma-separated text; floats in shortest round-trip form."""
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write(",".join(names) + "\n")
    for row in np.asarray(values, dtype=float).tolist():
        fh.write(",".join(repr(x) for x in row) + "\n")
