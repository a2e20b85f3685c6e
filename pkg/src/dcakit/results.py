"""Result serialization: CSV and JSONL, byte-stable.

Rendering is a pure function of the result object. Floats are written
with ``repr`` (shortest round-trip form), comment/meta lines come in a
fixed order, and aggregates are recomputed from the records, so
emit -> parse -> emit reproduces the file byte for byte.

CSV layout: ``#`` comment preamble (schema version, mode, generator
metadata, the effective config), a header row, one row per record,
then one ``# aggregate`` comment line per summary group.

JSONL layout: a ``meta`` object line, one ``record`` line per record,
then ``aggregate`` lines. The record count of a file is the number of
``kind == "record"`` lines.

Accuracy-mode rows deliberately carry no wall-clock columns: measured
times would break byte-level reproducibility of re-runs. Timing-mode
rows consist of measurements, so only their structure is reproducible.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .errors import DataError
from .experiments import ExperimentResult, RunRecord

__all__ = ["FORMATS", "render_results", "emit_results", "parse_results"]

FORMATS = ("csv", "jsonl")

_ACCURACY_FIELDS = ("method", "distribution_seed", "repetition",
                    "n_institutions", "anchor_rows", "collab_dim",
                    "intermediate_dims", "accuracy", "error")
_TIMING_FIELDS = ("method", "distribution_seed", "n_institutions",
                  "anchor_rows", "collab_dim", "intermediate_dims",
                  "build_ms", "solve_ms", "total_ms", "error")

_INT_FIELDS = {"distribution_seed", "repetition", "n_institutions",
               "anchor_rows", "collab_dim"}
_FLOAT_FIELDS = {"accuracy", "build_ms", "solve_ms", "total_ms"}


def _fields(mode: str) -> tuple[str, ...]:
    return _ACCURACY_FIELDS if mode == "accuracy" else _TIMING_FIELDS


def _record_value(record: RunRecord, field: str):
    if field == "total_ms":
        return record.collab_ms
    return getattr(record, field)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "|".join(str(v) for v in value)
    return str(value)


def _aggregate_line(entry: dict) -> str:
    parts = [f"{k}={_cell(v) if v is not None else 'na'}"
             for k, v in entry.items()]
    return "# aggregate " + " ".join(parts)


def _render_csv(result: ExperimentResult) -> str:
    lines = [
        f"# schema_version={result.schema_version}",
        f"# mode={result.mode}",
    ]
    lines += [f"# {k}={v}" for k, v in result.metadata]
    lines += [f"# config.{k}={v}" for k, v in result.config_items]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    fields = _fields(result.mode)
    writer.writerow(fields)
    for record in result.records:
        writer.writerow([_cell(_record_value(record, f)) for f in fields])
    body = buf.getvalue()
    tail = "".join(_aggregate_line(e) + "\n" for e in result.aggregates())
    return "\n".join(lines) + "\n" + body + tail


def _record_json(record: RunRecord, fields: tuple[str, ...]) -> dict:
    out: dict = {"kind": "record"}
    for f in fields:
        value = _record_value(record, f)
        out[f] = list(value) if isinstance(value, tuple) else value
    return out


def _render_jsonl(result: ExperimentResult) -> str:
    meta = {
        "kind": "meta",
        "schema_version": result.schema_version,
        "mode": result.mode,
        "metadata": dict(result.metadata),
        "config": dict(result.config_items),
    }
    fields = _fields(result.mode)
    lines = [json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    for record in result.records:
        lines.append(json.dumps(_record_json(record, fields), sort_keys=True,
                                separators=(",", ":")))
    for entry in result.aggregates():
        obj = {"kind": "aggregate", **entry}
        lines.append(json.dumps(obj, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def render_results(result: ExperimentResult, format: str) -> str:
    """Render a result to text in the given format."""
    if format == "csv":
        return _render_csv(result)
    if format == "jsonl":
        return _render_jsonl(result)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def emit_results(result: ExperimentResult, format: str, path) -> None:
    """Write a result file. Re-emitting the same result is byte-identical."""
    Path(path).write_text(render_results(result, format), encoding="utf-8")


def _parse_cell(field: str, text: str):
    if text == "":
        return None
    if field in _INT_FIELDS:
        return int(text)
    if field in _FLOAT_FIELDS:
        return float(text)
    if field == "intermediate_dims":
        return tuple(int(p) for p in text.split("|"))
    return text


def _record_from_values(mode: str, values: dict) -> RunRecord:
    total = values.pop("total_ms", None)
    if mode == "timing":
        values["collab_ms"] = total
        values["repetition"] = None
    return RunRecord(**values)


def _parse_csv(text: str) -> ExperimentResult:
    schema_version = None
    mode = None
    metadata: list[tuple[str, str]] = []
    config_items: list[tuple[str, str]] = []
    data_lines: list[str] = []
    for line in text.splitlines():
        if line.startswith("# aggregate "):
            continue  # recomputed from records
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            if key == "schema_version":
                schema_version = int(value)
            elif key == "mode":
                mode = value
            elif key.startswith("config."):
                config_items.append((key[len("config."):], value))
            else:
                metadata.append((key, value))
            continue
        if line:
            data_lines.append(line)
    if mode not in ("accuracy", "timing") or schema_version is None:
        raise DataError("result file lacks mode or schema_version metadata")
    rows = list(csv.reader(data_lines))
    if not rows or tuple(rows[0]) != _fields(mode):
        raise DataError("result file header does not match its mode")
    records = []
    for row in rows[1:]:
        values = {f: _parse_cell(f, cell) for f, cell in zip(_fields(mode), row)}
        records.append(_record_from_values(mode, values))
    return ExperimentResult(mode=mode, config_items=tuple(config_items),
                            metadata=tuple(metadata), records=tuple(records),
                            schema_version=schema_version)


def _parse_jsonl(text: str) -> ExperimentResult:
    meta = None
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON: {exc}") from None
        kind = obj.get("kind")
        if kind == "meta":
            meta = obj
        elif kind == "record":
            records.append(obj)
        elif kind == "aggregate":
            continue
        else:
            raise DataError(f"line {lineno}: unknown kind {kind!r}")
    if meta is None:
        raise DataError("result file has no meta line")
    mode = meta.get("mode")
    if mode not in ("accuracy", "timing"):
        raise DataError(f"unknown mode {mode!r} in meta line")
    parsed = []
    for obj in records:
        values = {}
        for f in _fields(mode):
            value = obj.get(f)
            if f == "intermediate_dims" and value is not None:
                value = tuple(value)
            values[f] = value
        parsed.append(_record_from_values(mode, values))
    return ExperimentResult(
        mode=mode,
        config_items=tuple(meta.get("config", {}).items()),
        metadata=tuple(meta.get("metadata", {}).items()),
        records=tuple(parsed),
        schema_version=int(meta["schema_version"]),
    )


def parse_results(text: str, format: str) -> ExperimentResult:
    """Parse result text back into an ``ExperimentResult``."""
    if format == "csv":
        return _parse_csv(text)
    if format == "jsonl":
        return _parse_jsonl(text)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
