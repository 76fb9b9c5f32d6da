"""Result records, their CSV/JSON encodings, and the content-addressed store."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .errors import SchemaError

SCHEMA_VERSION = 1

SCHEMAS: dict[str, list[tuple[str, type]]] = {
    "sieve": [("table", str), ("N", int), ("minus", int), ("zero", int), ("plus", int),
              ("sha256", str)],
    "corr": [("table", str), ("shifts", str), ("N", int), ("avg", str), ("alpha", str),
             ("re", float), ("im", float), ("abs", float)],
    "tao": [("table", str), ("shifts", str), ("N", int), ("prime_cutoff", int),
            ("weighting", str), ("direct", float), ("dilated", float), ("sign", int),
            ("residual", float), ("prime_hash", str)],
    "cylinder": [("table", str), ("N", int), ("avg", str), ("half_width", int), ("word", str),
                 ("frequency", float), ("mass", float)],
    "complexity": [("table", str), ("N", int), ("n", int), ("P", int), ("ratio", float),
                   ("right_special", int), ("left_special", int)],
    "gowers": [("table", str), ("N", int), ("k", int), ("value", float), ("samples", int)],
    "nilap": [("name", str), ("j", int), ("value", str)],
    "dynamics": [("mode", str), ("r", int), ("m", int), ("N", int), ("prime_cutoff", int),
                 ("value_re", float), ("value_im", float), ("ref_re", float), ("ref_im", float),
                 ("difference", float), ("bound", float)],
}


def params_hash(params: dict) -> str:
    return hashlib.sha256(canonical_json(params).encode()).hexdigest()


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ResultRecord:
    kind: str
    payload: dict
    provenance: str

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(f"unknown record kind {self.kind!r}")
        want = [name for name, _ in SCHEMAS[self.kind]]
        if sorted(self.payload) != sorted(want):
            raise SchemaError(f"{self.kind} payload fields {sorted(self.payload)} != {sorted(want)}")
        for name, typ in SCHEMAS[self.kind]:
            v = self.payload[name]
            if typ is float and isinstance(v, int) and not isinstance(v, bool):
                self.payload[name] = float(v)
            elif not isinstance(v, typ) or (typ is int and isinstance(v, bool)):
                raise SchemaError(f"{self.kind}.{name} should be {typ.__name__}, got {v!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "provenance": self.provenance}


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_csv(records: list[ResultRecord], path: Path) -> None:
    if not records:
        Path(path).write_text("")
        return
    kind = records[0].kind
    cols = [name for name, _ in SCHEMAS[kind]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols + ["provenance"])
    for r in records:
        if r.kind != kind:
            raise SchemaError("one CSV file holds one record kind")
        w.writerow([_fmt(r.payload[c]) for c in cols] + [r.provenance])
    Path(path).write_text(buf.getvalue())


def read_csv(path: Path, kind: str) -> list[ResultRecord]:
    text = Path(path).read_text()
    if not text:
        return []
    rows = list(csv.reader(io.StringIO(text)))
    schema = SCHEMAS[kind]
    cols = [name for name, _ in schema] + ["provenance"]
    if rows[0] != cols:
        raise SchemaError(f"CSV header {rows[0]} does not match the {kind} schema")
    out = []
    for row in rows[1:]:
        payload = {name: typ(v) for (name, typ), v in zip(schema, row)}
        out.append(ResultRecord(kind, payload, row[-1]))
    return out


def write_json(records: list[ResultRecord], path: Path) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "records": [r.to_json() for r in records]}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_json(path: Path) -> list[ResultRecord]:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"schema version {doc.get('schema_version')} != {SCHEMA_VERSION}")
    return [ResultRecord(r["kind"], r["payload"], r["provenance"]) for r in doc["records"]]


class ResultStore:
    """Memo of expensive scalar results keyed by a hash of their parameters."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)

    def _path(self, key: dict) -> Path:
        return self.directory / f"{params_hash(key)}.json"

    def get(self, key: dict) -> dict | None:
        p = self._path(key)
        if not p.exists():
            return None
        doc = json.loads(p.read_text())
        return doc["value"] if doc.get("key") == key else None

    def put(self, key: dict, value: dict) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self._path(key)
        tmp = p.with_name(p.name + f".{os.getpid()}.tmp")
        tmp.write_text(json.dumps({"key": key, "value": value}, sort_keys=True))
        os.replace(tmp, p)

    def memo(self, key: dict, compute) -> dict:
        hit = self.get(key)
        if hit is not None:
            return hit
        value = compute()
        self.put(key, value)
        return value


def records_from(kind: str, payloads: Iterable[dict], params: dict) -> list[ResultRecord]:
    prov = params_hash(params)
    return [ResultRecord(kind, dict(p), prov) for p in payloads]
