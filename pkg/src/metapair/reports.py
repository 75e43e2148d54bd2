"""Report serialization: JSON and CSV writers plus matching readers.

All output is UTF-8 with LF line endings. JSON keys are sorted so equal
inputs produce equal bytes.
"""
from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path
from typing import Any, Iterable, Sequence

from .catalog import MetadataRecord
from .cognate import SimilarityTriple

TRIPLE_FIELDS = ("source", "target", "percent")
EVIDENCE_FIELDS = ("dataset_a", "dataset_b", "max_percent", "strong_pairs", "connected")
CENTER_FIELDS = ("collection_id", "node_id", "cost", "method")

_INT_FIELDS = {"percent", "max_percent", "strong_pairs"}
_FLOAT_FIELDS = {"cost"}
_BOOL_FIELDS = {"connected"}


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dumps_csv(records: Iterable[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: (str(v).lower() if isinstance(v, bool) else v) for k, v in rec.items()})
    return buf.getvalue()


def loads_csv(text: str) -> list[dict]:
    """Parse a CSV report back into typed records."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        rec: dict[str, Any] = {}
        for k, v in row.items():
            if k in _INT_FIELDS:
                rec[k] = int(v)
            elif k in _FLOAT_FIELDS:
                rec[k] = float(v)
            elif k in _BOOL_FIELDS:
                rec[k] = v == "true"
            else:
                rec[k] = v
        out.append(rec)
    return out


def safe_filename(name: str) -> str:
    return re.sub(r"[^\w.-]+", "_", name) or "_"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_records(out_dir: Path, stem: str, records: list[dict], fields: Sequence[str], fmt: str) -> Path:
    """Write tabular records as ``stem.csv`` when ``fmt == "csv"``, else ``stem.json``."""
    if fmt == "csv":
        return write_text(out_dir / f"{stem}.csv", dumps_csv(records, fields))
    return write_text(out_dir / f"{stem}.json", dumps_json(records))


def read_records(path: Path) -> list[dict]:
    text = Path(path).read_text(encoding="utf-8")
    if Path(path).suffix == ".csv":
        return loads_csv(text)
    return json.loads(text)


def pair_matrix_csv(a: MetadataRecord, b: MetadataRecord, triples: Sequence[SimilarityTriple]) -> str:
    """``|a| x |b|`` percent table from the triples of one matched pair.

    Rows are ``a``'s columns, columns are ``b``'s, both by qualified name.
    """
    lookup = {(t.source_column, t.target_column): t.percent for t in triples}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["", *(c.qualified_name for c in b.columns)])
    for ca in a.columns:
        writer.writerow([ca.qualified_name, *(lookup[(ca.qualified_name, cb.qualified_name)] for cb in b.columns)])
    return buf.getvalue()


def render_table(a: MetadataRecord, b: MetadataRecord, triples: Sequence[SimilarityTriple]) -> str:
    """Plain-text grid of the pair matrix for terminal display."""
    lookup = {(t.source_column, t.target_column): t.percent for t in triples}
    head = [""] + [c.name for c in b.columns]
    rows = [[ca.name] + [str(lookup[(ca.qualified_name, cb.qualified_name)]) for cb in b.columns] for ca in a.columns]
    widths = [max(len(r[i]) for r in [head, *rows]) for i in range(len(head))]

    def fmt(r: list[str]) -> str:
        return "  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(r, widths)))

    return "\n".join([fmt(head), *map(fmt, rows)]) + "\n"
