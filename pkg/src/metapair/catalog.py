"""Dataset ingestion and metadata profiling.

Reads delimited text files (first row = header) plus an optional JSON
sidecar and produces :class:`MetadataRecord` objects, the normalized input
for every later stage.
"""
from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

TYPE_INTEGER = "integer"
TYPE_DECIMAL = "decimal"
TYPE_DATE = "date"
TYPE_BOOLEAN = "boolean"
TYPE_TEXT = "text"
TYPE_UNKNOWN = "unknown"

# Precedence when a cell parses as several types; earlier wins.
TYPE_PRECEDENCE = (TYPE_INTEGER, TYPE_DECIMAL, TYPE_DATE, TYPE_BOOLEAN, TYPE_TEXT)

BOOLEAN_LEXICON = frozenset({"yes", "no", "true", "false", "0", "1"})

DATE_FORMATS = (
    "%Y-%m-%d",
    "%Y/%m/%d",
    "%d/%m/%Y",
    "%m/%d/%Y",
    "%d-%m-%Y",
    "%d.%m.%Y",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m",
)

STOPWORDS = frozenset({"a", "an", "and", "by", "for", "in", "of", "on", "or", "per", "the", "to"})

SIDECAR_SUFFIX = ".meta.json"
SIDECAR_KEYS = ("domain_tags", "description", "administrative")

_INTEGER_RE = re.compile(r"[+-]?\d+")
_DECIMAL_RE = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
_TOKEN_RE = re.compile(r"[^\W_]+")


class CatalogError(Exception):
    """Raised when a dataset or sidecar cannot be loaded."""


class MetadataKind(str, Enum):
    ADMINISTRATIVE = "administrative"
    STRUCTURAL = "structural"
    DESCRIPTIVE = "descriptive"


@dataclass(frozen=True)
class DatasetRef:
    id: str
    path: str
    row_count: int

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("dataset id must be nonempty")
        if self.row_count < 0:
            raise ValueError(f"row_count must be >= 0, got {self.row_count}")


@dataclass(frozen=True)
class ColumnDescriptor:
    dataset_id: str
    name: str
    norm_tokens: tuple[str, ...]
    inferred_type: str = TYPE_UNKNOWN
    null_fraction: float = 0.0

    @property
    def qualified_name(self) -> str:
        return f"{self.dataset_id}.{self.name}"

    @property
    def joined(self) -> str:
        """Normalized tokens joined by single spaces."""
        return " ".join(self.norm_tokens)


@dataclass(frozen=True)
class MetadataRecord:
    dataset: DatasetRef
    columns: tuple[ColumnDescriptor, ...]
    kinds: Mapping[MetadataKind, tuple[str, ...]] = field(default_factory=dict)
    domain_tags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.columns:
            raise ValueError(f"dataset {self.dataset.id!r} has no columns")
        for col in self.columns:
            if col.dataset_id != self.dataset.id:
                raise ValueError(
                    f"column {col.name!r} belongs to {col.dataset_id!r}, not {self.dataset.id!r}"
                )

    @property
    def description(self) -> str:
        return " ".join(self.kinds.get(MetadataKind.DESCRIPTIVE, ()))

    def to_manifest_entry(self) -> dict:
        return {
            "id": self.dataset.id,
            "path": self.dataset.path,
            "row_count": self.dataset.row_count,
            "column_count": len(self.columns),
            "columns": [
                {
                    "name": c.name,
                    "tokens": list(c.norm_tokens),
                    "type": c.inferred_type,
                    "null_fraction": c.null_fraction,
                }
                for c in self.columns
            ],
            "domain_tags": sorted(self.domain_tags),
            "kinds": {k.value: list(v) for k, v in sorted(self.kinds.items(), key=lambda kv: kv[0].value)},
        }


def normalize_text(raw: str, stopwords: Iterable[str] | None = None) -> list[str]:
    """Lowercase ``raw`` and split it on every non-alphanumeric character.

    >>> normalize_text("UK-Road  Safety 2016")
    ['uk', 'road', 'safety', '2016']
    """
    tokens = _TOKEN_RE.findall(raw.lower())
    if stopwords:
        drop = set(stopwords)
        tokens = [t for t in tokens if t not in drop]
    return tokens


def _is_date(cell: str) -> bool:
    for fmt in DATE_FORMATS:
        try:
            datetime.strptime(cell, fmt)
        except ValueError:
            continue
        return True
    return False


def classify_cell(cell: str) -> str:
    """Return the highest-precedence type that ``cell`` parses as."""
    cell = cell.strip()
    if _INTEGER_RE.fullmatch(cell):
        return TYPE_INTEGER
    if _DECIMAL_RE.fullmatch(cell):
        return TYPE_DECIMAL
    if _is_date(cell):
        return TYPE_DATE
    if cell.lower() in BOOLEAN_LEXICON:
        return TYPE_BOOLEAN
    return TYPE_TEXT


def profile_column(values: Sequence[str]) -> tuple[str, float]:
    """Infer a column type by majority vote over non-null cells.

    Each non-null cell votes for the first type it parses as in
    ``TYPE_PRECEDENCE``. A tie for the top vote gives ``unknown``.
    Returns ``(inferred_type, null_fraction)``.
    """
    total = len(values)
    if total == 0:
        return TYPE_UNKNOWN, 0.0
    present = [v for v in values if v.strip()]
    null_fraction = (total - len(present)) / total
    if not present:
        return TYPE_UNKNOWN, null_fraction
    votes = Counter(classify_cell(v) for v in present).most_common()
    if len(votes) > 1 and votes[0][1] == votes[1][1]:
        return TYPE_UNKNOWN, null_fraction
    return votes[0][0], null_fraction


def sidecar_path_for(path: Path) -> Path:
    return path.with_name(path.stem + SIDECAR_SUFFIX)


def read_sidecar(path: Path) -> dict:
    """Parse a sidecar file, keeping only the recognised keys."""
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CatalogError(f"missing sidecar: {path}") from None
    except json.JSONDecodeError as exc:
        raise CatalogError(f"malformed sidecar {path}: {exc}") from None
    if not isinstance(data, dict):
        raise CatalogError(f"sidecar {path} must hold a key-value object")
    unknown = sorted(set(data) - set(SIDECAR_KEYS))
    if unknown:
        logger.warning("sidecar %s: ignoring unknown keys %s", path, unknown)
    tags = data.get("domain_tags", [])
    if isinstance(tags, str):
        tags = [tags]
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise CatalogError(f"sidecar {path}: domain_tags must be a list of strings")
    out: dict = {"domain_tags": frozenset(t.strip().lower() for t in tags if t.strip())}
    for key in ("description", "administrative"):
        value = data.get(key)
        if value is None:
            continue
        if not isinstance(value, str):
            raise CatalogError(f"sidecar {path}: {key} must be text")
        out[key] = value
    return out


def load_dataset(
    path: str | Path,
    id: str,
    sidecar: str | Path | None = None,
    delimiter: str = ",",
    remove_stopwords: bool = False,
) -> tuple[DatasetRef, MetadataRecord]:
    """Load one delimited file and profile its header and columns.

    When ``sidecar`` is None, a sibling ``<stem>.meta.json`` is used if it
    exists.
    """
    path = Path(path)
    if not path.is_file():
        raise CatalogError(f"missing file: {path}")
    try:
        with path.open(newline="", encoding="utf-8-sig") as fh:
            rows = [row for row in csv.reader(fh, delimiter=delimiter) if row]
    except UnicodeDecodeError as exc:
        raise CatalogError(f"{path} is not valid UTF-8: {exc}") from None
    if not rows:
        raise CatalogError(f"empty file: {path}")

    header, body = rows[0], rows[1:]
    dupes = sorted(name for name, n in Counter(header).items() if n > 1)
    if dupes:
        raise CatalogError(f"duplicate column names in {path}: {', '.join(map(repr, dupes))}")

    stop = STOPWORDS if remove_stopwords else None
    columns = []
    for idx, name in enumerate(header):
        values = [row[idx] if idx < len(row) else "" for row in body]
        inferred, nulls = profile_column(values)
        columns.append(
            ColumnDescriptor(
                dataset_id=id,
                name=name,
                norm_tokens=tuple(normalize_text(name, stop)),
                inferred_type=inferred,
                null_fraction=nulls,
            )
        )

    ref = DatasetRef(id=id, path=str(path), row_count=len(body))
    kinds: dict[MetadataKind, tuple[str, ...]] = {
        MetadataKind.STRUCTURAL: tuple(f"{c.name}: {c.inferred_type}" for c in columns),
    }
    tags: frozenset[str] = frozenset()

    if sidecar is None:
        candidate = sidecar_path_for(path)
        sidecar = candidate if candidate.is_file() else None
    if sidecar is not None:
        meta = read_sidecar(Path(sidecar))
        tags = meta["domain_tags"]
        if "description" in meta:
            kinds[MetadataKind.DESCRIPTIVE] = (meta["description"],)
        if "administrative" in meta:
            kinds[MetadataKind.ADMINISTRATIVE] = (meta["administrative"],)

    record = MetadataRecord(dataset=ref, columns=tuple(columns), kinds=kinds, domain_tags=tags)
    return ref, record


def dataset_id_for(path: str | Path, taken: Iterable[str] = ()) -> str:
    """Derive a catalog id from a file stem, suffixing ``-2``, ``-3``... on clashes."""
    base = re.sub(r"[^\w-]+", "_", Path(path).stem).strip("_") or "dataset"
    taken = set(taken)
    candidate, n = base, 1
    while candidate in taken:
        n += 1
        candidate = f"{base}-{n}"
    return candidate


@dataclass
class LoadResult:
    records: list[MetadataRecord]
    errors: list[tuple[str, str]]

    @property
    def ok(self) -> bool:
        return not self.errors


def load_catalog(paths: Iterable[str | Path], delimiter: str = ",", remove_stopwords: bool = False) -> LoadResult:
    """Load many files, collecting per-file errors instead of stopping."""
    records: list[MetadataRecord] = []
    errors: list[tuple[str, str]] = []
    for p in paths:
        ds_id = dataset_id_for(p, (r.dataset.id for r in records))
        try:
            _, rec = load_dataset(p, ds_id, delimiter=delimiter, remove_stopwords=remove_stopwords)
        except CatalogError as exc:
            logger.error("%s", exc)
            errors.append((str(p), str(exc)))
            continue
        records.append(rec)
    return LoadResult(records, errors)
