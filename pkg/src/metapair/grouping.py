"""Similarity matrices over metadata nodes and single-link threshold clustering."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .catalog import ColumnDescriptor, MetadataRecord, normalize_text
from .cognate import RegressionWeights, score_tokens

DEFAULT_TAU = 75

KIND_COLUMN = "column"
KIND_TEXT = "text"


@dataclass(frozen=True)
class MetaNode:
    id: str
    tokens: tuple[str, ...]
    kind: str = KIND_COLUMN

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    @property
    def dataset_id(self) -> str:
        return self.id.split(".", 1)[0]

    @classmethod
    def from_column(cls, col: ColumnDescriptor) -> "MetaNode":
        return cls(col.qualified_name, tuple(col.norm_tokens), KIND_COLUMN)

    @classmethod
    def from_text(cls, node_id: str, raw: str) -> "MetaNode":
        return cls(node_id, tuple(normalize_text(raw)), KIND_TEXT)


def nodes_for_record(md: MetadataRecord, include_descriptions: bool = False) -> list[MetaNode]:
    nodes = [MetaNode.from_column(c) for c in md.columns]
    if include_descriptions and md.description:
        desc_id = f"{md.dataset.id}.desc"
        if any(n.id == desc_id for n in nodes):
            raise ValueError(f"{desc_id!r} clashes with a column of the same name")
        nodes.append(MetaNode.from_text(desc_id, md.description))
    return nodes


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric percent matrix; ``cells[i, j]`` scores ``node_ids[i]`` vs ``node_ids[j]``."""

    node_ids: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.node_ids)
        if len(set(self.node_ids)) != n:
            raise ValueError("node ids must be unique")
        if self.cells.shape != (n, n):
            raise ValueError(f"cells shape {self.cells.shape} does not match {n} node ids")
        if not np.array_equal(self.cells, self.cells.T):
            raise ValueError("similarity matrix must be symmetric")
        if n and (self.cells.min() < 0 or self.cells.max() > 100):
            raise ValueError("cells must lie in 0..100")
        self.cells.setflags(write=False)
        object.__setattr__(self, "_index", {nid: i for i, nid in enumerate(self.node_ids)})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimilarityMatrix):
            return NotImplemented
        return self.node_ids == other.node_ids and np.array_equal(self.cells, other.cells)

    def index(self, node_id: str) -> int:
        return self._index[node_id]

    def cell(self, a: str, b: str) -> int:
        return int(self.cells[self._index[a], self._index[b]])

    def row(self, node_id: str) -> dict[str, int]:
        i = self._index[node_id]
        return {nid: int(v) for nid, v in zip(self.node_ids, self.cells[i])}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["", *self.node_ids])
        for nid, row in zip(self.node_ids, self.cells):
            writer.writerow([nid, *(int(v) for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SimilarityMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        ids = tuple(rows[0][1:])
        cells = np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=np.int64).reshape(len(ids), len(ids))
        if tuple(r[0] for r in rows[1:]) != ids:
            raise ValueError("row labels do not match column labels")
        return cls(ids, cells)


def build_similarity_matrix(nodes: Sequence[MetaNode], w: RegressionWeights | None = None) -> SimilarityMatrix:
    if not nodes:
        raise ValueError("need at least one node")
    w = w or RegressionWeights()
    n = len(nodes)
    cells = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        cells[i, i] = score_tokens(nodes[i].tokens, nodes[i].tokens, w)
        for j in range(i + 1, n):
            cells[i, j] = cells[j, i] = score_tokens(nodes[i].tokens, nodes[j].tokens, w)
    return SimilarityMatrix(tuple(nd.id for nd in nodes), cells)


@dataclass(frozen=True)
class MetaCollection:
    id: str
    member_ids: frozenset[str]
    space_id: str

    def __post_init__(self) -> None:
        if not self.member_ids:
            raise ValueError(f"collection {self.id!r} is empty")

    def to_record(self) -> dict:
        return {"id": self.id, "space_id": self.space_id, "members": sorted(self.member_ids)}

    @classmethod
    def from_record(cls, rec: dict) -> "MetaCollection":
        return cls(rec["id"], frozenset(rec["members"]), rec["space_id"])


def _canonical(groups: Iterable[Iterable[str]], space_id: str) -> list[MetaCollection]:
    # Order by smallest member so ids depend only on the partition itself.
    ordered = sorted((frozenset(g) for g in groups), key=min)
    prefix = f"{space_id}/" if space_id else ""
    return [MetaCollection(f"{prefix}X{k}", g, space_id) for k, g in enumerate(ordered, 1)]


class _DisjointSet:
    def __init__(self, items: Iterable[str]) -> None:
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self) -> list[list[str]]:
        out: dict[str, list[str]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def threshold_cluster(matrix: SimilarityMatrix, tau: int = DEFAULT_TAU, space_id: str = "") -> list[MetaCollection]:
    """Connected components of the graph with an edge wherever a cell is >= ``tau``."""
    ids = matrix.node_ids
    ds = _DisjointSet(ids)
    rows, cols = np.nonzero(np.triu(matrix.cells >= tau, k=1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        ds.union(ids[i], ids[j])
    return _canonical(ds.groups(), space_id)


def stream_insert(
    collections: Sequence[MetaCollection],
    node: MetaNode | str,
    row: Mapping[str, int],
    tau: int = DEFAULT_TAU,
    space_id: str = "",
) -> list[MetaCollection]:
    """Add one node to an existing clustering.

    ``row`` maps already-present node ids to their score against the new
    node. The node absorbs every collection it reaches at ``tau``; those
    collections merge. The result is independent of arrival order and
    matches :func:`threshold_cluster` on the full matrix.
    """
    node_id = getattr(node, "id", node)
    if any(node_id in c.member_ids for c in collections):
        raise ValueError(f"node {node_id!r} already clustered")
    merged = {node_id}
    keep = []
    for coll in collections:
        if any(row.get(m, 0) >= tau for m in coll.member_ids):
            merged |= coll.member_ids
        else:
            keep.append(coll.member_ids)
    return _canonical([*keep, merged], space_id)
