"""Domain channels, linear-pointer traversal and the visit log.

Centers are pooled into one channel per domain tag. A linear pointer walks
a channel's centers in order and either binds to each one (strong match)
or leaves a reference tag (weak visit). Each traversal is appended to a
:class:`SearchCycleLog` and folded into a :class:`VisitGraph`. Both are
immutable; :func:`record_cycle` returns new objects.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .catalog import normalize_text
from .centers import MetaCenter
from .cognate import RegressionWeights, score_tokens

DEFAULT_BIND_THRESHOLD = 80
ACTION_BIND = "bind"
ACTION_TAG = "tag"
GRAPH_FORMATS = ("dot", "structured")


@dataclass(frozen=True)
class DomainChannel:
    domain_label: str
    center_ids: tuple[str, ...]

    def to_record(self) -> dict:
        return {"domain_label": self.domain_label, "center_ids": list(self.center_ids)}

    @classmethod
    def from_record(cls, rec: dict) -> "DomainChannel":
        return cls(rec["domain_label"], tuple(rec["center_ids"]))


@dataclass(frozen=True)
class LinearPointer:
    id: str
    tokens: tuple[str, ...]
    bind_threshold: int = DEFAULT_BIND_THRESHOLD

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError(f"pointer {self.id!r} has an empty profile")
        if not 0 <= self.bind_threshold <= 100:
            raise ValueError(f"bind_threshold {self.bind_threshold} outside 0..100")

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    @classmethod
    def from_text(cls, pointer_id: str, raw: str, bind_threshold: int = DEFAULT_BIND_THRESHOLD) -> "LinearPointer":
        return cls(pointer_id, tuple(normalize_text(raw)), bind_threshold)


@dataclass(frozen=True)
class VisitRecord:
    pointer_id: str
    visited_node_id: str
    action: str
    score: int
    sequence_no: int

    def to_record(self) -> dict:
        return {
            "pointer_id": self.pointer_id,
            "visited_node_id": self.visited_node_id,
            "action": self.action,
            "score": self.score,
            "sequence_no": self.sequence_no,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "VisitRecord":
        return cls(rec["pointer_id"], rec["visited_node_id"], rec["action"], rec["score"], rec["sequence_no"])


Edge = tuple[str, str, str]
Mark = tuple[str, str, str]


@dataclass(frozen=True)
class VisitGraph:
    """Vertices are visited node ids and pointer ids.

    ``edges`` holds ``(from, to, pointer_id)`` for consecutive visits of one
    traversal; ``marks`` holds ``(node_id, pointer_id, action)`` per visit.
    """

    vertices: frozenset[str] = frozenset()
    edges: tuple[Edge, ...] = ()
    marks: tuple[Mark, ...] = ()

    @property
    def bindings(self) -> list[tuple[str, str]]:
        return sorted((node, ptr) for node, ptr, action in self.marks if action == ACTION_BIND)

    def to_record(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "edges": [list(e) for e in sorted(self.edges)],
            "marks": [list(m) for m in sorted(self.marks)],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "VisitGraph":
        return cls(
            frozenset(rec["vertices"]),
            tuple(tuple(e) for e in rec["edges"]),
            tuple(tuple(m) for m in rec["marks"]),
        )

    def canonical(self) -> "VisitGraph":
        return VisitGraph(self.vertices, tuple(sorted(self.edges)), tuple(sorted(self.marks)))


@dataclass(frozen=True)
class CycleEntry:
    cycle_no: int
    source_space_id: str
    target_space_id: str
    visit_records: tuple[VisitRecord, ...]

    def to_record(self) -> dict:
        return {
            "cycle_no": self.cycle_no,
            "source_space_id": self.source_space_id,
            "target_space_id": self.target_space_id,
            "visit_records": [v.to_record() for v in self.visit_records],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CycleEntry":
        return cls(
            rec["cycle_no"],
            rec["source_space_id"],
            rec["target_space_id"],
            tuple(VisitRecord.from_record(v) for v in rec["visit_records"]),
        )


@dataclass(frozen=True)
class SearchCycleLog:
    entries: tuple[CycleEntry, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def next_cycle_no(self) -> int:
        return self.entries[-1].cycle_no + 1 if self.entries else 1

    def to_records(self) -> list[dict]:
        return [e.to_record() for e in self.entries]

    @classmethod
    def from_records(cls, recs: Iterable[dict]) -> "SearchCycleLog":
        return cls(tuple(CycleEntry.from_record(r) for r in recs))


def pool_centers(centers: Iterable[MetaCenter], node_domains: Mapping[str, str]) -> list[DomainChannel]:
    """One channel per domain tag, ordered by label; center ids sorted within each."""
    groups: dict[str, list[str]] = defaultdict(list)
    for c in centers:
        try:
            groups[node_domains[c.node_id]].append(c.node_id)
        except KeyError:
            raise ValueError(f"center {c.node_id!r} has no domain tag") from None
    return [DomainChannel(label, tuple(sorted(ids))) for label, ids in sorted(groups.items())]


Scorer = Callable[[LinearPointer, str], int]


def make_scorer(nodes: Mapping[str, Sequence[str]], w: RegressionWeights | None = None) -> Scorer:
    """Scorer comparing a pointer's profile with a node's normalized tokens."""
    w = w or RegressionWeights()

    def scorer(pointer: LinearPointer, node_id: str) -> int:
        return score_tokens(pointer.tokens, nodes[node_id], w)

    return scorer


def traverse(pointer: LinearPointer, channel: DomainChannel, scorer: Scorer) -> list[VisitRecord]:
    visits = []
    for seq, node_id in enumerate(channel.center_ids, 1):
        score = scorer(pointer, node_id)
        action = ACTION_BIND if score >= pointer.bind_threshold else ACTION_TAG
        visits.append(VisitRecord(pointer.id, node_id, action, score, seq))
    return visits


def record_cycle(
    log: SearchCycleLog,
    graph: VisitGraph,
    source_space: str,
    target_space: str,
    visits: Sequence[VisitRecord],
) -> tuple[SearchCycleLog, VisitGraph]:
    """Append one traversal to the log and graph, returning the new pair."""
    visits = tuple(visits)
    if len({v.pointer_id for v in visits}) > 1:
        raise ValueError("visits must come from a single traversal")
    seqs = [v.sequence_no for v in visits]
    if any(b <= a for a, b in zip(seqs, seqs[1:])):
        raise ValueError("sequence numbers must be strictly increasing")

    entry = CycleEntry(log.next_cycle_no, source_space, target_space, visits)
    new_vertices = set(graph.vertices)
    if visits:
        new_vertices.add(visits[0].pointer_id)
        new_vertices.update(v.visited_node_id for v in visits)
    edges = tuple((a.visited_node_id, b.visited_node_id, a.pointer_id) for a, b in zip(visits, visits[1:]))
    marks = tuple((v.visited_node_id, v.pointer_id, v.action) for v in visits)
    return (
        SearchCycleLog(log.entries + (entry,)),
        VisitGraph(frozenset(new_vertices), graph.edges + edges, graph.marks + marks),
    )


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(graph: VisitGraph, format: str = "dot") -> str:
    """Serialize a visit graph; output depends only on the graph's contents."""
    if format == "structured":
        return json.dumps(graph.to_record(), indent=2, sort_keys=True) + "\n"
    if format != "dot":
        raise ValueError(f"unknown graph format {format!r}; expected one of {GRAPH_FORMATS}")
    bound = {(node, ptr) for node, ptr, action in graph.marks if action == ACTION_BIND}
    pointers = {ptr for _, ptr, _ in graph.marks}
    lines = ["digraph visits {"]
    for v in sorted(graph.vertices):
        shape = "box" if v in pointers else "ellipse"
        lines.append(f"  {_dot_quote(v)} [shape={shape}];")
    for src, dst, ptr in sorted(graph.edges):
        style = "bold" if (dst, ptr) in bound else "dashed"
        lines.append(f"  {_dot_quote(src)} -> {_dot_quote(dst)} [label={_dot_quote(ptr)}, style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_structured_graph(text: str) -> VisitGraph:
    return VisitGraph.from_record(json.loads(text))
