"""Domain divider: split metadata nodes into disjoint search spaces.

Datasets get domain tags (from the sidecar, or by keyword lexicon), nodes
inherit them, and each node lands in the space of its primary tag (the
lexicographically smallest one). Bulking IDs then group each dataset
under a single space.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .catalog import MetadataRecord, normalize_text

UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class SearchSpace:
    id: str
    members: frozenset[str]
    domain_label: str

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError(f"search space {self.id!r} has no members")

    def to_record(self) -> dict:
        return {"id": self.id, "domain_label": self.domain_label, "members": sorted(self.members)}

    @classmethod
    def from_record(cls, rec: dict) -> "SearchSpace":
        return cls(rec["id"], frozenset(rec["members"]), rec["domain_label"])


@dataclass(frozen=True)
class BulkingId:
    value: str
    dataset_ids: frozenset[str]

    def to_record(self) -> dict:
        return {"value": self.value, "dataset_ids": sorted(self.dataset_ids)}

    @classmethod
    def from_record(cls, rec: dict) -> "BulkingId":
        return cls(rec["value"], frozenset(rec["dataset_ids"]))


def load_lexicon(path: str | Path | None = None) -> dict[str, frozenset[str]]:
    """Read a ``{domain: [keyword, ...]}`` JSON file; the bundled one by default.

    Keywords are normalized the same way as column names.
    """
    if path is None:
        text = resources.files("metapair").joinpath("data/lexicon.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    raw = json.loads(text)
    if not isinstance(raw, dict) or not raw:
        raise ValueError("lexicon must be a nonempty object of domain -> keyword list")
    lexicon = {}
    for domain, words in raw.items():
        if not isinstance(words, list):
            raise ValueError(f"lexicon entry {domain!r} must be a list")
        lexicon[domain.strip().lower()] = frozenset(t for w in words for t in normalize_text(w))
    return lexicon


def infer_domain_tags(md: MetadataRecord, lexicon: Mapping[str, Iterable[str]]) -> frozenset[str]:
    if not lexicon:
        raise ValueError("lexicon must be nonempty")
    if md.domain_tags:
        return frozenset(md.domain_tags)
    tokens = {t for c in md.columns for t in c.norm_tokens}
    tokens.update(normalize_text(md.description))
    tags = frozenset(tag for tag, words in lexicon.items() if tokens & set(words))
    return tags or frozenset({UNCLASSIFIED})


def primary_tag(tags: Iterable[str]) -> str:
    return min(tags)


def divide(nodes: Iterable, tags: Mapping[str, Iterable[str]]) -> list[SearchSpace]:
    """Group nodes into one search space per distinct primary tag.

    ``nodes`` may hold node ids or objects with an ``id`` attribute; ``tags``
    is keyed by id. Spaces are returned sorted by id (the domain label).
    """
    groups: dict[str, set[str]] = defaultdict(set)
    for item in nodes:
        node = getattr(item, "id", item)
        node_tags = list(tags.get(node, ()))
        if not node_tags:
            raise ValueError(f"node {node!r} has no domain tag")
        groups[primary_tag(node_tags)].add(node)
    return [SearchSpace(id=label, members=frozenset(m), domain_label=label) for label, m in sorted(groups.items())]


def assign_bulking_ids(spaces: Iterable[SearchSpace], node_datasets: Mapping[str, str]) -> list[BulkingId]:
    """Bulk each dataset under the space holding most of its nodes.

    ``node_datasets`` maps node id to dataset id. Ties go to the
    lexicographically smaller space id.
    """
    counts: dict[str, Counter] = defaultdict(Counter)
    labels = {}
    for space in spaces:
        labels[space.id] = space.domain_label
        for node in space.members:
            counts[node_datasets[node]][space.id] += 1

    winners: dict[str, set[str]] = defaultdict(set)
    for dataset, per_space in counts.items():
        best = min(per_space.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        winners[best].add(dataset)

    return [
        BulkingId(value=f"{labels[space_id]}-{ordinal}", dataset_ids=frozenset(winners[space_id]))
        for ordinal, space_id in enumerate(sorted(winners), 1)
    ]
