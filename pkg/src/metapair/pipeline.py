"""End-to-end orchestration: ingest, match, divide, cluster, center, pool.

Each ``cmd_*`` function does the work, writes its reports under
``RunConfig.out_dir`` (when set) and returns the in-memory results.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .catalog import LoadResult, MetadataRecord, load_catalog
from .centers import EXACT_THRESHOLD, AnnealingSchedule, MetaCenter, anneal_medoid
from .cognate import DEFAULT_TAU_CONN, ConnectionEvidence, RegressionWeights, SimilarityTriple, cognate_map
from .grouping import (
    DEFAULT_TAU,
    MetaCollection,
    MetaNode,
    SimilarityMatrix,
    build_similarity_matrix,
    nodes_for_record,
    threshold_cluster,
)
from .partition import BulkingId, SearchSpace, assign_bulking_ids, divide, infer_domain_tags, load_lexicon
from .pooling import (
    DEFAULT_BIND_THRESHOLD,
    DomainChannel,
    LinearPointer,
    SearchCycleLog,
    VisitGraph,
    export_graph,
    make_scorer,
    pool_centers,
    record_cycle,
    traverse,
)
from .reports import (
    CENTER_FIELDS,
    EVIDENCE_FIELDS,
    TRIPLE_FIELDS,
    dumps_json,
    pair_matrix_csv,
    safe_filename,
    write_records,
    write_text,
)

logger = logging.getLogger(__name__)

FORMATS = ("structured", "csv", "dot")
STAGES = ("cluster", "centers", "pool", "run")


class PipelineError(Exception):
    """A pipeline stage failed; the message starts with the stage name."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple[str, ...] = ()
    weights: RegressionWeights = field(default_factory=RegressionWeights)
    tau: int = DEFAULT_TAU
    tau_conn: int = DEFAULT_TAU_CONN
    bind_threshold: int = DEFAULT_BIND_THRESHOLD
    schedule: AnnealingSchedule = field(default_factory=AnnealingSchedule)
    out_dir: str | None = None
    format: str = "structured"
    delimiter: str = ","
    include_descriptions: bool = False
    remove_stopwords: bool = False
    lexicon: str | None = None
    exact_threshold: int = EXACT_THRESHOLD
    queries: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("tau", "tau_conn", "bind_threshold"):
            value = getattr(self, name)
            if not 0 <= value <= 100:
                raise ValueError(f"{name} must lie in 0..100, got {value}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")

    @property
    def seed(self) -> int:
        return self.schedule.seed

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base: "RunConfig | None" = None) -> "RunConfig":
        """Build a config from flat keys as used in config files and CLI flags.

        Keys absent from ``data`` keep their value from ``base``.
        """
        cfg = base or cls()
        sched = {}
        for key in ("initial_temp", "cooling", "steps", "seed"):
            if key in data:
                sched[key] = data[key]
        kwargs: dict[str, Any] = {}
        if sched:
            kwargs["schedule"] = replace(cfg.schedule, **sched)
        if "weights" in data:
            w = data["weights"]
            kwargs["weights"] = RegressionWeights.parse(w) if isinstance(w, str) else RegressionWeights(*w)
        if "out" in data:
            kwargs["out_dir"] = data["out"]
        for key in ("inputs", "queries"):
            if key in data:
                kwargs[key] = tuple(data[key])
        for key in ("tau", "tau_conn", "bind_threshold", "format", "delimiter", "include_descriptions",
                    "remove_stopwords", "lexicon", "exact_threshold"):
            if key in data:
                kwargs[key] = data[key]
        unknown = set(data) - set(kwargs) - set(sched) - {"weights", "out"}
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return replace(cfg, **kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")))


def derive_seed(seed: int, key: str) -> int:
    """Independent 64-bit stream seed for ``key`` under a run seed."""
    digest = hashlib.sha256(f"{seed}:{key}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _out(config: RunConfig) -> Path | None:
    return Path(config.out_dir) if config.out_dir else None


# -- ingest ---------------------------------------------------------------

def manifest_for(result: LoadResult) -> dict:
    return {
        "datasets": [r.to_manifest_entry() for r in result.records],
        "errors": [{"path": p, "error": e} for p, e in result.errors],
    }


def cmd_ingest(paths: Iterable[str | Path], config: RunConfig | None = None) -> LoadResult:
    config = config or RunConfig()
    result = load_catalog(paths, delimiter=config.delimiter, remove_stopwords=config.remove_stopwords)
    out = _out(config)
    if out is not None:
        write_text(out / "manifest.json", dumps_json(manifest_for(result)))
    return result


# -- match ----------------------------------------------------------------

@dataclass
class MatchResult:
    a: MetadataRecord
    b: MetadataRecord
    triples: list[SimilarityTriple]
    evidence: ConnectionEvidence

    @property
    def stem(self) -> str:
        return safe_filename(f"{self.a.dataset.id}__{self.b.dataset.id}")


def match_pair(a: MetadataRecord, b: MetadataRecord, config: RunConfig) -> MatchResult:
    triples, evidence = cognate_map(a, b, config.weights, config.tau_conn, config.include_descriptions)
    return MatchResult(a, b, triples, evidence)


def cmd_match(
    records: Sequence[MetadataRecord],
    config: RunConfig | None = None,
    pairs: Sequence[tuple[str, str]] | None = None,
) -> list[MatchResult]:
    """Match the requested dataset pairs (every unordered pair by default).

    Writes ``pairs/<a>__<b>.triples.*``, ``pairs/<a>__<b>.matrix.csv`` and a
    combined ``evidence.*`` file.
    """
    config = config or RunConfig()
    by_id = {r.dataset.id: r for r in records}
    if pairs is None:
        pairs = list(itertools.combinations([r.dataset.id for r in records], 2))
    for a, b in pairs:
        for ds in (a, b):
            if ds not in by_id:
                raise PipelineError("match", f"unknown dataset id {ds!r}; known: {', '.join(sorted(by_id))}")
    results = [match_pair(by_id[a], by_id[b], config) for a, b in pairs]

    out = _out(config)
    if out is not None:
        fmt = "csv" if config.format == "csv" else "structured"
        for res in results:
            write_records(out / "pairs", f"{res.stem}.triples", [t.to_record() for t in res.triples], TRIPLE_FIELDS, fmt)
            write_text(out / "pairs" / f"{res.stem}.matrix.csv", pair_matrix_csv(res.a, res.b, res.triples))
        write_records(out, "evidence", [r.evidence.to_record() for r in results], EVIDENCE_FIELDS, fmt)
    return results


# -- full pipeline --------------------------------------------------------

@dataclass
class PipelineResult:
    catalog: LoadResult
    dataset_tags: dict[str, frozenset[str]] = field(default_factory=dict)
    nodes: dict[str, MetaNode] = field(default_factory=dict)
    spaces: list[SearchSpace] = field(default_factory=list)
    bulking: list[BulkingId] = field(default_factory=list)
    matrices: dict[str, SimilarityMatrix] = field(default_factory=dict)
    collections: list[MetaCollection] = field(default_factory=list)
    centers: list[MetaCenter] = field(default_factory=list)
    channels: list[DomainChannel] = field(default_factory=list)
    log: SearchCycleLog = field(default_factory=SearchCycleLog)
    graph: VisitGraph = field(default_factory=VisitGraph)
    matches: list[MatchResult] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.catalog.ok


@contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, str(exc)) from exc


def cmd_pipeline(config: RunConfig, stop_after: str = "run") -> PipelineResult:
    """Run divide -> cluster -> centers -> pool -> traverse and write reports.

    ``stop_after`` truncates the run after ``cluster``, ``centers`` or
    ``pool``; ``run`` also scores every dataset pair.
    """
    if stop_after not in STAGES:
        raise ValueError(f"stop_after must be one of {STAGES}")
    with _stage("ingest"):
        catalog = load_catalog(config.inputs, delimiter=config.delimiter, remove_stopwords=config.remove_stopwords)
        if not catalog.records:
            raise PipelineError("ingest", "no dataset could be loaded")
    res = PipelineResult(catalog)

    with _stage("partition"):
        lexicon = load_lexicon(config.lexicon)
        node_tags: dict[str, frozenset[str]] = {}
        node_datasets: dict[str, str] = {}
        for rec in catalog.records:
            tags = infer_domain_tags(rec, lexicon)
            res.dataset_tags[rec.dataset.id] = tags
            for node in nodes_for_record(rec, config.include_descriptions):
                if node.id in res.nodes:
                    raise ValueError(f"duplicate node id {node.id!r}")
                res.nodes[node.id] = node
                node_tags[node.id] = tags
                node_datasets[node.id] = rec.dataset.id
        res.spaces = divide(res.nodes.values(), node_tags)
        res.bulking = assign_bulking_ids(res.spaces, node_datasets)

    with _stage("cluster"):
        for space in res.spaces:
            members = [res.nodes[nid] for nid in sorted(space.members)]
            matrix = build_similarity_matrix(members, config.weights)
            res.matrices[space.id] = matrix
            res.collections.extend(threshold_cluster(matrix, config.tau, space.id))

    if stop_after != "cluster":
        with _stage("centers"):
            for coll in res.collections:
                sched = replace(config.schedule, seed=derive_seed(config.seed, coll.id))
                res.centers.append(anneal_medoid(coll, res.matrices[coll.space_id], sched, config.exact_threshold))

    if stop_after in ("pool", "run"):
        with _stage("pool"):
            space_of = {nid: s.domain_label for s in res.spaces for nid in s.members}
            res.channels = pool_centers(res.centers, {c.node_id: space_of[c.node_id] for c in res.centers})
            _traverse_all(res, config)

    if stop_after == "run":
        with _stage("match"):
            recs = catalog.records
            res.matches = [match_pair(a, b, config) for a, b in itertools.combinations(recs, 2)]

    out = _out(config)
    if out is not None:
        with _stage("report"):
            res.files = write_pipeline_reports(res, config, out, stop_after)
    return res


def _traverse_all(res: PipelineResult, config: RunConfig) -> None:
    """Send one pointer per center into every other channel, then any query pointers."""
    scorer = make_scorer({nid: n.tokens for nid, n in res.nodes.items()}, config.weights)
    log, graph = SearchCycleLog(), VisitGraph()
    for source in res.channels:
        for center_id in source.center_ids:
            tokens = res.nodes[center_id].tokens
            if not tokens:
                continue
            pointer = LinearPointer(f"ptr:{center_id}", tokens, config.bind_threshold)
            for target in res.channels:
                if target.domain_label == source.domain_label:
                    continue
                visits = traverse(pointer, target, scorer)
                log, graph = record_cycle(log, graph, source.domain_label, target.domain_label, visits)
    for k, query in enumerate(config.queries, 1):
        pointer = LinearPointer.from_text(f"query:{k}", query, config.bind_threshold)
        for target in res.channels:
            log, graph = record_cycle(log, graph, "query", target.domain_label, traverse(pointer, target, scorer))
    res.log, res.graph = log, graph


def write_pipeline_reports(res: PipelineResult, config: RunConfig, out: Path, stop_after: str) -> list[Path]:
    fmt = "csv" if config.format == "csv" else "structured"
    files = [
        write_text(out / "manifest.json", dumps_json(manifest_for(res.catalog))),
        write_text(
            out / "spaces.json",
            dumps_json(
                {
                    "spaces": [s.to_record() for s in res.spaces],
                    "bulking_ids": [b.to_record() for b in res.bulking],
                    "dataset_tags": {k: sorted(v) for k, v in res.dataset_tags.items()},
                }
            ),
        ),
        write_text(out / "collections.json", dumps_json([c.to_record() for c in res.collections])),
    ]
    for space_id, matrix in res.matrices.items():
        files.append(write_text(out / "matrices" / f"{safe_filename(space_id)}.csv", matrix.to_csv()))
    if stop_after != "cluster":
        files.append(write_records(out, "centers", [c.to_record() for c in res.centers], CENTER_FIELDS, fmt))
    if stop_after in ("pool", "run"):
        files.append(write_text(out / "channels.json", dumps_json([c.to_record() for c in res.channels])))
        files.append(write_text(out / "cycles.json", dumps_json(res.log.to_records())))
        if config.format == "dot":
            files.append(write_text(out / "graph.dot", export_graph(res.graph, "dot")))
        files.append(write_text(out / "graph.json", export_graph(res.graph, "structured")))
    if stop_after == "run":
        files.append(write_records(out, "evidence", [m.evidence.to_record() for m in res.matches], EVIDENCE_FIELDS, fmt))
    return files
