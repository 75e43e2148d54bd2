"""Exit criteria. Each test is one criterion; a PASS/FAIL line per criterion is
printed in the terminal summary (see conftest.py)."""
import itertools
import json
import random
import shutil
import string
import time
from fractions import Fraction

import numpy as np
import pytest

import oracles
from metapair.catalog import normalize_text
from metapair.centers import AnnealingSchedule, anneal_medoid, center_cost
from metapair.cognate import (
    RegressionWeights,
    features,
    normalized_levenshtein,
    regression_similarity,
    token_jaccard,
    trigram_dice,
)
from metapair.grouping import MetaCollection, SimilarityMatrix, stream_insert, threshold_cluster
from metapair.pipeline import RunConfig, cmd_ingest, cmd_match, cmd_pipeline
from metapair.pooling import DomainChannel, LinearPointer, SearchCycleLog, VisitGraph, make_scorer, record_cycle, traverse
from metapair.reports import read_records

pytestmark = pytest.mark.acceptance


def random_collection(rng, n, values=None):
    ids = [f"m{i:03d}" for i in range(n)]
    cells = np.eye(n, dtype=np.int64) * 100
    for i, j in itertools.combinations(range(n), 2):
        cells[i, j] = cells[j, i] = rng.choice(values) if values else rng.randint(0, 100)
    return MetaCollection("X", frozenset(ids), "s"), SimilarityMatrix(tuple(ids), cells)


def test_ac1_triple_fidelity(corpus, tmp_path):
    recs = cmd_ingest(corpus.values()).records
    start = time.perf_counter()
    results = cmd_match(recs, RunConfig(out_dir=str(tmp_path)))
    elapsed = time.perf_counter() - start
    assert len(results) == 3
    for res in results:
        emitted = read_records(tmp_path / "pairs" / f"{res.stem}.triples.json")
        assert len(emitted) == len(res.a.columns) * len(res.b.columns)
        for rec in emitted:
            assert set(rec) == {"source", "target", "percent"}
            assert type(rec["percent"]) is int and 0 <= rec["percent"] <= 100
            assert rec["source"].startswith(res.a.dataset.id + ".")
            assert rec["target"].startswith(res.b.dataset.id + ".")
    assert elapsed < 1.0, f"cmd_match took {elapsed:.3f}s"


def test_ac2_identity_suite(corpus, tmp_path):
    for name, path in corpus.items():
        copy = tmp_path / f"{name}_copy.csv"
        shutil.copy(path, copy)
        a, b = cmd_ingest([path, copy]).records
        (res,) = cmd_match([a, b])
        n = len(a.columns)
        diag = [res.triples[i * n + i].percent for i in range(n)]
        assert diag == [100] * n
        assert res.evidence.connected


def test_ac3_property_suite():
    rng = random.Random(20160101)
    alphabet = string.ascii_lowercase[:8] + string.digits[:3] + " _-"
    w = RegressionWeights()
    start = time.perf_counter()
    for _ in range(1000):
        x = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
        y = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
        tx, ty = normalize_text(x), normalize_text(y)
        jx, jy = " ".join(tx), " ".join(ty)
        for fn, args in ((token_jaccard, (tx, ty)), (trigram_dice, (jx, jy)), (normalized_levenshtein, (jx, jy))):
            fwd, back = fn(*args), fn(*reversed(args))
            assert fwd == back
            assert 0.0 <= fwd <= 1.0
        p, q = regression_similarity(features(tx, ty), w), regression_similarity(features(ty, tx), w)
        assert p == q
        assert type(p) is int and 0 <= p <= 100
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"property suite took {elapsed:.2f}s"


def test_ac4_medoid_oracle_equivalence():
    rng = random.Random(4)
    for trial in range(200):
        n = rng.randint(2, 12)
        # every third instance draws from a coarse grid so cost ties occur
        values = [0, 50, 100] if trial % 3 == 0 else None
        coll, m = random_collection(rng, n, values)
        node, cost = oracles.brute_medoid(coll.member_ids, m.cell)
        got = anneal_medoid(coll, m, AnnealingSchedule(seed=trial))
        assert got.node_id == node
        assert Fraction(got.cost).limit_denominator(100) == cost


def test_ac5_annealing_quality():
    rng = random.Random(5)
    start = time.perf_counter()
    good = 0
    for trial in range(100):
        coll, m = random_collection(rng, 50)
        _, best = oracles.brute_medoid(coll.member_ids, m.cell)
        got = anneal_medoid(coll, m, AnnealingSchedule(seed=trial))
        assert got.method == "annealed"
        assert got.cost == pytest.approx(center_cost(got.node_id, coll, m))
        if Fraction(got.cost).limit_denominator(100) <= Fraction(105, 100) * best:
            good += 1
    elapsed = time.perf_counter() - start
    print(f"annealing within 1.05x optimum: {good}/100 in {elapsed:.1f}s")
    assert good >= 95
    assert elapsed < 30.0


def test_ac6_clustering_laws():
    rng = random.Random(6)
    for _ in range(100):
        n = rng.randint(1, 50)
        coll, m = random_collection(rng, n)
        tau = rng.randint(0, 100)
        batch = threshold_cluster(m, tau, "s")
        for _ in range(3):
            order = list(m.node_ids)
            rng.shuffle(order)
            state = []
            for k, nid in enumerate(order):
                state = stream_insert(state, nid, {p: m.cell(nid, p) for p in order[:k]}, tau, "s")
            assert state == batch
        members = [x for c in batch for x in c.member_ids]
        assert len(members) == len(set(members)) == n
        finer = threshold_cluster(m, tau + rng.randint(1, 30), "s")
        for f in finer:
            assert any(f.member_ids <= c.member_ids for c in batch)


def test_ac7_graph_law():
    rng = random.Random(7)
    nodes = {f"n{i:02d}": (rng.choice(["date", "road", "speed", "route", "km"]),) for i in range(20)}
    ids = sorted(nodes)
    scorer = make_scorer(nodes)
    log, graph = SearchCycleLog(), VisitGraph()
    sizes = []
    for k in range(60):
        v = rng.randint(0, 8)
        sizes.append(v)
        chan = DomainChannel("c", tuple(sorted(rng.sample(ids, v))))
        snapshot = json.dumps(log.to_records())
        log, graph = record_cycle(log, graph, "a", "b", traverse(LinearPointer(f"p{k}", ("date",)), chan, scorer))
        assert json.dumps(log.to_records()[:-1]) == snapshot
    assert len(graph.edges) == sum(max(0, v - 1) for v in sizes)
    assert len(log) == len(sizes)
    assert [e.cycle_no for e in log.entries] == list(range(1, len(sizes) + 1))


@pytest.mark.parametrize(
    "extra",
    [
        {},
        {"tau": 20, "exact_threshold": 2, "format": "dot", "queries": ["accident date"]},
        {"format": "csv", "include_descriptions": True},
    ],
)
def test_ac8_determinism(corpus, tmp_path, extra):
    def run(out):
        cfg = RunConfig.from_mapping({"inputs": [str(p) for p in corpus.values()], "seed": 42, "out": str(out), **extra})
        cmd_pipeline(cfg)
        return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}

    first, second = run(tmp_path / "one"), run(tmp_path / "two")
    assert first and first == second


VOCAB = [
    "date", "accident date", "vehicle type", "road type", "speed limit", "km", "distance km", "route id",
    "passengers", "fare", "region", "year", "survey year", "employed", "unemployed", "occupation",
    "casualties", "severity", "weather", "location", "operator", "mode", "age group", "sex", "city",
    "journey time", "number of vehicles", "junction", "light conditions", "urban area",
]


def test_ac9_eighteen_dataset_harness(tmp_path):
    """The published 18-dataset transport pool and its figure values are not
    available, so the harness is exercised on 18 generated local CSVs: all
    pairwise evidence plus one matrix per pair, at desk scale."""
    rng = random.Random(18)
    paths = []
    for i in range(18):
        cols = rng.sample(VOCAB, rng.randint(8, 12))
        header = [c.replace(" ", "_").title() if rng.random() < 0.5 else c.replace(" ", "_") for c in cols]
        rows = [[str(rng.randint(0, 99)) for _ in header] for _ in range(20)]
        p = tmp_path / "in" / f"ds{i:02d}.csv"
        p.parent.mkdir(exist_ok=True)
        p.write_text("\n".join(",".join(r) for r in [header, *rows]) + "\n")
        paths.append(p)

    start = time.perf_counter()
    out = tmp_path / "out"
    catalog = cmd_ingest(paths, RunConfig(out_dir=str(out)))
    results = cmd_match(catalog.records, RunConfig(out_dir=str(out)))
    elapsed = time.perf_counter() - start

    assert len(json.loads((out / "manifest.json").read_text())["datasets"]) == 18
    assert len(results) == 18 * 17 // 2
    assert len(read_records(out / "evidence.json")) == 153
    assert len(list((out / "pairs").glob("*.matrix.csv"))) == 153
    assert elapsed < 60.0, f"harness took {elapsed:.1f}s"
