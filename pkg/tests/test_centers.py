import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from metapair.centers import (
    AnnealingSchedule,
    anneal_medoid,
    center_cost,
    exact_medoid,
)
from metapair.grouping import MetaCollection, SimilarityMatrix


def setup(sims, ids="ABC"):
    ids = list(ids)
    cells = np.eye(len(ids), dtype=np.int64) * 100
    for (a, b), v in sims.items():
        i, j = ids.index(a), ids.index(b)
        cells[i, j] = cells[j, i] = v
    return MetaCollection("X1", frozenset(ids), "s"), SimilarityMatrix(tuple(ids), cells)


def random_instance(rng, n):
    ids = [f"m{i:03d}" for i in range(n)]
    cells = np.eye(n, dtype=np.int64) * 100
    for i, j in itertools.combinations(range(n), 2):
        cells[i, j] = cells[j, i] = rng.randint(0, 100)
    return MetaCollection("X", frozenset(ids), "s"), SimilarityMatrix(tuple(ids), cells)


def test_cost_examples():
    coll, m = setup({("A", "B"): 90, ("A", "C"): 10})
    assert center_cost("A", coll, m) == pytest.approx(1.0)
    single, sm = setup({}, ids="A")
    assert center_cost("A", single, sm) == 0


def test_cost_outside_collection():
    coll, m = setup({}, ids="AB")
    with pytest.raises(ValueError):
        center_cost("Z", coll, m)


def test_exact_example():
    coll, m = setup({("A", "B"): 90, ("B", "C"): 50, ("A", "C"): 10})
    costs = {x: center_cost(x, coll, m) for x in "ABC"}
    assert costs == pytest.approx({"A": 1.0, "B": 0.6, "C": 1.4})
    c = exact_medoid(coll, m)
    assert (c.node_id, c.cost, c.method) == ("B", pytest.approx(0.6), "exact")


def test_exact_singleton_and_tie():
    coll, m = setup({}, ids="Q")
    assert exact_medoid(coll, m).node_id == "Q" and exact_medoid(coll, m).cost == 0
    pair, pm = setup({("A", "B"): 37}, ids="BA")
    assert exact_medoid(pair, pm).node_id == "A"


def test_exact_oversize():
    coll, m = random_instance(random.Random(0), 13)
    with pytest.raises(ValueError, match="anneal_medoid"):
        exact_medoid(coll, m)


@pytest.mark.parametrize("kwargs", [
    {"initial_temp": 0}, {"cooling": 1.0}, {"cooling": 0}, {"steps": 0}, {"seed": 2**64},
])
def test_schedule_validation(kwargs):
    with pytest.raises(ValueError):
        AnnealingSchedule(**kwargs)


def test_anneal_delegates_small():
    rng = random.Random(11)
    for _ in range(20):
        coll, m = random_instance(rng, rng.randint(2, 12))
        assert anneal_medoid(coll, m, AnnealingSchedule(steps=1)) == exact_medoid(coll, m)


def test_anneal_rejects_singleton_when_forced():
    coll, m = setup({}, ids="A")
    with pytest.raises(ValueError):
        anneal_medoid(coll, m, exact_threshold=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(13, 40), st.integers(1, 300), st.integers(0, 2**32), st.randoms(use_true_random=False))
def test_anneal_best_so_far(n, steps, seed, rnd):
    coll, m = random_instance(rnd, n)
    start = min(coll.member_ids)
    c = anneal_medoid(coll, m, AnnealingSchedule(steps=steps, seed=seed))
    assert c.node_id in coll.member_ids
    assert c.cost <= center_cost(start, coll, m)
    assert c.cost == pytest.approx(center_cost(c.node_id, coll, m))
    assert c.method == "annealed"


def test_anneal_deterministic():
    coll, m = random_instance(random.Random(5), 60)
    sched = AnnealingSchedule(steps=300, seed=99)
    assert anneal_medoid(coll, m, sched) == anneal_medoid(coll, m, sched)


def test_brute_oracle_agrees_on_small():
    rng = random.Random(2)
    for _ in range(30):
        coll, m = random_instance(rng, rng.randint(1, 12))
        node, cost = oracles.brute_medoid(coll.member_ids, m.cell)
        c = exact_medoid(coll, m)
        assert c.node_id == node
        assert Fraction(c.cost).limit_denominator(100) == cost
