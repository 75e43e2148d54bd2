"""Meta-center (medoid) selection for meta-collections.

Small collections are solved exactly. Larger ones use simulated annealing
over the members, seeded so repeated runs agree.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .grouping import MetaCollection, SimilarityMatrix

EXACT_THRESHOLD = 12
METHOD_EXACT = "exact"
METHOD_ANNEALED = "annealed"

_SEED_MIN, _SEED_MAX = -(2**63), 2**64 - 1


@dataclass(frozen=True)
class MetaCenter:
    collection_id: str
    node_id: str
    cost: float
    method: str = METHOD_EXACT

    def to_record(self) -> dict:
        return {
            "collection_id": self.collection_id,
            "node_id": self.node_id,
            "cost": self.cost,
            "method": self.method,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "MetaCenter":
        return cls(rec["collection_id"], rec["node_id"], rec["cost"], rec["method"])


@dataclass(frozen=True)
class AnnealingSchedule:
    initial_temp: float = 1.0
    cooling: float = 0.995
    steps: int = 2000
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.initial_temp > 0 and math.isfinite(self.initial_temp)):
            raise ValueError(f"initial_temp must be positive, got {self.initial_temp}")
        if not 0 < self.cooling < 1:
            raise ValueError(f"cooling must lie in (0, 1), got {self.cooling}")
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not _SEED_MIN <= self.seed <= _SEED_MAX:
            raise ValueError(f"seed must be a 64-bit integer, got {self.seed!r}")


def _similarity_sum(candidate: str, collection: MetaCollection, matrix: SimilarityMatrix) -> int:
    i = matrix.index(candidate)
    return sum(int(matrix.cells[i, matrix.index(m)]) for m in collection.member_ids)


def _integer_cost(candidate: str, collection: MetaCollection, matrix: SimilarityMatrix) -> int:
    """Cost scaled by 100. Integer arithmetic keeps ties exact and order-free."""
    n = len(collection.member_ids)
    # Self-distance is 0 by definition even if the diagonal is not 100.
    sim = _similarity_sum(candidate, collection, matrix) - matrix.cell(candidate, candidate) + 100
    return 100 * n - sim


def center_cost(candidate: str, collection: MetaCollection, matrix: SimilarityMatrix) -> float:
    """Sum of distances ``1 - percent/100`` from ``candidate`` to every member."""
    if candidate not in collection.member_ids:
        raise ValueError(f"{candidate!r} is not a member of {collection.id!r}")
    return _integer_cost(candidate, collection, matrix) / 100


def exact_medoid(
    collection: MetaCollection, matrix: SimilarityMatrix, exact_threshold: int = EXACT_THRESHOLD
) -> MetaCenter:
    if len(collection.member_ids) > exact_threshold:
        raise ValueError(
            f"collection {collection.id!r} has {len(collection.member_ids)} members "
            f"(> {exact_threshold}); use anneal_medoid"
        )
    best = min(collection.member_ids, key=lambda m: (_integer_cost(m, collection, matrix), m))
    return MetaCenter(collection.id, best, _integer_cost(best, collection, matrix) / 100, METHOD_EXACT)


def anneal_medoid(
    collection: MetaCollection,
    matrix: SimilarityMatrix,
    schedule: AnnealingSchedule | None = None,
    exact_threshold: int = EXACT_THRESHOLD,
) -> MetaCenter:
    """Approximate the medoid by simulated annealing.

    Collections of at most ``exact_threshold`` members are handed to
    :func:`exact_medoid`. Otherwise the walk starts at the smallest member
    id, proposes a uniformly random other member each step, accepts uphill
    moves with probability ``exp(-delta / temp)`` and cools geometrically.
    The best state seen is returned, never a worse final state.
    """
    schedule = schedule or AnnealingSchedule()
    members = sorted(collection.member_ids)
    if len(members) <= exact_threshold:
        return exact_medoid(collection, matrix, exact_threshold)
    if len(members) < 2:
        raise ValueError("annealing needs at least two members")

    costs: dict[str, int] = {}

    def cost(m: str) -> int:
        if m not in costs:
            costs[m] = _integer_cost(m, collection, matrix)
        return costs[m]

    rng = random.Random(schedule.seed)
    n = len(members)
    cur = 0
    cur_cost = cost(members[0])
    best, best_cost = cur, cur_cost
    temp = schedule.initial_temp
    for _ in range(schedule.steps):
        k = rng.randrange(n - 1)
        prop = k if k < cur else k + 1
        prop_cost = cost(members[prop])
        delta = (prop_cost - cur_cost) / 100
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            cur, cur_cost = prop, prop_cost
            if (cur_cost, members[cur]) < (best_cost, members[best]):
                best, best_cost = cur, cur_cost
        temp *= schedule.cooling
    return MetaCenter(collection.id, members[best], best_cost / 100, METHOD_ANNEALED)
