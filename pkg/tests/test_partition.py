import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metapair.catalog import ColumnDescriptor, DatasetRef, MetadataKind, MetadataRecord, normalize_text
from metapair.partition import (
    UNCLASSIFIED,
    SearchSpace,
    assign_bulking_ids,
    divide,
    infer_domain_tags,
    load_lexicon,
)

LEX = {"transport": {"vehicle", "road"}, "food": {"meal"}}


def record(ds_id, names, tags=(), description=None):
    cols = tuple(ColumnDescriptor(ds_id, n, tuple(normalize_text(n))) for n in names)
    kinds = {MetadataKind.DESCRIPTIVE: (description,)} if description else {}
    return MetadataRecord(DatasetRef(ds_id, "", 0), cols, kinds, frozenset(tags))


def test_sidecar_tags_pass_through():
    assert infer_domain_tags(record("a", ["meal"], tags=["transport"]), LEX) == {"transport"}


def test_lexicon_intersection():
    md = record("a", ["vehicle", "casualty", "road"])
    oracle = {tag for tag, kw in LEX.items() if kw & {"vehicle", "casualty", "road"}}
    assert infer_domain_tags(md, LEX) == oracle == {"transport"}


def test_description_tokens_count():
    assert infer_domain_tags(record("a", ["x"], description="Meal plans"), LEX) == {"food"}


def test_unclassified_fallback():
    assert infer_domain_tags(record("a", ["x"]), LEX) == {UNCLASSIFIED}


def test_empty_lexicon_rejected():
    with pytest.raises(ValueError):
        infer_domain_tags(record("a", ["x"]), {})


def test_bundled_lexicon():
    lex = load_lexicon()
    assert {"transport", "accidents", "labor", "food", "sports"} <= set(lex)
    assert "vehicle" in lex["transport"]


def test_divide_examples():
    spaces = divide(["n1", "n2", "n3"], {"n1": {"transport"}, "n2": {"transport"}, "n3": {"food"}})
    assert sorted(len(s.members) for s in spaces) == [1, 2]
    one = divide(["a", "b"], {"a": {"x"}, "b": {"x"}})
    assert len(one) == 1 and one[0].members == {"a", "b"}
    assert divide([], {}) == []


def test_divide_primary_tag():
    (space,) = divide(["n"], {"n": {"transport", "accidents"}})
    assert space.id == "accidents"


def test_divide_requires_tag():
    with pytest.raises(ValueError):
        divide(["n"], {"n": set()})


tag_maps = st.dictionaries(
    st.text("abcdefgh", min_size=1, max_size=4),
    st.frozensets(st.sampled_from(["food", "labor", "sports", "transport"]), min_size=1),
    max_size=30,
)


@given(tag_maps, st.randoms(use_true_random=False))
def test_partition_law_and_order_independence(tags, rnd):
    nodes = list(tags)
    spaces = divide(nodes, tags)
    union = set().union(*(s.members for s in spaces)) if spaces else set()
    assert union == set(nodes)
    assert sum(len(s.members) for s in spaces) == len(nodes)
    shuffled = nodes[:]
    rnd.shuffle(shuffled)
    assert divide(shuffled, tags) == spaces


def test_bulking_single_space_two_datasets():
    spaces = [SearchSpace("transport", frozenset({"a.x", "b.y"}), "transport")]
    (bid,) = assign_bulking_ids(spaces, {"a.x": "a", "b.y": "b"})
    assert bid.dataset_ids == {"a", "b"}
    assert bid.value == "transport-1"


def test_bulking_majority():
    spaces = [
        SearchSpace("food", frozenset({"d.4"}), "food"),
        SearchSpace("transport", frozenset({"d.1", "d.2", "d.3"}), "transport"),
    ]
    bids = assign_bulking_ids(spaces, {f"d.{i}": "d" for i in range(1, 5)})
    assert [(b.value, set(b.dataset_ids)) for b in bids] == [("transport-1", {"d"})]


def test_bulking_tie_goes_to_smaller_space():
    spaces = [
        SearchSpace("transport", frozenset({"d.1", "d.2"}), "transport"),
        SearchSpace("accidents", frozenset({"d.3", "d.4"}), "accidents"),
    ]
    (bid,) = assign_bulking_ids(spaces, {f"d.{i}": "d" for i in range(1, 5)})
    assert bid.value.startswith("accidents")


def test_bulking_every_dataset_once_and_order_free():
    rng = random.Random(3)
    node_ds = {f"d{d}.c{c}": f"d{d}" for d in range(6) for c in range(5)}
    tags = {n: {rng.choice(["food", "labor", "transport"])} for n in node_ds}
    spaces = divide(list(node_ds), tags)
    bids = assign_bulking_ids(spaces, node_ds)
    seen = [d for b in bids for d in b.dataset_ids]
    assert sorted(seen) == sorted(set(node_ds.values()))
    assert assign_bulking_ids(list(reversed(spaces)), node_ds) == bids
