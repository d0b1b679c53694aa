import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from batcherkit import KeyOutOfRange, Mem
from batcherkit.substrate import Range, partition_by_pivots
from batcherkit.tries import VEBTree, XFastTrie, YFastTrie

from oracles import SortedSet

KINDS = {"veb": VEBTree, "xfast": XFastTrie, "yfast": YFastTrie}


@pytest.fixture(params=sorted(KINDS))
def kind(request):
    return KINDS[request.param]


@pytest.mark.parametrize("u", [0, 1, 3, 12])
def test_universe_must_be_power_of_two(kind, u):
    with pytest.raises(ValueError):
        kind(u)


def test_out_of_range_keys(kind):
    s = kind(16)
    for bad in (-1, 16):
        with pytest.raises(KeyOutOfRange):
            s.insert(bad)
        with pytest.raises(KeyOutOfRange):
            s.mem(bad)


def test_empty_set_queries(kind):
    s = kind(16)
    assert not s.mem(3)
    assert s.successor(0) is None and s.predecessor(15) is None
    assert s.keys() == [] and len(s) == 0


def test_veb_two_key_layout():
    v = VEBTree(4)
    v.insert(1)
    v.insert(0)
    root = v.root
    assert (root.min, root.max) == (0, 1)
    assert root.cluster[0].min == root.cluster[0].max == 1
    assert root.cluster[1] is None
    assert list(_summary_keys(root)) == [0]
    assert v.validate().ok


def _summary_keys(node):
    from batcherkit.tries.veb import _keys
    return _keys(node.summary)


def test_xfast_descendant_pointers():
    x = XFastTrie(8)
    x.insert(2)
    x.insert(5)
    assert x.levels[0][0].desc is None
    assert x.levels[1][0].desc.key == 2
    assert x.levels[1][1].desc.key == 5
    assert x.predecessor(4) == 2 and x.successor(3) == 5
    assert x.floor(5) == 5 and x.floor(4) == 2 and x.floor(1) is None
    assert (x.min(), x.max()) == (2, 5)
    assert x.validate().ok


def test_yfast_consecutive_run_splits_buckets():
    u = 1 << 10
    y = YFastTrie(u)
    n = 4 * int(math.log2(u))
    for k in range(100, 100 + n):
        y.insert(k)
    assert y.keys() == list(range(100, 100 + n))
    assert all(size <= y.threshold for size in y.sizes.values())
    assert len(y.buckets) >= 3
    assert y.validate().ok


@pytest.mark.parametrize("u", [2, 4, 8, 16])
def test_exhaustive_small_universes(kind, u):
    """Every subset, inserted in a shuffled order, answers every query."""
    rng = random.Random(u)
    for mask in range(1 << u):
        keys = [k for k in range(u) if mask >> k & 1]
        rng.shuffle(keys)
        s = kind(u)
        for k in keys:
            s.insert(k)
        model = SortedSet(keys)
        assert s.keys() == model.keys
        for q in range(u):
            assert s.mem(q) == model.mem(q)
            assert s.successor(q) == model.successor(q)
            assert s.predecessor(q) == model.predecessor(q)
        assert s.validate().ok


@settings(max_examples=120, deadline=None)
@given(st.sampled_from(sorted(KINDS)), st.sampled_from([2, 8, 64, 1024]),
       st.lists(st.tuples(st.integers(0, 2), st.integers(0, 1 << 20)), max_size=300))
def test_random_scripts_against_sorted_set(name, u, script):
    s = KINDS[name](u)
    model = SortedSet()
    for action, raw in script:
        k = raw % u
        if action == 0:
            s.insert(k)
            model.insert(k)
        elif action == 1:
            s.delete(k)
            model.delete(k)
        else:
            assert s.mem(k) == model.mem(k)
            assert s.successor(k) == model.successor(k)
            assert s.predecessor(k) == model.predecessor(k)
    assert s.keys() == model.keys
    assert s.apply_op(Mem(0)) == model.mem(0)
    report = s.validate()
    assert report.ok, report


def test_delete_everything_again(kind):
    u = 256
    s = kind(u)
    keys = random.Random(2).sample(range(u), 120)
    for k in keys:
        s.insert(k)
    for k in keys:
        s.delete(k)
        s.delete(k)
    assert s.keys() == [] and s.validate().ok


# -- expose / repair ---------------------------------------------------------

def test_veb_expose_pivots():
    v = VEBTree(16)
    assert v.expose([3, 9]) == ([0, 8], False)
    assert v.expose([1, 2]) == ([0], False)
    assert VEBTree(2).expose([1]) == ([], True)


def test_xfast_expose_pivots_cover_the_layer():
    x = XFastTrie(64)
    pivots, aux = x.expose([5, 40, 41])
    assert aux.layer == 2
    assert pivots == [16, 32, 48]


def test_yfast_expose_uses_representatives():
    y = YFastTrie(64)
    for k in range(40):
        y.insert(k)
    pivots, _ = y.expose([0, 39])
    assert pivots == sorted({y.rep_of(0), y.rep_of(39)})
    assert y.validate().ok


def test_expose_then_repair_without_inserts_changes_nothing(kind):
    u = 1 << 12
    rng = random.Random(7)
    keys = rng.sample(range(u), 700)
    s = kind(u)
    for k in keys:
        s.insert(k)
    _, aux = s.expose(sorted(rng.sample(range(u), 9)))
    s.repair(aux)
    assert s.keys() == sorted(keys)
    assert s.validate().ok


def _chunked_insert(s, batch, seeds, order):
    pivots, aux = s.expose(sorted(seeds))
    batch = sorted(batch)
    ranges = [r for r in partition_by_pivots(pivots, batch) if len(r)]
    for r in (ranges if order == "forward" else ranges[::-1]):
        s.insert_range(batch, aux, r)
    s.repair(aux)
    return len(ranges)


@pytest.mark.parametrize("u", [1 << 4, 1 << 10, 1 << 16])
def test_chunks_are_independent_of_order(kind, u):
    """Chunks touch disjoint state: any order of insert_range gives the same set."""
    rng = random.Random(u)
    for trial in range(8):
        base = rng.sample(range(u), min(u // 2, 400))
        batch = [rng.randrange(u) for _ in range(min(u, 600))]
        seeds = rng.sample(batch, min(len(batch), 1 + trial * 3))
        results = []
        for order in ("forward", "backward"):
            s = kind(u)
            for k in base:
                s.insert(k)
            _chunked_insert(s, batch, seeds, order)
            report = s.validate()
            assert report.ok, report
            results.append(s.keys())
        assert results[0] == results[1] == sorted(set(base) | set(batch))


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(sorted(KINDS)), st.sampled_from([4, 32, 256]),
       st.lists(st.integers(0, 255), max_size=60), st.lists(st.integers(0, 255), max_size=120),
       st.lists(st.integers(0, 255), min_size=1, max_size=12))
def test_expose_repair_matches_plain_inserts(name, u, base, batch, seeds):
    s = KINDS[name](u)
    for k in base:
        s.insert(k % u)
    batch = [k % u for k in batch]
    _chunked_insert(s, batch, [k % u for k in seeds], "forward")
    assert s.keys() == sorted({k % u for k in base} | set(batch))
    report = s.validate()
    assert report.ok, report


def test_insert_range_on_empty_range(kind):
    s = kind(16)
    _, aux = s.expose([3])
    s.insert_range([1, 2], aux, Range(1, 1))
    s.repair(aux)
    assert s.keys() == []
