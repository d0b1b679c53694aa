import random

import pytest

from batcherkit import (
    BatchedOp,
    ContractViolation,
    ExecutorConfig,
    Insert,
    Mem,
    Pool,
    Search,
    SplitJoin,
    UnsupportedOperation,
    join_multiple,
    split_multiple,
    wrap,
)
from batcherkit.splitjoin import choose_seeds
from batcherkit.trees import AVLTree, RBTree, Treap

from oracles import replay_batch

KINDS = {"rb": RBTree, "avl": AVLTree, "treap": lambda: Treap(seed=1)}


@pytest.fixture(params=sorted(KINDS))
def make(request):
    return KINDS[request.param]


def run(executor, tree, pool, ops):
    out = [None] * len(ops)

    def sink(i):
        return lambda r: out.__setitem__(i, r)

    executor.run_batch(tree, pool, [BatchedOp(op, sink(i)) for i, op in enumerate(ops)])
    return out


def filled(make, keys):
    t = make()
    for k in keys:
        t.insert(k, k)
    return t


def test_config_validation():
    with pytest.raises(ValueError):
        ExecutorConfig(seq_threshold=0)
    with pytest.raises(ValueError):
        ExecutorConfig(size_factor_threshold=-1)


def test_search_sees_pre_batch_state(make, pool):
    ex = SplitJoin(make)
    t = filled(make, [1])
    out = run(ex, t, pool, [Search(2), Insert(2, 2)])
    assert out == [None, None]
    assert t.keys() == [1, 2]


def test_hundred_searches(make, pool):
    ex = SplitJoin(make)
    t = filled(make, range(0, 200, 2))
    out = run(ex, t, pool, [Search(k) for k in range(100)])
    assert out == [k if k % 2 == 0 else None for k in range(100)]


def test_small_batch_takes_the_sequential_path(make, pool):
    ex = SplitJoin(make, ExecutorConfig(seq_threshold=64))
    t = filled(make, range(1000))
    run(ex, t, pool, [Insert(k, k) for k in range(2000, 2010)])
    assert ex.parallel_rounds == 0
    assert len(t) == 1010 and t.validate().ok


def test_small_tree_takes_the_sequential_path(make, pool):
    ex = SplitJoin(make, ExecutorConfig(seq_threshold=1, size_factor_threshold=1000))
    t = filled(make, range(10))
    run(ex, t, pool, [Insert(k, k) for k in range(100, 400)])
    assert ex.parallel_rounds == 0
    assert len(t) == 310


def test_ten_thousand_into_ten_thousand(make, sized_pool):
    rng = random.Random(4)
    keys = rng.sample(range(10**6), 20000)
    ex = SplitJoin(make)
    t = filled(make, keys[:10000])
    run(ex, t, sized_pool, [Insert(k, k) for k in keys[10000:]])
    assert ex.parallel_rounds == 1
    assert t.keys() == sorted(keys)
    assert t.validate().ok, t.validate()


def test_duplicates_last_writer_wins(make, pool):
    ex = SplitJoin(make, ExecutorConfig(seq_threshold=4, size_factor_threshold=0))
    t = filled(make, range(0, 1000, 3))
    rng = random.Random(8)
    ops = [Insert(rng.randrange(1000), i) for i in range(3000)]
    run(ex, t, pool, ops)
    model = {k: k for k in range(0, 1000, 3)}
    for op in ops:
        model[op.key] = op.value
    assert list(t.items()) == sorted(model.items())
    assert ex.parallel_rounds == 1


def test_unsupported_ops_fail_alone(make, pool):
    ex = SplitJoin(make)
    t = make()
    out = run(ex, t, pool, [Mem(1), Insert(1, "a"), Search(1)])
    assert isinstance(out[0], UnsupportedOperation)
    assert out[1:] == [None, None]
    assert t.search(1) == "a"


def test_sorted_batches_still_get_spread_pivots():
    keys = list(range(1000))
    seeds = choose_seeds(keys, 10)
    assert len(set(seeds)) == 10
    assert max(seeds) - min(seeds) > 100
    assert choose_seeds([5, 1, 3], 2) == [5, 1]


@pytest.mark.parametrize("pivots,expected", [
    ([3, 7], [[1, 2], [3, 4, 5, 6], [7, 8, 9]]),
    ([], [list(range(1, 10))]),
    ([0, 100], [[], list(range(1, 10)), []]),
    ([5, 6], [[1, 2, 3, 4], [5], [6, 7, 8, 9]]),
])
def test_split_multiple_examples(make, pivots, expected):
    t = filled(make, range(1, 10))
    parts = split_multiple(t, pivots)
    assert [p.keys() for p in parts] == expected
    assert t.root is None
    assert all(p.validate().ok for p in parts)
    assert join_multiple(parts).keys() == list(range(1, 10))


def test_split_multiple_rejects_unsorted_pivots(make):
    with pytest.raises(ContractViolation):
        split_multiple(filled(make, range(5)), [3, 3])


def test_join_multiple_needs_a_tree():
    with pytest.raises(ValueError):
        join_multiple([])


def test_result_independent_of_worker_count(make):
    rng = random.Random(21)
    base = rng.sample(range(50000), 3000)
    batch = [Insert(rng.randrange(50000), i) for i in range(4000)]
    batch += [Search(rng.randrange(50000)) for _ in range(500)]
    rng.shuffle(batch)
    seen = []
    for workers in (1, 2, 8):
        with Pool(workers) as p:
            t = filled(make, base)
            out = run(SplitJoin(make), t, p, batch)
            seen.append((out, list(t.items())))
    assert seen[0] == seen[1] == seen[2]
    model = {k: k for k in base}
    assert seen[0][0] == replay_batch(model, batch)
    assert seen[0][1] == sorted(model.items())


def test_wrapped_split_join_tree(pool):
    bs = wrap(SplitJoin(RBTree), pool)

    async def client(k):
        await bs.apply(Insert(k, str(k)))
        return await bs.apply(Search(k))

    cells = [pool.spawn(client(k)) for k in range(3000)]
    assert [c.wait(20) for c in cells] == [str(k) for k in range(3000)]
    assert bs.wait_idle(10)
    assert bs.data.keys() == list(range(3000)) and bs.data.validate().ok
