"""Acceptance criteria, one test per criterion.

Every test appends a single ``[PASS]``/``[FAIL] criterion N: ...`` line to the
shared log, which the terminal summary prints at the end of the session.
"""

import functools
import itertools
import os
import random
import threading
import time

import pytest

from batcherkit import (
    BatchedOp,
    ExecutorConfig,
    Get,
    Incr,
    Insert,
    LaunchConfig,
    Mem,
    Pool,
    Predecessor,
    Search,
    Successor,
    wrap,
)
from batcherkit.adhoc import BTree, BatchedCounter, SkipList
from batcherkit.adhoc.btree import _Node
from batcherkit.bench import STRUCTURES, WorkloadSpec, mean_throughput, run_benchmark
from batcherkit.splitjoin import SplitJoin, join_multiple, split_multiple
from batcherkit.trees import AVLTree, RBTree, Treap
from batcherkit.tries import VEBTree, XFastTrie, YFastTrie

import btree_oracle as bo
from oracles import Event, Recorder, SortedSet, counter_step, linearizable, replay_batch


def record(log, n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    log.append(line)
    print(line)
    return ok


# -- throughput (criteria 1-3) -------------------------------------------------

TREND_STRUCTURES = ["rbtree", "avl", "treap", "veb", "btree", "skiplist"]
INITIAL, OPS = 200_000, 100_000
WARMUPS, REPEATS = 5, 5


@functools.lru_cache(maxsize=None)
def throughput(structure, mode, workers, mix, warmups=WARMUPS, repeats=REPEATS):
    spec = WorkloadSpec(structure, INITIAL, OPS, mix)
    return mean_throughput(run_benchmark(spec, mode, workers, warmups, repeats))


def _cores():
    return os.cpu_count() or 1


@pytest.mark.throughput
def test_criterion_1_batched_beats_coarse_at_8_workers(acceptance_log):
    ratios = {}
    for s, mix in itertools.product(TREND_STRUCTURES, ["insert", "50-50"]):
        ratios[s, mix] = throughput(s, "batched", 8, mix) / throughput(s, "coarse", 8, mix)
    misses = {k: r for k, r in ratios.items() if r < 1.2}
    shown = ", ".join(f"{s}/{m}={r:.2f}" for (s, m), r in sorted(ratios.items()))
    ok = record(acceptance_log, 1, not misses,
                f"batched/coarse at 8 workers, need >= 1.2 everywhere ({len(misses)} misses; "
                f"{_cores()} CPU(s) available): {shown}")
    assert ok, misses


@pytest.mark.throughput
def test_criterion_2_batched_scales_from_1_to_8_workers(acceptance_log):
    ratios = {s: throughput(s, "batched", 8, "insert") / throughput(s, "batched", 1, "insert")
              for s in TREND_STRUCTURES}
    below = {s: r for s, r in ratios.items() if r < 1.5}
    # one structure may miss by up to 10%
    ok = all(r >= 1.5 * 0.9 for r in below.values()) and len(below) <= 1
    shown = ", ".join(f"{s}={r:.2f}" for s, r in sorted(ratios.items()))
    record(acceptance_log, 2, ok,
           f"batched 8w/1w insert-only, need >= 1.5 (one miss <= 10% allowed; "
           f"{_cores()} CPU(s) available): {shown}")
    assert ok, below


@pytest.mark.throughput
def test_criterion_3_single_worker_caveat_is_informational(acceptance_log):
    ratios = {s: throughput(s, "batched", 1, "insert") /
              throughput(s, "coarse", 1, "insert", warmups=1, repeats=2)
              for s in TREND_STRUCTURES}
    shown = ", ".join(f"{s}={r:.2f}" for s, r in sorted(ratios.items()))
    record(acceptance_log, 3, True,
           f"informational, batched/coarse at 1 worker (below 1 is expected): {shown}")


# -- oracle equivalence (criterion 4) ----------------------------------------------

KEY_SPACE = 1024


def mixed_ops(kind, rng, n):
    if kind == "map":
        makers = [lambda k: Insert(k, rng.random()), Search]
    elif kind == "set":
        makers = [Insert, Insert, Mem, Predecessor, Successor]
    else:
        makers = [lambda k: Incr(), lambda k: Get()]
    return [rng.choice(makers)(rng.randrange(KEY_SPACE)) for _ in range(n)]


def empty_model(kind):
    return {} if kind == "map" else SortedSet() if kind == "set" else [0]


def preload(kind, data, model, keys):
    for k in keys:
        if kind == "map":
            data.insert(k, -k)
            model[k] = -k
        elif kind == "set":
            data.insert(k)
            model.insert(k)


def final_contents(kind, data, model):
    if kind == "map":
        return list(data.items()) == sorted(model.items())
    if kind == "set":
        return data.keys() == model.keys
    return data.count == model[0]


def run_workload(entry, pool, rng, n_ops=1000):
    """Push one workload through a wrapped structure; compare with a batch-by-batch replay."""
    kind = entry.kind
    rec = Recorder(entry.batched(KEY_SPACE, 2000))
    bs = wrap(rec, pool)
    model = empty_model(kind)
    preload(kind, bs.data, model, rng.sample(range(KEY_SPACE), rng.randint(0, 300)))
    ops = mixed_ops(kind, rng, n_ops)
    results = [None] * n_ops
    index = {id(op): i for i, op in enumerate(ops)}

    async def client(i):
        results[i] = await bs.apply(ops[i])

    cells = [pool.spawn(client(i)) for i in range(n_ops)]
    for c in cells:
        c.wait(60)
    if not bs.wait_idle(60):
        return "structure never went idle"
    if sorted(index[id(b.op)] for batch in rec.batches for b in batch) != list(range(n_ops)):
        return "some request was lost or duplicated"
    for batch in rec.batches:
        expected = replay_batch(model, [b.op for b in batch])
        for b, want in zip(batch, expected):
            if results[index[id(b.op)]] != want:
                return f"{b.op!r} returned {results[index[id(b.op)]]!r}, oracle says {want!r}"
    if not final_contents(kind, bs.data, model):
        return "final contents differ from the oracle"
    return None


def test_criterion_4_oracle_equivalence(acceptance_log):
    failures = []
    batches = 0
    for workers in (1, 8):
        with Pool(workers) as pool:
            for name, entry in STRUCTURES.items():
                rng = random.Random(f"{name}-{workers}")
                for trial in range(100):
                    problem = run_workload(entry, pool, rng)
                    if problem:
                        failures.append(f"{name}/w{workers}/#{trial}: {problem}")
                batches += 1
    ok = record(acceptance_log, 4, not failures,
                f"{len(STRUCTURES)} structures x 100 workloads x 1k mixed ops at 1 and 8 workers "
                f"match the sequential oracle ({len(failures)} mismatches)")
    assert ok, failures[:5]


# -- structural validators (criterion 5) ---------------------------------------------

FUZZ_STRUCTURES = {
    "rbtree": ("map", RBTree),
    "avl": ("map", AVLTree),
    "treap": ("map", lambda: Treap(5)),
    "btree": ("map", lambda: BTree(3)),
    "veb": ("set", lambda: VEBTree(KEY_SPACE)),
    "xfast": ("set", lambda: XFastTrie(KEY_SPACE)),
    "yfast": ("set", lambda: YFastTrie(KEY_SPACE)),
    "skiplist": ("set", lambda: SkipList(2048, seed=5)),
}


def fuzz(name, n_ops=10_000):
    kind, make = FUZZ_STRUCTURES[name]
    s = make()
    model = empty_model(kind)
    can_delete = name != "btree"
    rng = random.Random(name)
    for step in range(n_ops):
        k = rng.randrange(KEY_SPACE)
        # drift between growing and shrinking phases so the set size varies
        grow = (step // 1000) % 2 == 0
        if rng.random() < (0.7 if grow else 0.3) or not can_delete:
            if kind == "map":
                s.insert(k, step)
                model[k] = step
            else:
                s.insert(k)
                model.insert(k)
        elif kind == "map":
            s.delete(k)
            model.pop(k, None)
        else:
            s.delete(k)
            model.delete(k)
        report = s.validate()
        if not report.ok:
            return f"after op {step}: {report}"
    if not final_contents(kind, s, model):
        return "contents differ from the oracle"
    return None


BATCHED_FOR = {
    "rbtree": lambda: SplitJoin(RBTree, ExecutorConfig(seq_threshold=8, size_factor_threshold=1)),
    "avl": lambda: SplitJoin(AVLTree, ExecutorConfig(seq_threshold=8, size_factor_threshold=1)),
    "treap": lambda: SplitJoin(lambda: Treap(2), ExecutorConfig(seq_threshold=8, size_factor_threshold=1)),
}


def batched_runs(name, pool, rounds=60):
    if name in BATCHED_FOR:
        impl = BATCHED_FOR[name]()
    else:
        impl = STRUCTURES[name].batched(KEY_SPACE, 4096)
    if name == "btree":
        impl.par_grain = 4
    kind = STRUCTURES[name].kind
    data = impl.init()
    model = empty_model(kind)
    rng = random.Random(name)
    for r in range(rounds):
        ops = mixed_ops(kind, rng, rng.choice([10, 100, 400]))
        out = [None] * len(ops)
        impl.run_batch(data, pool, [BatchedOp(op, lambda v, i=i: out.__setitem__(i, v))
                                    for i, op in enumerate(ops)])
        if out != replay_batch(model, ops):
            return f"batch {r}: results differ from the oracle"
        report = data.validate()
        if not report.ok:
            return f"after batch {r}: {report}"
    return None


def test_criterion_5_validators_hold_throughout(acceptance_log, pool):
    failures = {}
    for name in FUZZ_STRUCTURES:
        problem = fuzz(name) or batched_runs(name, pool)
        if problem:
            failures[name] = problem
    ok = record(acceptance_log, 5, not failures,
                f"validators pass after each of 10k fuzz ops and every batched run for "
                f"{len(FUZZ_STRUCTURES)} structures ({len(failures)} failing)")
    assert ok, failures


# -- split/join round trip (criterion 6) ----------------------------------------------

def test_criterion_6_split_join_round_trip(acceptance_log):
    failures = []
    for name, make in (("rbtree", RBTree), ("avl", AVLTree), ("treap", lambda: Treap(11))):
        rng = random.Random(name)
        for case in range(500):
            n = rng.choice([0, 1, 2, rng.randint(0, 64), rng.randint(0, 4096)])
            keys = rng.sample(range(10 * n + 10), n)
            t = make()
            for k in keys:
                t.insert(k, k)
            pivots = sorted(rng.sample(range(-5, 10 * n + 15), rng.randint(0, 16)))
            parts = split_multiple(t, pivots)
            bounds = [None, *pivots, None]
            for i, p in enumerate(parts):
                pk = p.keys()
                lo, hi = bounds[i], bounds[i + 1]
                if any((lo is not None and k < lo) or (hi is not None and k >= hi) for k in pk):
                    failures.append(f"{name} #{case}: part {i} holds keys outside its range")
                if not p.validate().ok:
                    failures.append(f"{name} #{case}: part {i} invalid: {p.validate()}")
            joined = join_multiple(parts)
            if joined.keys() != sorted(keys):
                failures.append(f"{name} #{case}: traversal changed")
            if not joined.validate().ok:
                failures.append(f"{name} #{case}: joined tree invalid: {joined.validate()}")
    ok = record(acceptance_log, 6, not failures,
                f"500 random split/join cases per tree kind ({len(failures)} failures)")
    assert ok, failures[:5]


# -- B-tree capacity (criterion 7) -----------------------------------------------

def height2_shapes(t, limit=64):
    for n in range(1, 2 * t):
        for kids in itertools.combinations_with_replacement(range(t - 1, 2 * t), n + 1):
            s = bo.node(n, *[bo.leaf(k) for k in kids])
            if bo.size(s) <= limit:
                yield s


def random_shape(rng, t, height, root=True):
    n = rng.randint(1 if root else t - 1, 2 * t - 1)
    if height == 1:
        return bo.leaf(n)
    return bo.node(n, *[random_shape(rng, t, height - 1, False) for _ in range(n + 1)])


def materialise(t, shape, gap=1000):
    counter = [0]

    def make(s):
        n, kids = s
        if kids is None:
            keys = [gap * (counter[0] + i + 1) for i in range(n)]
            counter[0] += n
            return _Node(keys, list(keys))
        children, keys = [], []
        for i, kid in enumerate(kids):
            children.append(make(kid))
            if i < n:
                counter[0] += 1
                keys.append(gap * counter[0])
        return _Node(keys, list(keys), children)

    tree = BTree(t)
    tree.root = make(shape)
    return tree


def splits_root_with(t, shape, m, pool):
    """Does some single-leaf batch of ``m`` keys split the root of this shape?"""
    probe = materialise(t, shape)
    leaves = []

    def walk(n, lo):
        if n.children is None:
            leaves.append(lo)
            return
        for i, c in enumerate(n.children):
            walk(c, lo if i == 0 else n.keys[i - 1])

    walk(probe.root, 0)
    for lo in leaves:
        tree = materialise(t, shape)
        tree.par_insert(pool, [(lo + i, None) for i in range(1, m + 1)])
        if tree.stats.root_splits:
            return True
    return False


def test_criterion_7_btree_capacity(acceptance_log, pool):
    units = [
        (bo.leaf(3), 0),
        (bo.leaf(1), 2),
        (bo.node(1, bo.leaf(1), bo.leaf(1)), 6),
    ]
    unit_ok = all(materialise(2, s).capacity() == want for s, want in units)

    shapes = [(t, s) for t in (2, 3, 4) for s in height2_shapes(t)]
    rng = random.Random(7)
    while sum(1 for t, s in shapes if t == 2 and s[1][0][1] is not None) < 60:
        s = random_shape(rng, 2, 3)
        if bo.size(s) <= 64:
            shapes.append((2, s))

    checked, violations = 0, []
    for t, s in shapes:
        exact = bo.max_safe_inserts(s, t)
        checked += 1
        if bo.cap(s, t) > exact:
            real = splits_root_with(t, s, bo.cap(s, t), pool)
            violations.append((t, s, bo.cap(s, t), exact, real))
    shown = "; ".join(f"t={t} {s}: cap {c} > exact {e}"
                      f"{', batch of cap keys splits the root' if real else ''}"
                      for t, s, c, e, real in violations)
    ok = record(acceptance_log, 7, unit_ok and not violations,
                f"unit values 0/2/6 {'match' if unit_ok else 'MISMATCH'}; capacity conservative on "
                f"{checked - len(violations)}/{checked} brute-forced shapes of <= 64 keys"
                + (f"; counterexamples: {shown}" if violations else ""))
    assert ok, violations


# -- liveness and exclusivity (criterion 8) ----------------------------------------

def test_criterion_8_stress(acceptance_log):
    duration = 10.0
    counter_rec = Recorder(BatchedCounter())
    tree_rec = Recorder(SplitJoin(RBTree))
    issued = {"counter": 0, "tree": 0}
    incs = [0]
    lock = threading.Lock()
    keys_inserted = set()
    with Pool(8) as pool:
        counter = wrap(counter_rec, pool)
        tree = wrap(tree_rec, pool)
        deadline = time.monotonic() + duration

        async def client(cid):
            rng = random.Random(cid)
            mine = {"counter": 0, "tree": 0}
            my_incs, my_keys = 0, set()
            while time.monotonic() < deadline:
                if cid % 2:
                    if rng.random() < 0.7:
                        await counter.apply(Incr())
                        my_incs += 1
                    else:
                        await counter.apply(Get())
                    mine["counter"] += 1
                else:
                    k = rng.randrange(1 << 20)
                    if rng.random() < 0.5:
                        await tree.apply(Insert(k, cid))
                        my_keys.add(k)
                    else:
                        await tree.apply(Search(k))
                    mine["tree"] += 1
            with lock:
                for key in issued:
                    issued[key] += mine[key]
                incs[0] += my_incs
                keys_inserted.update(my_keys)
            return True

        cells = [pool.spawn(client(c)) for c in range(64)]
        finished = sum(1 for c in cells if c.wait(duration + 60))
        idle = counter.wait_idle(30) and tree.wait_idle(30)
        final_count = pool.spawn(counter.apply(Get())).wait(30)
        tree_keys = set(tree.data.keys())

    # the final Get above is one extra counter request
    seen = {"counter": sum(map(len, counter_rec.batches)) - 1, "tree": sum(map(len, tree_rec.batches))}
    problems = []
    if finished != 64 or not idle:
        problems.append(f"{64 - finished} clients did not finish")
    if counter_rec.max_active > 1 or tree_rec.max_active > 1:
        problems.append(f"reentrancy {counter_rec.max_active}/{tree_rec.max_active}")
    if seen != issued:
        problems.append(f"executed {seen} vs issued {issued}")
    if final_count != incs[0] or tree_keys != keys_inserted:
        problems.append("final state lost updates")
    if not tree.data.validate().ok:
        problems.append("tree invalid")
    ok = record(acceptance_log, 8, not problems,
                f"{duration:.0f} s, 64 clients on a counter and a split-join tree: "
                f"{issued['counter'] + issued['tree']} applies completed, max reentrancy "
                f"{max(counter_rec.max_active, tree_rec.max_active)}"
                + (f"; problems: {problems}" if problems else ""))
    assert ok, problems


# -- counter semantics (criterion 9) ---------------------------------------------

def test_criterion_9_counter_semantics(acceptance_log, pool):
    problems = []
    rec = Recorder(BatchedCounter(grain=16))
    # hold batches open a little so most of them mix several gets and increments
    bs = wrap(rec, pool, LaunchConfig(min_batch=64, wait_threshold=0.005))
    rng = random.Random(9)
    ops = [Incr() if rng.random() < 0.6 else Get() for _ in range(5000)]
    results = [None] * len(ops)
    index = {id(op): i for i, op in enumerate(ops)}

    async def client(i):
        results[i] = await bs.apply(ops[i])

    for c in [pool.spawn(client(i)) for i in range(len(ops))]:
        c.wait(30)
    value = 0
    multi_get_batches = 0
    for batch in rec.batches:
        gets = {results[index[id(b.op)]] for b in batch if type(b.op) is Get}
        if len([b for b in batch if type(b.op) is Get]) > 1:
            multi_get_batches += 1
        if gets and gets != {value}:
            problems.append(f"batch gets {sorted(gets)} but pre-batch value {value}")
        value += sum(1 for b in batch if type(b.op) is Incr)

    histories = 0
    for trial in range(300):
        hist_bs = wrap(BatchedCounter(), pool)
        n = rng.randint(1, 6)
        hist_ops = [rng.choice([Incr(), Get()]) for _ in range(n)]
        history, hlock = [], threading.Lock()

        async def timed(op):
            start = time.monotonic()
            result = await hist_bs.apply(op)
            end = time.monotonic()
            with hlock:
                history.append(Event(op, start, end, result))

        for c in [pool.spawn(timed(op)) for op in hist_ops]:
            c.wait(10)
        histories += 1
        if not linearizable(history, lambda: [0], counter_step):
            problems.append(f"history not linearizable: {history}")
    ok = record(acceptance_log, 9, not problems,
                f"gets agree with the pre-batch value in all {len(rec.batches)} batches "
                f"({multi_get_batches} with several gets); {histories} histories of <= 6 ops "
                f"linearizable ({len(problems)} problems)")
    assert ok, problems[:5]
