#!/usr/bin/env python3
"""Smoke test for the kgossip_rs extension module.

Builds the cdylib if needed, links it under the importable name, and walks
the main surfaces once: set operations, simulations under three adversary
protocols, the two-party sampler, an offline gather with validation, the
phase and broadcast schedulers, and the tree decomposition.

Run from the repository root:  python3 python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys
import tempfile

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def ensure_module():
    lib = os.path.join(REPO, "target", "release", "libkgossip_rs.so")
    if not os.path.exists(lib):
        print("building kgossip-python (release) ...")
        subprocess.run(
            ["cargo", "build", "--release", "-p", "kgossip-python"],
            cwd=REPO,
            check=True,
        )
    stage = tempfile.mkdtemp(prefix="kgossip-py-")
    shutil.copy(lib, os.path.join(stage, "kgossip_rs.so"))
    sys.path.insert(0, stage)


def check(name, condition, detail=""):
    status = "ok" if condition else "FAIL"
    print(f"  {name}: {status} {detail}")
    if not condition:
        raise SystemExit(f"smoke test failed at: {name}")


def main():
    ensure_module()
    import kgossip_rs as kg

    print("token sets")
    a = kg.TokenSet(8, [0, 1, 5])
    b = kg.TokenSet(8, [1, 2])
    check("symmetric difference", a.symmetric_difference(b).ids() == [0, 2, 5])
    check("insert/len", a.insert(7) and len(a) == 4)

    print("distributions")
    dist = kg.TokenDistribution.from_spec("well-mixed:0.75", 64, 64, seed=1)
    frac = 1.0 - dist.missing_total() / (64 * 64)
    check("well-mixed density", abs(frac - 0.75) < 0.05, f"held fraction {frac:.3f}")

    print("simulations")
    trace = kg.simulate(16, 8, "random:0.2", "symdiff", "well-mixed:0.5", 500, seed=7)
    check("symdiff completes", trace.completion_round is not None,
          f"round {trace.completion_round}")

    trace = kg.simulate(10, 5, "rotating", "det-symdiff", "all-at-one:0", 200, seed=0)
    floor = 5 * ((10 - 2) // 2 + 1)
    check("rotating line forces the floor",
          trace.completion_round is not None and trace.completion_round >= floor,
          f"completed at {trace.completion_round}, floor {floor}")

    trace = kg.simulate(32, 16, "strong", "bcast:flood", "well-mixed:0.75", 1000, seed=3)
    check("flooding beats the strong adversary", trace.completion_round is not None,
          f"round {trace.completion_round}")
    check("witness stays small", trace.max_witness_size() <= math.ceil(5 * math.log2(32)))

    print("two-party sampling")
    counts = {0: 0, 2: 0}
    trials = 4000
    for seed in range(trials):
        element, bits = kg.sample_symdiff(6, [0, 1], [1, 2], 0.1, seed=seed)
        counts[element] += 1
    freq = counts[0] / trials
    check("near-uniform over the difference", abs(freq - 0.5) < 0.05, f"freq {freq:.3f}")
    element, bits = kg.sample_symdiff(6, [0, 1], [0, 1], 0.1)
    check("equal sets yield no element", element is None)

    print("offline schedulers")
    n, k = 12, 4
    seq = kg.GraphSequence.generate("random:0.2", n, n + k, seed=5)
    sources = [t % n for t in range(k)]
    schedule = kg.gather_schedule(seq, sources, target=3)
    init = kg.TokenDistribution.from_holdings(
        n, k, [[t for t in range(k) if sources[t] == v] for v in range(n)])
    check("gather validates", kg.validate(schedule, seq, init, sinks=[3]) is None,
          f"length {schedule.length()} <= {n + k}")

    budget = (n + k) + (math.ceil(math.log2(n)) + 1) * 4 * (n + k) * math.ceil(math.log2(n))
    seq = kg.GraphSequence.generate("random:0.2", n, budget, seed=6)
    schedule, gather_node, flows, retries = kg.algorithm1(seq, init, seed=6)
    check("phase schedule validates", kg.validate(schedule, seq, init) is None,
          f"length {schedule.length()}, retries {retries}")

    q = min(n, math.ceil(2 * math.sqrt(k * math.log2(n))))
    window = math.ceil(2 * n * math.sqrt(math.log2(n) / k))
    seq = kg.GraphSequence.generate("random:0.2", n, q * (n + k) + k * window, seed=7)
    schedule, hubs = kg.algorithm2(seq, sources, seed=7)
    check("broadcast schedule validates", kg.validate(schedule, seq, init) is None,
          f"hubs {hubs}")

    hubs, covered, root, schedule = kg.algorithm3(seq, sources)
    check("derandomized selection covers", covered, f"hubs {hubs}, root {root}")
    check("derandomized schedule validates", kg.validate(schedule, seq, init) is None)

    print("tree decomposition")
    tree = kg.GraphSequence.generate("tree", 40, 1, seed=9).round(1)
    parts = kg.tree_decompose(40, tree.edges(), 4)
    covered_nodes = set()
    for nodes, edges in parts:
        covered_nodes.update(nodes)
        check_size = len(nodes)
        assert 4 <= check_size <= 16, f"subtree size {check_size}"
    check("subtrees cover every node", covered_nodes == set(range(40)),
          f"{len(parts)} subtrees")

    print("file round trips")
    stage = tempfile.mkdtemp(prefix="kgossip-files-")
    seq_path = os.path.join(stage, "seq.txt")
    seq.to_file(seq_path)
    back = kg.GraphSequence.from_file(seq_path)
    check("graph sequence round trip", len(back) == len(seq) and back.n == seq.n)
    sched_path = os.path.join(stage, "schedule.txt")
    schedule.to_file(sched_path)
    back = kg.Schedule.from_file(sched_path)
    check("schedule round trip", back.length() == schedule.length()
          and len(back) == len(schedule))

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
