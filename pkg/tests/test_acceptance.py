"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.  The
navigator walkthrough criterion lives in the front end's own suite
(frontend/test) since it exercises the bundle-consuming UI engine.
"""

import dataclasses
import time

import pytest

from uidag.model import is_admissible
from uidag.oracle import brute_meu, brute_meu_full, simulate, strategy_eu
from uidag.sample_models import kings_problem, random_uid, worst_case
from uidag.skeleton import build_skeleton, expand_normal_form
from uidag.solver import solve, solve_model

from test_skeleton import enumerate_reachable_keys

SUITE_SIZE = 200


def _report(num: int, name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num} {name}: {status}{suffix}")
    assert ok, f"criterion {num} {name} failed{suffix}"


@pytest.fixture(scope="module")
def suite():
    models = [random_uid(seed) for seed in range(SUITE_SIZE)]
    t0 = time.monotonic()
    strategies = [solve_model(u) for u in models]
    solve_time = time.monotonic() - t0
    return models, strategies, solve_time


def test_criterion_1_oracle_equivalence(suite):
    models, strategies, solve_time = suite
    t0 = time.monotonic()
    worst = 0.0
    for uid, s in zip(models, strategies):
        m = brute_meu(uid)
        worst = max(worst, abs(s.meu - m) / (1.0 + abs(m)))
    elapsed = solve_time + (time.monotonic() - t0)
    ok = worst <= 1e-9 and elapsed < 60.0
    _report(1, "oracle-equivalence", ok,
            f"{SUITE_SIZE} models, worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_strategy_achievement(suite):
    models, strategies, _ = suite
    worst = 0.0
    mutations = 0
    regression = False
    for uid, s in zip(models, strategies):
        eu = strategy_eu(uid, s)
        worst = max(worst, abs(eu - s.meu) / (1.0 + abs(s.meu)))
        for i, pt in enumerate(s.policies):
            card = uid.card(pt.decision)
            for cell in range(len(pt.choices)):
                flipped = list(pt.choices)
                flipped[cell] = (flipped[cell] + 1) % card
                mutated = dataclasses.replace(pt, choices=tuple(flipped))
                worse = dataclasses.replace(
                    s, policies=s.policies[:i] + (mutated,) + s.policies[i + 1:])
                mutations += 1
                if strategy_eu(uid, worse) > s.meu + 1e-9 * (1.0 + abs(s.meu)):
                    regression = True
    ok = worst <= 1e-9 and not regression
    _report(2, "strategy-achievement", ok,
            f"worst rel err {worst:.2e}, {mutations} single-cell mutations")


def test_criterion_3_observation_delay_theorem():
    worst = 0.0
    for seed in range(50):
        uid = random_uid(seed, max_decisions=2, max_chance=3)
        worst = max(worst, abs(brute_meu_full(uid) - brute_meu(uid)))
    _report(3, "delaying-observations-never-helps", worst <= 1e-12,
            f"50 tiny models, worst abs diff {worst:.2e}")


def test_criterion_4_merge_consistency(suite):
    models, strategies, _ = suite
    # solving already asserts pool equality at every merge; a mismatch raises,
    # so reaching this point with branching models means every check passed
    merged = sum(1 for s in strategies if s.step_policies)
    extra = [kings_problem(), worst_case(4), worst_case(5)]
    for uid in extra:
        s = solve_model(uid)
        merged += 1 if s.step_policies else 0
    _report(4, "merge-consistency", merged >= 10,
            f"{merged} models exercised branch merges without a mismatch")


def test_criterion_5_elimination_walkthrough(branching):
    s = solve_model(branching, record_trace=True)
    events = {(ev.op, ev.subject): ev for ev in s.trace}
    a = events[("chance", "A")]
    f = events[("chance", "F")]
    d4 = events[("decision", "D4")]
    merge = next(ev for ev in s.trace if ev.op == "merge")
    ok = (
        sorted(tuple(sorted(p.domain)) for p in a.created)
        == [("B", "D1"), ("B", "D1", "D2")]
        and [tuple(sorted(p.domain)) for p in f.created] == [("C", "D4", "E")]
        and set(d4.policy.domain) == {"C", "E"}
        and [tuple(sorted(p.domain)) for p in d4.created] == [("C", "E")]
        and len(merge.step.branch_values) == 2
        and all(set(t.domain) == {"B", "D1"} for t in merge.step.branch_values)
        and set(merge.step.domain) == {"B", "D1"}
    )
    _report(5, "elimination-walkthrough", ok)


def test_criterion_6_kings_problem(king):
    t0 = time.monotonic()
    sk = build_skeleton(king)
    sdag = expand_normal_form(king, sk)
    strategy = solve(king, sdag)
    elapsed = time.monotonic() - t0

    sink_ok = "Rt" in sk.nodes[sk.sink].label
    paths = sdag.path_orderings()
    admissible_ok = bool(paths) and all(is_admissible(king, p) for p in paths)
    mp_node = next(n for n in sk.nodes.values() if n.label == {"MP"})
    branches = sorted(sorted(sk.nodes[p].label) for p in mp_node.parents)
    branch_ok = branches == [["T1"], ["T2"], ["T3"]]
    ok = sink_ok and admissible_ok and branch_ok and elapsed < 5.0
    _report(6, "kings-problem", ok,
            f"{len(paths)} admissible paths, solved in {elapsed:.2f}s, "
            f"meu {strategy.meu:.6g}")


def test_criterion_7_worst_case_scaling():
    counts = {}
    for n in range(3, 7):
        uid = worst_case(n)
        sk = build_skeleton(uid)
        if len(sk.nodes) != enumerate_reachable_keys(uid):
            _report(7, "worst-case-scaling", False, f"count mismatch at n={n}")
        counts[n] = len(sk.nodes)
    growth_ok = all(1.8 <= counts[n + 1] / counts[n] <= 3.0 for n in range(3, 6))

    t0 = time.monotonic()
    s9 = solve_model(worst_case(9))
    t9 = time.monotonic() - t0
    sk10 = build_skeleton(worst_case(10))
    ok = growth_ok and t9 < 60.0 and len(sk10.nodes) > 0
    _report(7, "worst-case-scaling", ok,
            f"counts {counts}, n=9 solved in {t9:.1f}s "
            f"(meu {s9.meu:.4g}), n=10 skeleton {len(sk10.nodes)} nodes")


def test_criterion_8_trimming_soundness():
    worst = 0.0
    for seed in range(50):
        uid = random_uid(seed)
        plain = solve_model(uid, trim=False).meu
        trimmed = solve_model(uid, trim=True).meu
        worst = max(worst, abs(trimmed - plain) / (1.0 + abs(plain)))
    _report(8, "trimming-soundness", worst <= 1e-9,
            f"50 models, worst rel diff {worst:.2e}")


def test_criterion_9_monte_carlo(suite):
    models, strategies, _ = suite
    picked = [(u, s) for u, s in zip(models, strategies)][:10]
    failures = 0
    for i, (uid, s) in enumerate(picked):
        eu = strategy_eu(uid, s)
        mean, stderr = simulate(uid, s, n=100_000, seed=1000 + i)
        if abs(mean - eu) > max(4 * stderr, 1e-9 * (1.0 + abs(eu))):
            failures += 1
    _report(9, "monte-carlo", failures == 0,
            f"10 models at n=100000, {failures} outside 4 standard errors")


def test_criterion_10_pointer():
    print("ACCEPTANCE 10 navigator-walkthrough: covered by frontend/test "
          "(vitest suite)")
