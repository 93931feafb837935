from uidag.model import is_admissible
from uidag.sample_models import (
    coin_match,
    direct_edge_pair,
    random_uid,
    single_decision,
    worst_case,
)
from uidag.skeleton import (
    DECISION_NODE,
    OBSERVATION_NODE,
    build_skeleton,
    expand_normal_form,
    export_dot,
    find_parents,
)


def enumerate_reachable_keys(uid):
    """Count (label, future-below) pairs straight from the construction rules,
    without touching the builder's data structures."""
    decisions = set(uid.decisions)
    observables = set(uid.observables)
    children = {v.id: set() for v in uid.variables}
    for v in uid.variables:
        for p in v.parents:
            children[p].add(v.id)

    def descendants(x):
        seen, stack = set(), list(children[x])
        while stack:
            c = stack.pop()
            if c not in seen:
                seen.add(c)
                stack.extend(children[c])
        return seen

    obs_desc = {d: descendants(d) & observables for d in decisions}
    dec_desc = {d: descendants(d) & decisions for d in decisions}
    dec_anc = {o: {d for d in decisions if o in obs_desc[d]} for o in observables}

    free = frozenset(d for d in decisions if not obs_desc[d])
    start = (free, frozenset())
    seen = {start}
    stack = [start]
    while stack:
        label, below = stack.pop()
        fut_dec = {v for v in below if v in decisions}
        released = {o for o in observables
                    if not (dec_anc[o] & fut_dec) and (dec_anc[o] & label)}
        future = label | frozenset(released) | below
        if decisions <= future:
            continue
        cofree = [d for d in decisions - future if dec_desc[d] <= future]
        rel = {d: frozenset(obs_desc[d] - future) for d in cofree}
        kept = [d for d in cofree
                if not any(rel[o] < rel[d] for o in cofree if o != d)]
        groups = {}
        for d in kept:
            groups.setdefault(rel[d], set()).add(d)
        for label2 in groups.values():
            key = (frozenset(label2), future)
            if key not in seen:
                seen.add(key)
                stack.append(key)
    return len(seen)


def test_kings_skeleton_structure(king):
    sk = build_skeleton(king)
    sink = sk.nodes[sk.sink]
    assert sink.label == {"Rt"}
    # the chain above the sink: war, then the marriage decision
    (war,) = sink.parents
    assert sk.nodes[war].label == {"Wr"}
    (mp,) = sk.nodes[war].parents
    assert sk.nodes[mp].label == {"MP"}
    # the skeleton branches over the three tasks
    parents = [sk.nodes[p] for p in sk.nodes[mp].parents]
    assert sorted(sorted(p.label) for p in parents) == [["T1"], ["T2"], ["T3"]]
    releases = [p.released for p in parents]
    for i, a in enumerate(releases):
        for b in releases[i + 1:]:
            assert not (a < b or b < a)
    assert len(sk.nodes) == 15
    assert len(sk.sources) == 3


def test_find_parents_strict_subset_rule(king):
    sk = build_skeleton(king)
    cands = find_parents(king, sk.nodes[sk.sink])
    # war releases only wealth; marriage would release wealth plus more,
    # so only war survives as a parent of the final retirement decision
    assert [sorted(c.label) for c in cands] == [["Wr"]]
    assert cands[0].release == {"Wth"}


def test_find_parents_merges_equal_release_sets():
    uid = random_uid(0)  # any model works, build one with two free decisions
    from uidag.model import DECISION, UTILITY, Uid, UtilityFn, Variable
    uid = Uid(
        variables=(
            Variable("D1", DECISION, states=("a", "b")),
            Variable("D2", DECISION, states=("a", "b")),
            Variable("U", UTILITY, parents=("D1", "D2")),
        ),
        utilities=(UtilityFn("U", ("D1", "D2"), (0.0, 1.0, 2.0, 3.0)),),
    )
    sk = build_skeleton(uid)
    assert len(sk.nodes) == 1
    assert sk.nodes[sk.sink].label == {"D1", "D2"}


def test_single_decision_skeleton():
    sk = build_skeleton(single_decision())
    assert len(sk.nodes) == 1
    assert sk.nodes[sk.sink].label == {"D"}


def test_worst_case_counts_match_enumeration_oracle():
    counts = {}
    for n in range(3, 7):
        uid = worst_case(n)
        sk = build_skeleton(uid)
        assert len(sk.nodes) == enumerate_reachable_keys(uid)
        counts[n] = len(sk.nodes)
    for n in range(3, 6):
        ratio = counts[n + 1] / counts[n]
        assert 1.8 <= ratio <= 3.0


def test_expand_king_normal_form(king):
    sk = build_skeleton(king)
    sdag = expand_normal_form(king, sk)
    root = sdag.nodes[sdag.root]
    assert root.kind == OBSERVATION_NODE
    assert root.label == {"Wnd"}
    assert len(root.children) == 3
    by_label = {}
    for node in sdag:
        by_label.setdefault((node.kind, tuple(sorted(node.label))), []).append(node)
    # each task is followed by its own result observation
    for i in "123":
        assert (OBSERVATION_NODE, (f"R{i}",)) in by_label
    assert (OBSERVATION_NODE, ("Os", "Wd")) in by_label
    assert (OBSERVATION_NODE, ("Wth",)) in by_label
    # observation nodes lead only to decision nodes
    for node in sdag:
        if node.kind == OBSERVATION_NODE:
            assert all(sdag.nodes[c].kind == DECISION_NODE for c in node.children)
    assert all(is_admissible(king, p) for p in sdag.path_orderings())


def test_expand_direct_decision_edge():
    uid = direct_edge_pair()
    sk = build_skeleton(uid)
    sdag = expand_normal_form(uid, sk)
    first = next(n for n in sdag if n.label == {"D1"})
    assert [sdag.nodes[c].label for c in first.children] == [{"D2"}]
    assert sdag.nodes[first.children[0]].kind == DECISION_NODE


def test_expand_free_observable_root():
    uid = coin_match()
    sdag = expand_normal_form(uid, build_skeleton(uid))
    root = sdag.nodes[sdag.root]
    assert root.kind == OBSERVATION_NODE
    assert root.label == {"X"}
    assert [sdag.nodes[c].label for c in root.children] == [{"D"}]


def test_empty_sink_when_every_decision_releases():
    uid = worst_case(3)
    sk = build_skeleton(uid)
    assert sk.nodes[sk.sink].label == frozenset()
    sdag = expand_normal_form(uid, sk)
    assert all(is_admissible(uid, p) for p in sdag.path_orderings())


def test_paths_admissible_on_random_models():
    for seed in range(25):
        uid = random_uid(seed)
        sdag = expand_normal_form(uid, build_skeleton(uid))
        paths = sdag.path_orderings()
        assert paths
        for p in paths:
            assert is_admissible(uid, p)


def test_observation_labels_never_empty_and_decisions_unique():
    for seed in range(25):
        uid = random_uid(seed)
        sdag = expand_normal_form(uid, build_skeleton(uid))
        for node in sdag:
            if node.kind == OBSERVATION_NODE and node.id != sdag.root:
                assert node.label
        for path in sdag.maximal_paths():
            decisions = [v for nid in path for v in sdag.nodes[nid].label
                         if v in set(uid.decisions)]
            assert sorted(decisions) == sorted(set(uid.decisions))


def test_rebuild_is_deterministic(king):
    a = build_skeleton(king)
    b = build_skeleton(king)
    assert set(a.nodes) == set(b.nodes)
    for nid in a.nodes:
        assert a.nodes[nid] == b.nodes[nid]


def test_find_parents_pairwise_incomparable():
    for seed in range(25):
        uid = random_uid(seed)
        sk = build_skeleton(uid)
        for node in sk:
            cands = find_parents(uid, node)
            for i, a in enumerate(cands):
                for b in cands[i + 1:]:
                    assert not (a.release < b.release or b.release < a.release)


def test_export_dot_deterministic(king):
    sk = build_skeleton(king)
    text = export_dot(sk)
    assert text == export_dot(build_skeleton(king))
    assert text.count("shape=box") == len(sk.nodes)
    sdag = expand_normal_form(king, sk)
    dot = export_dot(sdag)
    assert dot == export_dot(sdag)
    assert "peripheries=2" in dot


def test_export_dot_renders_empty_label():
    uid = worst_case(3)
    text = export_dot(build_skeleton(uid))
    assert "∅" in text
