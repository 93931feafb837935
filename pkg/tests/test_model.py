import itertools
import json

import pytest

from uidag.model import (
    DECISION,
    HIDDEN,
    OBSERVABLE,
    UTILITY,
    UidFormatError,
    ValidationError,
    is_admissible,
    parse_uid,
    released_observables,
    serialize_uid,
    temporal_order,
    uid_from_document,
    validate,
)
from uidag.sample_models import chain_release, kings_problem, random_uid, single_decision

MINIMAL = json.dumps({
    "variables": [
        {"id": "D", "kind": "decision", "states": ["a", "b"], "parents": []},
        {"id": "U", "kind": "utility", "parents": ["D"]},
    ],
    "utilities": [{"id": "U", "domain": ["D"], "values": [0, 10]}],
})


def test_parse_minimal_document():
    uid = parse_uid(MINIMAL)
    assert len(uid.variables) == 2
    assert uid.decisions == ("D",)
    assert uid.utility_by_id["U"].values == (0.0, 10.0)


def test_parse_kings_problem_kinds(king):
    reparsed = parse_uid(serialize_uid(king))
    kinds = {v.id: v.kind for v in reparsed.variables}
    assert {v for v, k in kinds.items() if k == OBSERVABLE} == {
        "Wnd", "R1", "R2", "R3", "Wd", "Os", "Wth"}
    assert {v for v, k in kinds.items() if k == HIDDEN} == {"QW", "QG"}
    assert {v for v, k in kinds.items() if k == DECISION} == {
        "T1", "T2", "T3", "MP", "Wr", "Rt"}
    assert {v for v, k in kinds.items() if k == UTILITY} == {
        "U_dyn", "U_war", "U_ret"}


def test_parse_rejects_unnormalized_cpt():
    doc = {
        "variables": [
            {"id": "X", "kind": "chance-observable", "states": ["a", "b"], "parents": []},
            {"id": "U", "kind": "utility", "parents": ["X"]},
        ],
        "cpts": [{"child": "X", "values": [0.4, 0.5]}],
        "utilities": [{"id": "U", "domain": ["X"], "values": [0, 1]}],
    }
    with pytest.raises(ValidationError, match="CPT not normalized"):
        parse_uid(json.dumps(doc))


def test_parse_reports_syntax_line():
    with pytest.raises(UidFormatError, match="line"):
        parse_uid('{"variables": [,]}')


def test_parse_dangling_parent_is_a_violation():
    doc = {
        "variables": [
            {"id": "D", "kind": "decision", "states": ["a", "b"], "parents": ["GHOST"]},
        ],
    }
    uid = uid_from_document(doc)
    assert any("unknown parent" in v for v in validate(uid))


def test_parse_wrong_table_length():
    doc = json.loads(MINIMAL)
    doc["utilities"][0]["values"] = [1, 2, 3]
    with pytest.raises(ValidationError, match="expected 2"):
        parse_uid(json.dumps(doc))


def test_parse_unknown_reference_fails_fast():
    doc = json.loads(MINIMAL)
    doc["cpts"] = [{"child": "GHOST", "values": [0.5, 0.5]}]
    with pytest.raises(UidFormatError, match="unknown variable"):
        parse_uid(json.dumps(doc))


def test_validate_king_is_clean(king):
    assert validate(king) == []


def test_validate_utility_with_child():
    doc = {
        "variables": [
            {"id": "U", "kind": "utility", "parents": []},
            {"id": "X", "kind": "chance-hidden", "states": ["a", "b"], "parents": ["U"]},
        ],
        "cpts": [{"child": "X", "values": [0.5, 0.5, 0.5, 0.5]}],
        "utilities": [{"id": "U", "domain": [], "values": [1]}],
    }
    uid = uid_from_document(doc)
    assert "utility U has child X" in validate(uid)


def test_validate_decision_with_hidden_parent():
    doc = {
        "variables": [
            {"id": "A", "kind": "chance-hidden", "states": ["a", "b"], "parents": []},
            {"id": "D", "kind": "decision", "states": ["a", "b"], "parents": ["A"]},
            {"id": "U", "kind": "utility", "parents": ["D"]},
        ],
        "cpts": [{"child": "A", "values": [0.5, 0.5]}],
        "utilities": [{"id": "U", "domain": ["D"], "values": [0, 1]}],
    }
    uid = uid_from_document(doc)
    assert "decision D has non-observable parent A" in validate(uid)


def test_validate_rejects_single_state_variable():
    doc = json.loads(MINIMAL)
    doc["variables"][0]["states"] = ["only"]
    uid = uid_from_document(doc)
    assert any("at least 2 states" in v for v in validate(uid))


def test_validate_rejects_cycle():
    doc = {
        "variables": [
            {"id": "A", "kind": "chance-hidden", "states": ["a", "b"], "parents": ["B"]},
            {"id": "B", "kind": "chance-hidden", "states": ["a", "b"], "parents": ["A"]},
        ],
        "cpts": [{"child": "A", "values": [0.5, 0.5, 0.5, 0.5]},
                 {"child": "B", "values": [0.5, 0.5, 0.5, 0.5]}],
    }
    uid = uid_from_document(doc)
    assert any("cycle" in v for v in validate(uid))


def test_temporal_order_king(king):
    po = temporal_order(king)
    for i in "123":
        assert po.precedes(f"T{i}", f"R{i}")
        assert po.precedes(f"R{i}", "MP")
    assert po.precedes("MP", "Wd")
    assert po.precedes("MP", "Os")
    assert po.precedes("Wr", "Rt")
    assert po.precedes("Wr", "Wth")
    assert po.precedes("MP", "Wth")
    # war and the task chain stay unordered
    for i in "123":
        assert not po.precedes(f"T{i}", "Wr")
        assert not po.precedes("Wr", f"T{i}")
    assert not any(po.precedes("Rt", x) for x in po.elements)


def test_temporal_order_single_decision_empty():
    assert temporal_order(single_decision()).pairs == frozenset()


def test_temporal_order_through_hidden_chain():
    po = temporal_order(chain_release())
    assert po.precedes("D1", "B")
    assert po.pairs == frozenset({("D1", "B")})


def test_released_observables_king(king):
    assert released_observables(king, set()) == {"Wnd"}
    assert released_observables(king, set(king.decisions)) == set(king.observables)
    assert released_observables(king, {"T1"}) == {"Wnd", "R1"}


def test_released_observables_chain():
    uid = chain_release()
    assert released_observables(uid, set()) == frozenset()
    assert released_observables(uid, {"D1"}) == {"B"}


def test_released_observables_rejects_non_decisions(king):
    with pytest.raises(ValueError):
        released_observables(king, {"Wnd"})


def test_released_observables_monotone():
    for seed in range(20):
        uid = random_uid(seed)
        decisions = list(uid.decisions)
        for k in range(len(decisions)):
            small = released_observables(uid, set(decisions[:k]))
            big = released_observables(uid, set(decisions[:k + 1]))
            assert small <= big


def test_is_admissible_king_sdag_paths(king):
    from uidag.skeleton import build_skeleton, expand_normal_form
    sdag = expand_normal_form(king, build_skeleton(king))
    paths = sdag.path_orderings()
    assert paths
    assert all(is_admissible(king, p) for p in paths)


def test_is_admissible_rejects_result_before_task(king):
    order = ["Wnd", "R1", "T1", "T2", "R2", "T3", "R3", "MP", "Wd", "Os",
             "Wr", "Wth", "Rt"]
    assert not is_admissible(king, order)


def test_is_admissible_rejects_missing_variable(king):
    order = [v for v in king.temporal_variables if v != "Rt"]
    assert not is_admissible(king, order)


def test_round_trip_serialization(king):
    assert parse_uid(serialize_uid(king)) == king
    for seed in range(15):
        uid = random_uid(seed)
        assert parse_uid(serialize_uid(uid)) == uid


def test_temporal_order_antisymmetric():
    for seed in range(20):
        po = temporal_order(random_uid(seed))
        assert not any((b, a) in po.pairs for a, b in po.pairs)
        assert not any((a, a) in po.pairs for a in po.elements)


def _closure_matrix(uid):
    """Independent transitive closure over the base precedence pairs."""
    elems = sorted(uid.temporal_variables)
    idx = {v: i for i, v in enumerate(elems)}
    n = len(elems)
    m = [[False] * n for _ in range(n)]
    decisions = set(uid.decisions)
    observables = set(uid.observables)
    for v in uid.variables:
        if v.id in decisions:
            for p in v.parents:
                if p in decisions or p in observables:
                    m[idx[p]][idx[v.id]] = True
    for o in observables:
        for d in uid.decision_ancestors(o):
            m[idx[d]][idx[o]] = True
    for k in range(n):
        for i in range(n):
            if m[i][k]:
                for j in range(n):
                    if m[k][j]:
                        m[i][j] = True
    return elems, idx, m


def test_is_admissible_matches_permutation_enumeration():
    checked = 0
    for seed in range(40):
        uid = random_uid(seed, max_decisions=3, max_chance=4)
        elems, idx, m = _closure_matrix(uid)
        if len(elems) > 7:
            continue
        checked += 1
        for perm in itertools.permutations(elems):
            ok = all(not m[idx[perm[j]]][idx[perm[i]]]
                     for i in range(len(perm)) for j in range(i + 1, len(perm)))
            assert is_admissible(uid, perm) == ok
        if checked >= 6:
            break
    assert checked >= 3
