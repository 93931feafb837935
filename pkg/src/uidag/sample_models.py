"""Ready-made models: small hand-built fixtures, the royal wooer scenario,
worst-case fully unconstrained families, and a seeded random generator."""

from __future__ import annotations

import numpy as np

from .model import (
    DECISION,
    HIDDEN,
    OBSERVABLE,
    UTILITY,
    Cpt,
    Uid,
    UtilityFn,
    Variable,
    validate,
)


def _build(variables, cpts, utilities, costs=()) -> Uid:
    uid = Uid(variables=tuple(variables), cpts=tuple(cpts),
              utilities=tuple(utilities), costs=tuple(sorted(costs)))
    problems = validate(uid)
    if problems:
        raise AssertionError(f"fixture is invalid: {problems}")
    return uid


def _cpt(uid_vars: dict[str, Variable], child: str, values) -> Cpt:
    var = uid_vars[child]
    return Cpt(child=child, domain=var.parents + (child,),
               values=tuple(float(x) for x in np.asarray(values).reshape(-1)))


def single_decision(payoff=(0.0, 10.0)) -> Uid:
    """One binary decision with a direct payoff, the smallest useful model."""
    variables = [
        Variable("D", DECISION, states=("a", "b")),
        Variable("U", UTILITY, parents=("D",)),
    ]
    return _build(variables, [],
                  [UtilityFn("U", ("D",), tuple(float(x) for x in payoff))])


def coin_match(hidden: bool = False) -> Uid:
    """Guess a fair coin; worth 1 on a match.  Observing the coin first makes
    the game worth 1.0, guessing blind makes it worth 0.5."""
    variables = [
        Variable("X", HIDDEN if hidden else OBSERVABLE, states=("heads", "tails")),
        Variable("D", DECISION, states=("heads", "tails")),
        Variable("U", UTILITY, parents=("X", "D")),
    ]
    by_id = {v.id: v for v in variables}
    return _build(
        variables,
        [_cpt(by_id, "X", [0.5, 0.5])],
        [UtilityFn("U", ("X", "D"), (1.0, 0.0, 0.0, 1.0))],
    )


def chain_release() -> Uid:
    """Decision, then a hidden link, then an observable: the observable is only
    released once the decision is taken."""
    variables = [
        Variable("D1", DECISION, states=("no", "yes")),
        Variable("A", HIDDEN, states=("f", "t"), parents=("D1",)),
        Variable("B", OBSERVABLE, states=("f", "t"), parents=("A",)),
        Variable("U", UTILITY, parents=("B",)),
    ]
    by_id = {v.id: v for v in variables}
    return _build(
        variables,
        [_cpt(by_id, "A", [[0.9, 0.1], [0.2, 0.8]]),
         _cpt(by_id, "B", [[0.7, 0.3], [0.1, 0.9]])],
        [UtilityFn("U", ("B",), (0.0, 4.0))],
    )


def direct_edge_pair() -> Uid:
    """Two ordered decisions sharing one observable child; the earlier decision
    releases nothing on its own, giving a direct decision-to-decision edge."""
    variables = [
        Variable("D1", DECISION, states=("a", "b")),
        Variable("D2", DECISION, states=("a", "b"), parents=("D1",)),
        Variable("O", OBSERVABLE, states=("f", "t"), parents=("D1", "D2")),
        Variable("U", UTILITY, parents=("O",)),
    ]
    by_id = {v.id: v for v in variables}
    return _build(
        variables,
        [_cpt(by_id, "O", [[[0.8, 0.2], [0.4, 0.6]], [[0.5, 0.5], [0.1, 0.9]]])],
        [UtilityFn("U", ("O",), (0.0, 2.0))],
    )


def branching_example() -> Uid:
    """Four decisions where the middle two can run in either order.

    The first decision drives a hidden variable whose observable trace informs
    the middle decisions; each middle decision releases its own observable,
    both of which feed the variable that the last decision needs.  The solved
    graph forks after the first observation and reconverges before the last
    decision.
    """
    variables = [
        Variable("D1", DECISION, states=("0", "1")),
        Variable("A", HIDDEN, states=("0", "1"), parents=("D1",)),
        Variable("B", OBSERVABLE, states=("0", "1"), parents=("A",)),
        Variable("D2", DECISION, states=("0", "1"), parents=("B",)),
        Variable("D3", DECISION, states=("0", "1"), parents=("B",)),
        Variable("C", OBSERVABLE, states=("0", "1"), parents=("D2",)),
        Variable("E", OBSERVABLE, states=("0", "1"), parents=("D3",)),
        Variable("F", HIDDEN, states=("0", "1"), parents=("C", "E")),
        Variable("D4", DECISION, states=("0", "1"), parents=("C", "E")),
        Variable("U1", UTILITY, parents=("D1",)),
        Variable("U2", UTILITY, parents=("A", "D2")),
        Variable("U3", UTILITY, parents=("D3",)),
        Variable("U4", UTILITY, parents=("F", "D4")),
    ]
    by_id = {v.id: v for v in variables}
    return _build(
        variables,
        [
            _cpt(by_id, "A", [[0.8, 0.2], [0.3, 0.7]]),
            _cpt(by_id, "B", [[0.9, 0.1], [0.2, 0.8]]),
            _cpt(by_id, "C", [[0.6, 0.4], [0.25, 0.75]]),
            _cpt(by_id, "E", [[0.7, 0.3], [0.1, 0.9]]),
            _cpt(by_id, "F", [[[0.85, 0.15], [0.45, 0.55]],
                              [[0.6, 0.4], [0.05, 0.95]]]),
        ],
        [
            UtilityFn("U1", ("D1",), (0.0, 1.0)),
            UtilityFn("U2", ("A", "D2"), (4.0, 0.0, 1.0, 3.0)),
            UtilityFn("U3", ("D3",), (0.5, 0.0)),
            UtilityFn("U4", ("F", "D4"), (0.0, 6.0, 7.0, 2.0)),
        ],
    )


def kings_problem() -> Uid:
    """The royal wooer scenario: three two-option tasks with observable results,
    a marriage decision once all results are in, war and retirement decisions
    on the side, and wealth, offspring and war outcomes feeding the utilities.

    The exact arc choices not forced by the story are fixture choices.
    """
    variables = [
        Variable("Wnd", OBSERVABLE, states=("common", "noble"),
                 name="wooer's noble descent"),
        Variable("QW", HIDDEN, states=("low", "high"), parents=("Wnd",),
                 name="quality of wooer"),
        Variable("T1", DECISION, states=("unicorn", "dragon"), name="task 1"),
        Variable("T2", DECISION, states=("tomb", "tower"), name="task 2"),
        Variable("T3", DECISION, states=("river", "mountain"), name="task 3"),
        Variable("R1", OBSERVABLE, states=("fail", "success"),
                 parents=("T1", "QW"), name="result of task 1"),
        Variable("R2", OBSERVABLE, states=("fail", "success"),
                 parents=("T2", "QW"), name="result of task 2"),
        Variable("R3", OBSERVABLE, states=("fail", "success"),
                 parents=("T3", "QW"), name="result of task 3"),
        Variable("MP", DECISION, states=("no", "yes"),
                 parents=("R1", "R2", "R3"), name="marry princess"),
        Variable("Wd", OBSERVABLE, states=("modest", "grand"),
                 parents=("MP",), name="wedding"),
        Variable("Os", OBSERVABLE, states=("none", "heir"),
                 parents=("MP", "QW"), name="offspring"),
        Variable("QG", HIDDEN, states=("low", "high"), parents=("QW",),
                 name="quality of general"),
        Variable("Wr", DECISION, states=("peace", "war"), name="war"),
        Variable("Wth", OBSERVABLE, states=("poor", "rich"),
                 parents=("MP", "Wr", "QG"), name="wealth"),
        Variable("Rt", DECISION, states=("continue", "retire"),
                 parents=("Wr",), name="retire"),
        Variable("U_dyn", UTILITY, parents=("MP", "Os"), name="dynasty value"),
        Variable("U_war", UTILITY, parents=("Wr", "QG"), name="war value"),
        Variable("U_ret", UTILITY, parents=("Rt", "Wth"), name="retirement value"),
    ]
    by_id = {v.id: v for v in variables}
    cpts = [
        _cpt(by_id, "Wnd", [0.7, 0.3]),
        _cpt(by_id, "QW", [[0.65, 0.35], [0.25, 0.75]]),
        # the two options of each task differ in how much the result reveals
        _cpt(by_id, "R1", [[[0.55, 0.45], [0.25, 0.75]], [[0.9, 0.1], [0.1, 0.9]]]),
        _cpt(by_id, "R2", [[[0.5, 0.5], [0.2, 0.8]], [[0.7, 0.3], [0.4, 0.6]]]),
        _cpt(by_id, "R3", [[[0.45, 0.55], [0.3, 0.7]], [[0.8, 0.2], [0.15, 0.85]]]),
        _cpt(by_id, "Wd", [[1.0, 0.0], [0.2, 0.8]]),
        _cpt(by_id, "Os", [[1.0, 0.0], [1.0, 0.0], [0.75, 0.25], [0.1, 0.9]]),
        _cpt(by_id, "QG", [[0.85, 0.15], [0.3, 0.7]]),
        _cpt(by_id, "Wth", [
            # (MP, Wr, QG) -> P(poor), P(rich)
            [[[0.55, 0.45], [0.5, 0.5]], [[0.85, 0.15], [0.3, 0.7]]],
            [[[0.45, 0.55], [0.4, 0.6]], [[0.8, 0.2], [0.2, 0.8]]],
        ]),
    ]
    utilities = [
        UtilityFn("U_dyn", ("MP", "Os"), (2.0, 2.0, -4.0, 12.0)),
        UtilityFn("U_war", ("Wr", "QG"), (3.0, 3.0, -10.0, 10.0)),
        UtilityFn("U_ret", ("Rt", "Wth"), (0.0, 0.0, -3.0, 6.0)),
    ]
    costs = [("Wr", (0.0, -2.0))]
    return _build(variables, cpts, utilities, costs)


def worst_case(n: int, seed: int = 0) -> Uid:
    """Fully unconstrained family: n binary decisions, each with one private
    observable child, and one joint utility over all the observables.  Nothing
    orders the decisions, so the skeleton branches maximally."""
    rng = np.random.default_rng(seed)
    variables = []
    cpts = []
    for i in range(1, n + 1):
        variables.append(Variable(f"D{i}", DECISION, states=("a", "b")))
        variables.append(Variable(f"O{i}", OBSERVABLE, states=("f", "t"),
                                  parents=(f"D{i}",)))
    by_id = {v.id: v for v in variables}
    for i in range(1, n + 1):
        p = rng.uniform(0.2, 0.8, size=2)
        cpts.append(_cpt(by_id, f"O{i}", [[p[0], 1 - p[0]], [p[1], 1 - p[1]]]))
    domain = tuple(f"O{i}" for i in range(1, n + 1))
    values = tuple(float(x) for x in rng.uniform(0.0, 10.0, size=2 ** n))
    variables.append(Variable("U", UTILITY, parents=domain))
    return _build(variables, cpts, [UtilityFn("U", domain, values)])


def random_uid(seed: int, max_decisions: int = 3, max_chance: int = 5,
               max_states: int = 3, max_utilities: int = 2) -> Uid:
    """Seeded random model within the given size budget.

    Covers the interesting corners: hidden and observable chance variables,
    informational arcs, occasional deterministic CPT rows, decision costs,
    and scalar utilities.
    """
    rng = np.random.default_rng(seed)
    n_dec = int(rng.integers(1, max_decisions + 1))
    n_chance = int(rng.integers(1, max_chance + 1))
    n_util = int(rng.integers(1, max_utilities + 1))

    slots = ["d"] * n_dec + ["c"] * n_chance
    # bias decisions towards the front so chance variables can hang off them
    slots.sort(key=lambda s: rng.random() + (0.4 if s == "c" else 0.0))
    variables: list[Variable] = []
    d_i = c_i = 0
    for slot in slots:
        card = int(rng.integers(2, max_states + 1))
        states = tuple(f"s{k}" for k in range(card))
        earlier = list(variables)
        if slot == "d":
            d_i += 1
            allowed = [v.id for v in earlier if v.kind in (DECISION, OBSERVABLE)]
            k = min(len(allowed), int(rng.integers(0, 2)))
            parents = tuple(sorted(str(x) for x in
                                   rng.choice(allowed, size=k, replace=False))) if k else ()
            variables.append(Variable(f"D{d_i}", DECISION, states=states,
                                      parents=parents))
        else:
            c_i += 1
            kind = OBSERVABLE if rng.random() < 0.65 else HIDDEN
            allowed = [v.id for v in earlier]
            k = min(len(allowed), int(rng.integers(0, 3)))
            chosen = set(str(x) for x in rng.choice(allowed, size=k, replace=False)) \
                if k else set()
            # bias towards decision parents so observables get released mid-process
            decisions_so_far = [v.id for v in earlier if v.kind == DECISION]
            if decisions_so_far and rng.random() < 0.75:
                chosen.add(str(rng.choice(decisions_so_far)))
            variables.append(Variable(f"C{c_i}", kind, states=states,
                                      parents=tuple(sorted(chosen))))

    by_id = {v.id: v for v in variables}
    cpts = []
    for v in variables:
        if v.kind not in (OBSERVABLE, HIDDEN):
            continue
        rows = int(np.prod([by_id[p].card for p in v.parents])) if v.parents else 1
        table = []
        for _ in range(rows):
            if rng.random() < 0.15:
                row = np.zeros(v.card)
                row[int(rng.integers(0, v.card))] = 1.0
            else:
                row = rng.random(v.card) + 0.05
                row = row / row.sum()
            table.extend(float(x) for x in row)
        cpts.append(Cpt(child=v.id, domain=v.parents + (v.id,), values=tuple(table)))

    utilities = []
    non_util = [v.id for v in variables]
    for u in range(1, n_util + 1):
        k = int(rng.integers(0, min(3, len(non_util)) + 1))
        domain = tuple(sorted(str(x) for x in
                              rng.choice(non_util, size=k, replace=False))) if k else ()
        size = int(np.prod([by_id[d].card for d in domain])) if domain else 1
        values = tuple(float(x) for x in rng.uniform(-5.0, 10.0, size=size))
        variables.append(Variable(f"U{u}", UTILITY, parents=domain))
        utilities.append(UtilityFn(f"U{u}", domain, values))

    costs = []
    for v in variables:
        if v.kind == DECISION and rng.random() < 0.3:
            costs.append((v.id, tuple(float(x) for x in rng.uniform(-3.0, 3.0,
                                                                     size=v.card))))
    return _build(variables, cpts, utilities, costs)
