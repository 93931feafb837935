"""Core model types for unconstrained influence diagrams.

A diagram is a DAG over decision variables, chance variables (observable or
hidden), and utility variables.  The quantitative part consists of one CPT per
chance variable, one table per utility variable, and an optional additive cost
vector per decision.  Tables are stored flat in row-major order with the last
domain variable varying fastest.

The on-disk document format is a JSON object with keys ``variables``, ``cpts``,
``utilities`` and ``costs``; see ``parse_uid`` / ``serialize_uid``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import prod

DECISION = "decision"
OBSERVABLE = "chance-observable"
HIDDEN = "chance-hidden"
UTILITY = "utility"

KINDS = (DECISION, OBSERVABLE, HIDDEN, UTILITY)
CHANCE_KINDS = (OBSERVABLE, HIDDEN)

CPT_TOL = 1e-12


class UidError(Exception):
    """Base class for model errors."""


class UidFormatError(UidError):
    """The document cannot be interpreted at all (syntax or shape)."""


class ValidationError(UidError):
    """A structurally readable model violates its invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class Variable:
    id: str
    kind: str
    states: tuple[str, ...] = ()
    parents: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)

    @property
    def card(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Cpt:
    """Conditional table for a chance variable.

    The domain is the declared parent order followed by the child; ``values``
    holds one probability per domain configuration, child varying fastest.
    """

    child: str
    domain: tuple[str, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class UtilityFn:
    id: str
    domain: tuple[str, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class Uid:
    variables: tuple[Variable, ...]
    cpts: tuple[Cpt, ...] = ()
    utilities: tuple[UtilityFn, ...] = ()
    costs: tuple[tuple[str, tuple[float, ...]], ...] = ()

    @cached_property
    def by_id(self) -> dict[str, Variable]:
        return {v.id: v for v in self.variables}

    @cached_property
    def decisions(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables if v.kind == DECISION)

    @cached_property
    def observables(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables if v.kind == OBSERVABLE)

    @cached_property
    def hidden(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables if v.kind == HIDDEN)

    @cached_property
    def chance(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables if v.kind in CHANCE_KINDS)

    @cached_property
    def utility_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables if v.kind == UTILITY)

    @cached_property
    def temporal_variables(self) -> tuple[str, ...]:
        """Decisions and observables, in declaration order."""
        return tuple(
            v.id for v in self.variables if v.kind in (DECISION, OBSERVABLE)
        )

    @cached_property
    def cpt_by_child(self) -> dict[str, Cpt]:
        return {c.child: c for c in self.cpts}

    @cached_property
    def utility_by_id(self) -> dict[str, UtilityFn]:
        return {u.id: u for u in self.utilities}

    @cached_property
    def cost_by_decision(self) -> dict[str, tuple[float, ...]]:
        out = {d: tuple(0.0 for _ in self.by_id[d].states) for d in self.decisions}
        out.update({d: v for d, v in self.costs})
        return out

    @cached_property
    def children_map(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {v.id: [] for v in self.variables}
        for v in self.variables:
            for p in v.parents:
                if p in kids:
                    kids[p].append(v.id)
        return {k: tuple(v) for k, v in kids.items()}

    def card(self, var: str) -> int:
        return self.by_id[var].card

    def ancestors(self, var: str) -> frozenset[str]:
        seen: set[str] = set()
        stack = list(self.by_id[var].parents)
        while stack:
            p = stack.pop()
            if p in seen or p not in self.by_id:
                continue
            seen.add(p)
            stack.extend(self.by_id[p].parents)
        return frozenset(seen)

    def descendants(self, var: str) -> frozenset[str]:
        seen: set[str] = set()
        stack = list(self.children_map.get(var, ()))
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            stack.extend(self.children_map[c])
        return frozenset(seen)

    def decision_ancestors(self, var: str) -> frozenset[str]:
        return frozenset(a for a in self.ancestors(var) if a in self.by_id
                         and self.by_id[a].kind == DECISION)


@dataclass(frozen=True)
class PartialOrder:
    """Irreflexive, transitively closed precedence over decisions and observables."""

    elements: frozenset[str]
    pairs: frozenset[tuple[str, str]]

    def precedes(self, x: str, y: str) -> bool:
        return (x, y) in self.pairs

    def is_linear_extension(self, seq: tuple[str, ...] | list[str]) -> bool:
        pos = {v: i for i, v in enumerate(seq)}
        return all(pos[a] < pos[b] for a, b in self.pairs if a in pos and b in pos)


# ---------------------------------------------------------------------------
# document parsing / serialization


def load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise UidFormatError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(doc, dict):
        raise UidFormatError("top-level value must be an object")
    return doc


def _as_float_tuple(raw, where: str) -> tuple[float, ...]:
    if not isinstance(raw, list):
        raise UidFormatError(f"{where}: 'values' must be an array")
    try:
        return tuple(float(x) for x in raw)
    except (TypeError, ValueError):
        raise UidFormatError(f"{where}: non-numeric table entry")


def uid_from_document(doc: dict) -> Uid:
    """Build a Uid from a parsed document without enforcing model invariants.

    Raises UidFormatError only for problems that prevent construction
    (missing keys, duplicate ids, malformed entries).  Everything else is
    left for ``validate``.
    """
    raw_vars = doc.get("variables")
    if not isinstance(raw_vars, list) or not raw_vars:
        raise UidFormatError("missing or empty 'variables' list")
    variables = []
    seen: set[str] = set()
    for i, rv in enumerate(raw_vars):
        if not isinstance(rv, dict) or "id" not in rv:
            raise UidFormatError(f"variables[{i}]: each entry needs an 'id'")
        vid = str(rv["id"])
        if vid in seen:
            raise UidFormatError(f"duplicate variable id '{vid}'")
        seen.add(vid)
        kind = str(rv.get("kind", ""))
        states = tuple(str(s) for s in rv.get("states", []) or [])
        parents = tuple(str(p) for p in rv.get("parents", []) or [])
        variables.append(Variable(id=vid, kind=kind, states=states,
                                  parents=parents, name=str(rv.get("name", "")) or vid))

    cpts = []
    seen_cpt: set[str] = set()
    for i, rc in enumerate(doc.get("cpts", []) or []):
        if not isinstance(rc, dict) or "child" not in rc:
            raise UidFormatError(f"cpts[{i}]: each entry needs a 'child'")
        child = str(rc["child"])
        if child not in seen:
            raise UidFormatError(f"cpts[{i}]: unknown variable '{child}'")
        if child in seen_cpt:
            raise UidFormatError(f"duplicate CPT for '{child}'")
        seen_cpt.add(child)
        var = next(v for v in variables if v.id == child)
        domain = var.parents + (child,)
        cpts.append(Cpt(child=child, domain=domain,
                        values=_as_float_tuple(rc.get("values"), f"cpts[{i}]")))

    utilities = []
    for i, ru in enumerate(doc.get("utilities", []) or []):
        if not isinstance(ru, dict) or "id" not in ru:
            raise UidFormatError(f"utilities[{i}]: each entry needs an 'id'")
        uid_ = str(ru["id"])
        if uid_ not in seen:
            raise UidFormatError(f"utilities[{i}]: unknown variable '{uid_}'")
        domain = tuple(str(d) for d in ru.get("domain", []) or [])
        utilities.append(UtilityFn(id=uid_, domain=domain,
                                   values=_as_float_tuple(ru.get("values"), f"utilities[{i}]")))

    costs = []
    raw_costs = doc.get("costs", {}) or {}
    if not isinstance(raw_costs, dict):
        raise UidFormatError("'costs' must be an object mapping decision id to vector")
    for d, vec in raw_costs.items():
        if d not in seen:
            raise UidFormatError(f"costs: unknown variable '{d}'")
        costs.append((str(d), _as_float_tuple(vec, f"costs['{d}']")))

    return Uid(variables=tuple(variables), cpts=tuple(cpts),
               utilities=tuple(utilities), costs=tuple(sorted(costs)))


def parse_uid(text: str) -> Uid:
    """Parse a model document and reject it unless it passes validation."""
    uid = uid_from_document(load_document(text))
    violations = validate(uid)
    if violations:
        raise ValidationError(violations)
    return uid


def uid_to_document(uid: Uid) -> dict:
    variables = []
    for v in uid.variables:
        entry: dict = {"id": v.id, "kind": v.kind}
        if v.name != v.id:
            entry["name"] = v.name
        if v.kind != UTILITY:
            entry["states"] = list(v.states)
        entry["parents"] = list(v.parents)
        variables.append(entry)
    doc: dict = {
        "variables": variables,
        "cpts": [{"child": c.child, "values": list(c.values)} for c in uid.cpts],
        "utilities": [{"id": u.id, "domain": list(u.domain), "values": list(u.values)}
                      for u in uid.utilities],
    }
    costs = {d: list(vec) for d, vec in uid.costs if any(x != 0.0 for x in vec)}
    if costs:
        doc["costs"] = costs
    return doc


def serialize_uid(uid: Uid) -> str:
    return json.dumps(uid_to_document(uid), indent=2)


# ---------------------------------------------------------------------------
# validation


def _has_cycle(uid: Uid) -> bool:
    state: dict[str, int] = {}

    def visit(v: str) -> bool:
        mark = state.get(v, 0)
        if mark == 1:
            return True
        if mark == 2:
            return False
        state[v] = 1
        for c in uid.children_map.get(v, ()):
            if visit(c):
                return True
        state[v] = 2
        return False

    return any(visit(v.id) for v in uid.variables if state.get(v.id, 0) == 0)


def validate(uid: Uid) -> list[str]:
    """Return all invariant violations, empty when the model is sound."""
    out: list[str] = []
    ids = set(uid.by_id)

    for v in uid.variables:
        if v.kind not in KINDS:
            out.append(f"variable {v.id} has unknown kind '{v.kind}'")
            continue
        if v.kind == UTILITY:
            if v.states:
                out.append(f"utility {v.id} must not declare states")
        elif len(v.states) < 2:
            out.append(f"variable {v.id} needs at least 2 states")
        for p in v.parents:
            if p not in ids:
                out.append(f"variable {v.id} has unknown parent {p}")
            elif p == v.id:
                out.append(f"variable {v.id} is its own parent")

    dangling = any("unknown parent" in s or "unknown kind" in s for s in out)
    if not dangling and _has_cycle(uid):
        out.append("arc set contains a cycle")
        return out
    if dangling:
        return out

    for v in uid.variables:
        if v.kind == UTILITY and uid.children_map[v.id]:
            for c in uid.children_map[v.id]:
                out.append(f"utility {v.id} has child {c}")
        if v.kind == DECISION:
            for p in v.parents:
                pk = uid.by_id[p].kind
                if pk not in (DECISION, OBSERVABLE):
                    out.append(f"decision {v.id} has non-observable parent {p}")

    cpt_children = set(uid.cpt_by_child)
    for v in uid.variables:
        if v.kind in CHANCE_KINDS and v.id not in cpt_children:
            out.append(f"chance variable {v.id} has no CPT")
        if v.kind not in CHANCE_KINDS and v.id in cpt_children:
            out.append(f"variable {v.id} is not a chance variable but has a CPT")

    for cpt in uid.cpts:
        if any(d not in ids for d in cpt.domain):
            continue
        expected = prod(uid.card(d) for d in cpt.domain)
        if len(cpt.values) != expected:
            out.append(f"CPT for {cpt.child} has {len(cpt.values)} values, expected {expected}")
            continue
        if any(x < 0 for x in cpt.values):
            out.append(f"CPT for {cpt.child} has negative entries")
            continue
        c = uid.card(cpt.child)
        for b in range(len(cpt.values) // c):
            s = sum(cpt.values[b * c:(b + 1) * c])
            if abs(s - 1.0) > CPT_TOL:
                out.append(f"CPT not normalized for {cpt.child}: block {b} sums to {s!r}")
                break

    declared_utils = {u.id for u in uid.utilities}
    for v in uid.variables:
        if v.kind == UTILITY and v.id not in declared_utils:
            out.append(f"utility {v.id} has no table")
    for u in uid.utilities:
        v = uid.by_id.get(u.id)
        if v is None or v.kind != UTILITY:
            out.append(f"utility table for {u.id} does not match a utility variable")
            continue
        if set(u.domain) != set(v.parents):
            out.append(f"utility {u.id} domain {sorted(u.domain)} does not match parents")
            continue
        if any(uid.by_id[d].kind == UTILITY for d in u.domain):
            out.append(f"utility {u.id} domain contains a utility variable")
            continue
        expected = prod(uid.card(d) for d in u.domain)
        if len(u.values) != expected:
            out.append(f"utility {u.id} has {len(u.values)} values, expected {expected}")
        elif not all(x == x and abs(x) != float("inf") for x in u.values):
            out.append(f"utility {u.id} has non-finite entries")

    for d, vec in uid.costs:
        v = uid.by_id.get(d)
        if v is None or v.kind != DECISION:
            out.append(f"cost vector attached to non-decision {d}")
        elif len(vec) != v.card:
            out.append(f"cost vector for {d} has {len(vec)} entries, expected {v.card}")

    return out


# ---------------------------------------------------------------------------
# temporal structure


@lru_cache(maxsize=512)
def temporal_order(uid: Uid) -> PartialOrder:
    """Induced precedence: informational arcs into decisions, plus each decision
    before every observable it is an ancestor of, transitively closed."""
    elems = set(uid.temporal_variables)
    succ: dict[str, set[str]] = {v: set() for v in elems}
    for v in uid.variables:
        if v.kind == DECISION:
            for p in v.parents:
                pv = uid.by_id.get(p)
                if pv is not None and pv.kind in (DECISION, OBSERVABLE):
                    succ[p].add(v.id)
    for o in uid.observables:
        for d in uid.decision_ancestors(o):
            succ[d].add(o)

    pairs: set[tuple[str, str]] = set()
    for x in elems:
        seen: set[str] = set()
        stack = list(succ[x])
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            stack.extend(succ[y])
        pairs.update((x, y) for y in seen if y != x)
    return PartialOrder(elements=frozenset(elems), pairs=frozenset(pairs))


def released_observables(uid: Uid, decided: set[str] | frozenset[str]) -> frozenset[str]:
    """Observables whose decision ancestors all lie in ``decided``."""
    decided = set(decided)
    extra = decided - set(uid.decisions)
    if extra:
        raise ValueError(f"not decision ids: {sorted(extra)}")
    return frozenset(o for o in uid.observables
                     if uid.decision_ancestors(o) <= decided)


def is_admissible(uid: Uid, sequence) -> bool:
    """True when the sequence is a permutation of all decisions and observables
    that extends the induced partial temporal order."""
    seq = list(sequence)
    if sorted(seq) != sorted(uid.temporal_variables):
        return False
    return temporal_order(uid).is_linear_extension(seq)
