"""Requisite-variable analysis and skeleton candidate trimming.

A past variable is requisite for a decision if, conditioned on the rest of the
past, it has an active path to a utility node downstream of the decision.
The test runs on a surgered graph: informational arcs into decisions are
removed, decisions act as root chance-like nodes, and decisions later in the
ordering are replaced by chance nodes fed by their own requisite sets.

Variables that are not requisite cannot matter, so a parent candidate whose
information is never requisite for a sibling candidate can be pushed forward,
keeping the skeleton slimmer without changing the achievable value.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .model import DECISION, UTILITY, Uid, is_admissible, temporal_order

if TYPE_CHECKING:
    from .skeleton import ParentCandidate


@dataclass(frozen=True)
class RequisiteQuery:
    ordering: tuple[str, ...]
    target: str

    def check(self, uid: Uid):
        if self.target not in self.ordering:
            raise ValueError(f"target {self.target} not in ordering")
        if not is_admissible(uid, self.ordering):
            raise ValueError("ordering is not admissible")


class _Graph:
    """Small mutable digraph with the reachability primitives the tests need."""

    def __init__(self):
        self.parents: dict[str, set[str]] = {}
        self.children: dict[str, set[str]] = {}

    def add_node(self, v: str):
        self.parents.setdefault(v, set())
        self.children.setdefault(v, set())

    def add_edge(self, p: str, c: str):
        self.add_node(p)
        self.add_node(c)
        self.parents[c].add(p)
        self.children[p].add(c)

    def remove_in_edges(self, v: str):
        for p in self.parents.get(v, set()):
            self.children[p].discard(v)
        self.parents[v] = set()

    def descendants(self, v: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self.children.get(v, ()))
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            stack.extend(self.children[c])
        return seen


def _surgered_graph(uid: Uid) -> _Graph:
    g = _Graph()
    for v in uid.variables:
        g.add_node(v.id)
        if v.kind == DECISION:
            continue  # informational arcs into decisions carry no dependence
        for p in v.parents:
            g.add_edge(p, v.id)
    return g


def _reachable(g: _Graph, source: str, observed: set[str]) -> set[str]:
    """All nodes with an active path from source given the observed set.

    Standard ball-bouncing reachability: traversal state is (node, direction),
    where direction "up" means the node was entered from a child and "down"
    from a parent.
    """
    anc_of_observed: set[str] = set(observed)
    stack = [p for o in observed for p in g.parents.get(o, ())]
    while stack:
        v = stack.pop()
        if v in anc_of_observed:
            continue
        anc_of_observed.add(v)
        stack.extend(g.parents.get(v, ()))

    visited: set[tuple[str, str]] = set()
    reached: set[str] = set()
    queue: deque[tuple[str, str]] = deque([(source, "up")])
    while queue:
        v, direction = queue.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v not in observed:
            reached.add(v)
        if direction == "up":
            if v in observed:
                continue
            for p in g.parents[v]:
                queue.append((p, "up"))
            for c in g.children[v]:
                queue.append((c, "down"))
        else:
            if v not in observed:
                for c in g.children[v]:
                    queue.append((c, "down"))
            if v in anc_of_observed:
                for p in g.parents[v]:
                    queue.append((p, "up"))
    return reached


def d_connected(g: _Graph, a: str, b: str, observed: set[str]) -> bool:
    """True when an active path links a and b given the observed set."""
    if a == b:
        return True
    return b in _reachable(g, a, set(observed) - {a, b})


def _requisite_in_graph(g: _Graph, uid: Uid, target: str,
                        past: list[str]) -> frozenset[str]:
    util_down = {u for u in g.descendants(target) if uid.by_id[u].kind == UTILITY}
    if not util_down:
        return frozenset()
    out = set()
    for a in past:
        observed = set(past) - {a}
        hits = _reachable(g, a, observed)
        if hits & util_down:
            out.add(a)
    return frozenset(out)


def requisite_set(uid: Uid, q: RequisiteQuery) -> frozenset[str]:
    """Past variables the target decision's optimal policy could depend on.

    Decisions after the target are processed from last to first: each is
    analyzed and then replaced by a chance node whose parents are its own
    requisite set, so earlier analyses see future behavior through the
    information it can actually use.
    """
    q.check(uid)
    g = _surgered_graph(uid)
    pos = {v: i for i, v in enumerate(q.ordering)}
    later = [v for v in q.ordering[pos[q.target] + 1:]
             if uid.by_id[v].kind == DECISION]
    for d in reversed(later):
        past_d = list(q.ordering[:pos[d]])
        req_d = _requisite_in_graph(g, uid, d, past_d)
        g.remove_in_edges(d)
        for a in req_d:
            g.add_edge(a, d)
    past = list(q.ordering[:pos[q.target]])
    return _requisite_in_graph(g, uid, q.target, past)


def _candidate_orderings(uid: Uid, sk, node, first: "ParentCandidate",
                         second: "ParentCandidate") -> list[tuple[str, ...]]:
    """Admissible orderings placing ``first`` and its releases immediately
    before ``second``, one per maximal path below the node."""
    order = temporal_order(uid)
    rel_first = frozenset(o for o in first.release
                          if not (uid.decision_ancestors(o) & second.label))
    rel_second = (second.release | (first.release - rel_first))
    future = node["future"] if isinstance(node, dict) else node.future
    head = (set(uid.temporal_variables) - future - first.label - second.label
            - rel_first - rel_second)

    prefix: list[str] = []
    remaining = set(head)
    while remaining:
        ready = sorted(v for v in remaining
                       if not any(order.precedes(w, v) for w in remaining if w != v))
        prefix.append(ready[0])
        remaining.remove(ready[0])
    prefix += sorted(first.label) + sorted(rel_first)
    prefix += sorted(second.label) + sorted(rel_second)

    key = node["key"] if isinstance(node, dict) else node.key
    out = []
    for path in sk.label_release_paths(key):
        tail = [v for label, released in path
                for v in list(sorted(label)) + list(sorted(released))]
        out.append(tuple(prefix + tail))
    return out


def _dominates(uid: Uid, sk, node, keeper: "ParentCandidate",
               removable: "ParentCandidate") -> bool:
    """True when the keeper and everything it releases are never requisite for
    the removable candidate, across every extension below the node."""
    watched = keeper.label | keeper.release
    for ordering in _candidate_orderings(uid, sk, node, keeper, removable):
        req: set[str] = set()
        for d in sorted(removable.label):
            req |= requisite_set(uid, RequisiteQuery(ordering=ordering, target=d))
        if req & watched:
            return False
    return True


def trim_candidates(uid: Uid, sk, node, candidates: list["ParentCandidate"]
                    ) -> list["ParentCandidate"]:
    """Drop parent candidates that some other candidate makes pointless.

    A candidate may only be dropped in favor of one that stays, so mutual
    domination groups collapse to their lowest-id member instead of vanishing.
    """
    n = len(candidates)
    if n < 2:
        return list(candidates)
    edge = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                edge[i][j] = _dominates(uid, sk, node, candidates[j], candidates[i])
    reach = [row[:] for row in edge]
    for i in range(n):
        reach[i][i] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    kept = []
    claimed: set[int] = set()
    for i in range(n):
        terminal = all(reach[j][i] for j in range(n) if reach[i][j])
        if not terminal or i in claimed:
            continue
        group = [j for j in range(n) if reach[i][j] and reach[j][i]]
        claimed.update(group)
        best = min(group, key=lambda j: min(candidates[j].label))
        kept.append(candidates[best])
    return sorted(kept, key=lambda c: tuple(sorted(c.label)))
