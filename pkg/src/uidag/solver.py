"""Reverse-sweep elimination over the normal-form graph.

Hidden chance variables are summed out first.  The graph is then processed
from the sink upwards with one memoized result per node: observation labels
are eliminated by summation (with the division step that keeps utility
factors conditional), decision labels by maximization with a recorded policy,
and where several futures meet the probability pools must agree while the
utility pools are unified by a cellwise maximum that yields a step-policy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import prod

import numpy as np

from .model import Uid
from .potentials import (
    MERGE_TOL,
    PROBABILITY,
    UTILITY,
    PolicyTable,
    Potential,
    PotentialSets,
    _aligned,
    add,
    approx_equal,
    divide,
    envelope_max,
    is_neutral,
    max_out,
    multiply,
    sum_out,
    zero_utility,
)
from .skeleton import OBSERVATION_NODE, SDag, build_skeleton, expand_normal_form


class SolverError(Exception):
    pass


@dataclass(frozen=True)
class StepPolicy:
    """Which child node to continue with, per configuration of the past."""

    at: str
    domain: tuple[str, ...]
    cards: tuple[int, ...]
    choices: tuple[str, ...]
    branch_values: tuple[Potential, ...] = ()
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class TraceEvent:
    op: str
    subject: str
    created: tuple[Potential, ...] = ()
    policy: PolicyTable | None = None
    step: StepPolicy | None = None


@dataclass(frozen=True)
class Strategy:
    sdag: SDag
    policies: tuple[PolicyTable, ...]
    step_policies: tuple[StepPolicy, ...]
    meu: float
    trace: tuple[TraceEvent, ...] = ()

    def policy_for(self, node_id: str, decision: str) -> PolicyTable:
        for pt in self.policies:
            if pt.at == node_id and pt.decision == decision:
                return pt
        raise KeyError((node_id, decision))

    def step_for(self, node_id: str) -> StepPolicy:
        for sp in self.step_policies:
            if sp.at == node_id:
                return sp
        raise KeyError(node_id)


def base_potentials(uid: Uid) -> PotentialSets:
    """Initial pools: every CPT as a probability potential, every utility table
    plus one factor per decision with a nonzero cost vector."""
    probability = []
    for c in uid.cpts:
        shape = tuple(uid.card(v) for v in c.domain)
        arr = np.asarray(c.values, dtype=float).reshape(shape)
        probability.append(Potential(PROBABILITY, c.domain, arr, f"cpt:{c.child}"))
    utility = []
    for u in uid.utilities:
        shape = tuple(uid.card(v) for v in u.domain)
        arr = np.asarray(u.values, dtype=float).reshape(shape)
        utility.append(Potential(UTILITY, u.domain, arr, f"util:{u.id}"))
    for d in uid.decisions:
        vec = uid.cost_by_decision[d]
        if any(x != 0.0 for x in vec):
            utility.append(Potential(UTILITY, (d,), np.asarray(vec, dtype=float),
                                     f"cost:{d}"))
    return PotentialSets(probability=tuple(probability), utility=tuple(utility))


VACUOUS_TOL = 1e-12


def _prune_vacuous(p: Potential, keep: frozenset[str] = frozenset()) -> Potential:
    """Drop domain axes the table is numerically constant along.

    Marginalization leaves conditioning variables in a factor's domain even
    once the dependence has summed away; pruning keeps tables minimal and lets
    decision elimination assert that no probability factor still carries the
    decision.
    """
    if not p.domain:
        return p
    scale = float(np.max(np.abs(p.values))) if p.values.size else 0.0
    tol = VACUOUS_TOL * (1.0 + scale)
    drop = []
    for ax, v in enumerate(p.domain):
        if v in keep:
            continue
        spread = np.max(p.values, axis=ax) - np.min(p.values, axis=ax)
        if p.values.shape[ax] > 1 and float(np.max(spread)) <= tol:
            drop.append(ax)
    if not drop:
        return p
    index = tuple(0 if ax in drop else slice(None) for ax in range(len(p.domain)))
    domain = tuple(v for ax, v in enumerate(p.domain) if ax not in drop)
    return Potential(p.kind, domain, p.values[index], p.provenance)


def _eliminate_chance_ex(sets: PotentialSets, x: str) -> tuple[PotentialSets, list[Potential]]:
    with_x = [p for p in sets.probability if x in p.domain]
    util_x = [u for u in sets.utility if x in u.domain]
    if not with_x:
        if util_x:
            raise SolverError(f"chance variable {x} has utility factors but no "
                              f"probability factor")
        raise SolverError(f"chance variable {x} appears in no factor")

    product = with_x[0]
    for p in with_x[1:]:
        product = multiply(product, p)
    marginal = sum_out(product, x)
    neutral = is_neutral(marginal)

    created: list[Potential] = []
    probability = tuple(p for p in sets.probability if x not in p.domain)
    if not neutral:
        marginal = _prune_vacuous(marginal)
        probability += (marginal,)
        created.append(marginal)

    utility = tuple(u for u in sets.utility if x not in u.domain)
    if util_x:
        total = util_x[0]
        for u in util_x[1:]:
            total = add(total, u)
        combined = sum_out(multiply(product, total), x)
        new_util = combined if neutral else divide(combined, marginal)
        new_util = _prune_vacuous(new_util)
        utility += (new_util,)
        created.append(new_util)
    return PotentialSets(probability=probability, utility=utility), created


def eliminate_chance(sets: PotentialSets, x: str) -> PotentialSets:
    """Sum a chance variable out of both pools.

    The probability factors mentioning it are multiplied and marginalized;
    the utility factors mentioning it are summed, weighted by that product,
    marginalized and divided by the new marginal so they stay conditional.
    """
    return _eliminate_chance_ex(sets, x)[0]


def eliminate_decision(sets: PotentialSets, d: str) -> tuple[PotentialSets, PolicyTable]:
    """Max-marginalize a decision out of the utility pool, recording the argmax.

    The decision must no longer occur in any probability factor; a leftover
    occurrence means the sweep order is structurally wrong.
    """
    if any(d in p.domain for p in sets.probability):
        raise SolverError(f"decision in probability scope: {d}")
    with_d = [u for u in sets.utility if d in u.domain]
    if not with_d:
        table = PolicyTable(decision=d, domain=(), cards=(), choices=(0,))
        return sets, table
    total = with_d[0]
    for u in with_d[1:]:
        total = add(total, u)
    total = _prune_vacuous(total, keep=frozenset({d}))
    maxed, table = max_out(total, d)
    utility = tuple(u for u in sets.utility if d not in u.domain) + (maxed,)
    return PotentialSets(probability=sets.probability, utility=utility), table


def _probability_pools_equal(a: tuple[Potential, ...], b: tuple[Potential, ...],
                             tol: float) -> bool:
    if len(a) == len(b):
        unmatched = list(b)
        for p in a:
            hit = next((q for q in unmatched if approx_equal(p, q, tol)), None)
            if hit is None:
                break
            unmatched.remove(hit)
        else:
            if not unmatched:
                return True
    # fall back to comparing the factored products over the union domain
    def product(pool: tuple[Potential, ...]) -> Potential:
        if not pool:
            return Potential(PROBABILITY, (), np.ones(()), "one")
        out = pool[0]
        for p in pool[1:]:
            out = multiply(out, p)
        return out

    domain_cards: dict[str, int] = {}
    for p in a + b:
        domain_cards.update(p.cards)
    size = prod(domain_cards.values()) if domain_cards else 1
    if size > 50_000_000:
        return False
    pa, pb = product(a), product(b)
    union = tuple(sorted(set(pa.domain) | set(pb.domain)))
    shape = tuple(domain_cards[v] for v in union)
    va = np.broadcast_to(_aligned(pa, union), shape)
    vb = np.broadcast_to(_aligned(pb, union), shape)
    if not va.size:
        return abs(float(pa.values) - float(pb.values)) <= tol
    return float(np.max(np.abs(va - vb))) <= tol


def unify_children(results: list[PotentialSets], children: list[str],
                   at: str = "", tol: float = MERGE_TOL) -> tuple[PotentialSets, StepPolicy]:
    """Merge the results of sibling subtrees.

    The probability pools must agree (they summed out the same variables from
    the same factors); utility factors common to every branch stay factored,
    the rest are totalled per branch and unified through a cellwise maximum
    whose argmax becomes the step-policy.  Ties go to the first-listed child.
    """
    if len(results) < 2:
        raise SolverError("unify_children needs at least two results")
    first = results[0]
    for i, r in enumerate(results[1:], start=1):
        if not _probability_pools_equal(first.probability, r.probability, tol):
            raise SolverError(
                f"branch probability mismatch at {at or 'merge'} (child {children[i]})")

    def fingerprint(p: Potential):
        return (p.provenance, tuple(sorted(p.domain)))

    shared_keys = None
    for r in results:
        keys = {fingerprint(p) for p in r.utility}
        shared_keys = keys if shared_keys is None else shared_keys & keys
    shared: list[Potential] = []
    for p in first.utility:
        fp = fingerprint(p)
        if fp not in (shared_keys or set()):
            continue
        twins = [next(q for q in r.utility if fingerprint(q) == fp) for r in results]
        if all(approx_equal(p, q, 0.0) for q in twins[1:]):
            shared.append(p)
    shared_fps = {fingerprint(p) for p in shared}

    totals: list[Potential] = []
    for r in results:
        rest = [u for u in r.utility if fingerprint(u) not in shared_fps]
        if not rest:
            totals.append(zero_utility())
            continue
        t = rest[0]
        for u in rest[1:]:
            t = add(t, u)
        totals.append(_prune_vacuous(t))

    unified, choice = envelope_max(totals)
    step = StepPolicy(
        at=at, domain=choice.domain, cards=choice.cards,
        choices=tuple(children[i] for i in choice.choices),
        branch_values=tuple(totals), children=tuple(children),
    )
    merged = PotentialSets(probability=first.probability,
                           utility=tuple(shared) + (unified,))
    return merged, step


def _elimination_weight(v: str, sets: PotentialSets) -> int:
    cards: dict[str, int] = {}
    for p in sets.probability + sets.utility:
        if v in p.domain:
            cards.update(p.cards)
    cards.pop(v, None)
    return prod(cards.values()) if cards else 1


def _greedy_pick(candidates: list[str], sets: PotentialSets) -> str:
    return min(candidates, key=lambda v: (_elimination_weight(v, sets), v))


def solve(uid: Uid, sdag: SDag, record_trace: bool = False,
          label_order=None) -> Strategy:
    """Compute a maximum-expected-utility strategy over the given graph.

    Within a label and for the hidden pre-pass, variables are eliminated in a
    greedy smallest-resulting-table order (any order gives the same value);
    ``label_order`` can override it with a callable from candidate list to a
    sequence.  Node results are memoized by node id so shared futures are
    evaluated once.
    """
    trace: list[TraceEvent] = []

    def run_order(ids: list[str], sets: PotentialSets, step):
        if label_order is not None:
            for v in label_order(sorted(ids)):
                sets = step(sets, v)
            return sets
        remaining = list(ids)
        while remaining:
            v = _greedy_pick(remaining, sets)
            remaining.remove(v)
            sets = step(sets, v)
        return sets

    sets = base_potentials(uid)

    def chance_step(cur: PotentialSets, x: str) -> PotentialSets:
        nxt, created = _eliminate_chance_ex(cur, x)
        if record_trace:
            trace.append(TraceEvent(op="chance", subject=x, created=tuple(created)))
        return nxt

    sets = run_order(list(uid.hidden), sets, chance_step)

    policies: list[PolicyTable] = []
    steps: list[StepPolicy] = []
    memo: dict[str, PotentialSets] = {}

    def result(nid: str) -> PotentialSets:
        if nid in memo:
            return memo[nid]
        node = sdag.nodes[nid]
        kids = node.children
        if not kids:
            cur = sets
        elif len(kids) == 1:
            cur = result(kids[0])
        else:
            branch = [result(k) for k in kids]
            cur, step = unify_children(branch, list(kids), at=nid)
            steps.append(step)
            if record_trace:
                trace.append(TraceEvent(op="merge", subject=nid,
                                        created=(cur.utility[-1],), step=step))

        if node.kind == OBSERVATION_NODE:
            cur = run_order(sorted(node.label), cur, chance_step)
        else:
            def decision_step(inner: PotentialSets, d: str) -> PotentialSets:
                nxt, table = eliminate_decision(inner, d)
                table = replace(table, at=nid)
                policies.append(table)
                if record_trace:
                    created = (nxt.utility[-1],) if nxt is not inner else ()
                    trace.append(TraceEvent(op="decision", subject=d,
                                            created=created, policy=table))
                return nxt

            cur = run_order(sorted(node.label), cur, decision_step)
        memo[nid] = cur
        return cur

    final = result(sdag.root)
    for p in final.probability:
        if not is_neutral(p, 1e-9):
            raise SolverError(f"leftover probability factor over {p.domain}")
    meu = 0.0
    for u in final.utility:
        if u.domain:
            raise SolverError(f"leftover utility factor over {u.domain}")
        meu += float(u.values)
    return Strategy(sdag=sdag, policies=tuple(policies),
                    step_policies=tuple(steps), meu=meu, trace=tuple(trace))


def solve_model(uid: Uid, trim: bool = False, record_trace: bool = False) -> Strategy:
    """Build the skeleton, expand it, and solve in one call."""
    sk = build_skeleton(uid, trim=trim)
    sdag = expand_normal_form(uid, sk)
    return solve(uid, sdag, record_trace=record_trace)
