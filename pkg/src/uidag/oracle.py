"""Ground-truth evaluators.

Everything here favors being obviously correct over being fast: expectations
are exact summations over the joint distribution, maximization enumerates
every eligible action, and the only concession to speed is memoizing repeated
evidence states.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod, sqrt

import numpy as np

from .model import DECISION, Uid

SCALE_LIMIT = 10_000_000


class OracleScaleError(Exception):
    pass


@dataclass(frozen=True)
class EvaluationState:
    """A point in the decision process: what has been seen and done so far."""

    evidence: tuple[tuple[str, int], ...]
    performed: frozenset[str]

    @staticmethod
    def from_dict(uid: Uid, evidence: dict[str, int]) -> "EvaluationState":
        performed = frozenset(k for k in evidence if uid.by_id[k].kind == DECISION)
        return EvaluationState(evidence=tuple(sorted(evidence.items())),
                               performed=performed)


class _Context:
    """Per-model tables shared by the recursive evaluators."""

    def __init__(self, uid: Uid):
        self.uid = uid
        self.cpt: dict[str, np.ndarray] = {}
        for c in uid.cpts:
            shape = tuple(uid.card(v) for v in c.domain)
            self.cpt[c.child] = np.asarray(c.values, dtype=float).reshape(shape)
        self.util: dict[str, np.ndarray] = {}
        for u in uid.utilities:
            shape = tuple(uid.card(v) for v in u.domain)
            self.util[u.id] = np.asarray(u.values, dtype=float).reshape(shape)
        self.cost = {d: np.asarray(v, dtype=float)
                     for d, v in uid.cost_by_decision.items()}
        self.parents = {v.id: v.parents for v in uid.variables}
        self.dec_anc = {o: uid.decision_ancestors(o) for o in uid.observables}
        self.chance_topo = self._topo_chance()
        self.chance_anc = {
            v: frozenset(a for a in uid.ancestors(v) if a in set(uid.chance))
            for v in uid.chance
        }

    def _topo_chance(self) -> tuple[str, ...]:
        chance = set(self.uid.chance)
        out: list[str] = []
        seen: set[str] = set()

        def visit(v: str):
            if v in seen:
                return
            seen.add(v)
            for p in self.parents[v]:
                if p in chance:
                    visit(p)
            out.append(v)

        for v in self.uid.chance:
            visit(v)
        return tuple(out)

    def closure(self, targets: set[str]) -> tuple[str, ...]:
        """Chance variables whose CPTs matter for the targets, in topo order."""
        keep = set()
        for t in targets:
            if t in self.chance_anc:
                keep.add(t)
                keep.update(self.chance_anc[t])
        return tuple(v for v in self.chance_topo if v in keep)

    def joint_mass(self, evidence: dict[str, int], closure: tuple[str, ...]) -> float:
        """Sum over unobserved closure configurations of the CPT product."""

        def rec(i: int, ev: dict[str, int]) -> float:
            if i == len(closure):
                return 1.0
            v = closure[i]
            arr = self.cpt[v]
            row = tuple(ev[p] for p in self.parents[v])
            if v in ev:
                return float(arr[row + (ev[v],)]) * rec(i + 1, ev)
            total = 0.0
            for s in range(self.uid.card(v)):
                p = float(arr[row + (s,)])
                if p == 0.0:
                    continue
                ev[v] = s
                total += p * rec(i + 1, ev)
                del ev[v]
            return total

        return rec(0, dict(evidence))

    def posterior(self, evidence: dict[str, int], var: str) -> np.ndarray:
        """P(var | evidence); the all-zero vector when the evidence itself has
        probability zero."""
        closure = self.closure({var} | {k for k in evidence if k in self.chance_anc})
        if prod(self.uid.card(v) for v in closure if v not in evidence) > SCALE_LIMIT:
            raise OracleScaleError("posterior enumeration too large")
        mass = np.array([
            self.joint_mass({**evidence, var: s}, closure)
            for s in range(self.uid.card(var))
        ])
        total = mass.sum()
        if total == 0.0:
            return np.zeros_like(mass)
        return mass / total

    def expected_total_utility(self, evidence: dict[str, int]) -> float:
        """Expected sum of all utility tables given full decision evidence."""
        targets = set()
        for u in self.uid.utilities:
            targets.update(v for v in u.domain if v in self.chance_anc)
        targets.update(k for k in evidence if k in self.chance_anc)
        closure = self.closure(targets)
        if prod(self.uid.card(v) for v in closure if v not in evidence) > SCALE_LIMIT:
            raise OracleScaleError("utility enumeration too large")

        def rec(i: int, ev: dict[str, int], w: float) -> tuple[float, float]:
            if i == len(closure):
                total = 0.0
                for u in self.uid.utilities:
                    total += float(self.util[u.id][tuple(ev[d] for d in u.domain)])
                return w, w * total
            v = closure[i]
            arr = self.cpt[v]
            row = tuple(ev[p] for p in self.parents[v])
            if v in ev:
                return rec(i + 1, ev, w * float(arr[row + (ev[v],)]))
            mass = acc = 0.0
            for s in range(self.uid.card(v)):
                p = float(arr[row + (s,)])
                if p == 0.0:
                    continue
                ev[v] = s
                m, a = rec(i + 1, ev, w * p)
                mass += m
                acc += a
                del ev[v]
            return mass, acc

        mass, acc = rec(0, dict(evidence), 1.0)
        if mass == 0.0:
            return 0.0
        return acc / mass


def _guard_scale(uid: Uid):
    if prod(uid.card(v) for v in uid.temporal_variables + uid.hidden) > SCALE_LIMIT:
        raise OracleScaleError("joint state space exceeds the desk-scale guard")


def _released_unobserved(ctx: _Context, evidence: dict[str, int]) -> list[str]:
    decided = {k for k in evidence if k in set(ctx.uid.decisions)}
    return [o for o in ctx.uid.observables
            if o not in evidence and ctx.dec_anc[o] <= decided]


def _eligible_decisions(ctx: _Context, evidence: dict[str, int]) -> list[str]:
    return [d for d in ctx.uid.decisions
            if d not in evidence and all(p in evidence for p in ctx.parents[d])]


def brute_meu(uid: Uid) -> float:
    """Optimal expected utility by exhaustive recursion.

    Released observables are observed first (delaying an observation can never
    help); then every eligible decision and state is maximized over, adding
    the decision's cost; the terminal value is the exact expected sum of
    utilities.
    """
    _guard_scale(uid)
    ctx = _Context(uid)
    memo: dict[frozenset, float] = {}

    def rec(evidence: dict[str, int]) -> float:
        key = frozenset(evidence.items())
        if key in memo:
            return memo[key]
        pending = _released_unobserved(ctx, evidence)
        if pending:
            o = min(pending)
            dist = ctx.posterior(evidence, o)
            val = sum(float(p) * rec({**evidence, o: s})
                      for s, p in enumerate(dist) if p > 0.0)
        else:
            open_decisions = [d for d in ctx.uid.decisions if d not in evidence]
            if open_decisions:
                best = None
                for d in _eligible_decisions(ctx, evidence):
                    for s in range(uid.card(d)):
                        v = float(ctx.cost[d][s]) + rec({**evidence, d: s})
                        if best is None or v > best:
                            best = v
                assert best is not None, "an eligible decision must exist"
                val = best
            else:
                val = ctx.expected_total_utility(evidence)
        memo[key] = val
        return val

    return rec({})


def brute_meu_full(uid: Uid) -> float:
    """Like brute_meu but the maximization may also postpone available
    observations, enumerating every interleaving.  Only for tiny models."""
    if len(uid.decisions) > 2 or len(uid.observables) > 3:
        raise OracleScaleError("full-enumeration variant is restricted to tiny models")
    _guard_scale(uid)
    ctx = _Context(uid)
    memo: dict[frozenset, float] = {}

    def rec(evidence: dict[str, int]) -> float:
        key = frozenset(evidence.items())
        if key in memo:
            return memo[key]
        open_decisions = [d for d in ctx.uid.decisions if d not in evidence]
        if not open_decisions:
            val = ctx.expected_total_utility(evidence)
        else:
            options: list[float] = []
            for o in _released_unobserved(ctx, evidence):
                dist = ctx.posterior(evidence, o)
                options.append(sum(float(p) * rec({**evidence, o: s})
                                   for s, p in enumerate(dist) if p > 0.0))
            for d in _eligible_decisions(ctx, evidence):
                for s in range(uid.card(d)):
                    options.append(float(ctx.cost[d][s]) + rec({**evidence, d: s}))
            assert options, "either an observation or a decision must be available"
            val = max(options)
        memo[key] = val
        return val

    return rec({})


class StrategyMismatchError(Exception):
    pass


def _policies_by_node(strategy) -> dict[str, list]:
    by_node: dict[str, list] = {}
    for pt in strategy.policies:
        by_node.setdefault(pt.at, []).append(pt)
    return by_node


def _steps_by_node(strategy) -> dict[str, object]:
    return {sp.at: sp for sp in strategy.step_policies}


def _table_lookup(domain, cards, flat, evidence: dict[str, int]):
    idx = 0
    for v, c in zip(domain, cards):
        if v not in evidence:
            raise StrategyMismatchError(f"policy domain variable {v} not yet known")
        idx = idx * c + evidence[v]
    return flat[idx]


def _policy_choice(pt, evidence: dict[str, int]) -> int:
    return int(_table_lookup(pt.domain, pt.cards, pt.choices, evidence))


def strategy_eu(uid: Uid, strategy) -> float:
    """Exact expected utility of following the strategy's tables.

    Observation labels take expectations, decision labels apply the recorded
    policies in forward order, branch nodes follow the recorded step-policy.
    """
    _guard_scale(uid)
    ctx = _Context(uid)
    sdag = strategy.sdag
    policies = _policies_by_node(strategy)
    steps = _steps_by_node(strategy)
    for pt in strategy.policies:
        if pt.at not in sdag.nodes:
            raise StrategyMismatchError(f"policy references unknown node {pt.at}")

    def after_label(nid: str, evidence: dict[str, int]) -> float:
        node = sdag.nodes[nid]
        if not node.children:
            return ctx.expected_total_utility(evidence)
        if len(node.children) == 1:
            return at_node(node.children[0], evidence)
        sp = steps.get(nid)
        if sp is None:
            raise StrategyMismatchError(f"branching node {nid} has no step policy")
        child = _table_lookup(sp.domain, sp.cards, sp.choices, evidence)
        if child not in node.children:
            raise StrategyMismatchError(f"step policy at {nid} chose non-child {child}")
        return at_node(child, evidence)

    def observe(nid: str, pending: list[str], evidence: dict[str, int]) -> float:
        if not pending:
            return after_label(nid, evidence)
        o = pending[0]
        dist = ctx.posterior(evidence, o)
        return sum(float(p) * observe(nid, pending[1:], {**evidence, o: s})
                   for s, p in enumerate(dist) if p > 0.0)

    def decide(nid: str, pending: list, evidence: dict[str, int]) -> float:
        if not pending:
            return after_label(nid, evidence)
        pt = pending[0]
        s = _policy_choice(pt, evidence)
        return float(ctx.cost[pt.decision][s]) + decide(
            nid, pending[1:], {**evidence, pt.decision: s})

    def at_node(nid: str, evidence: dict[str, int]) -> float:
        node = sdag.nodes[nid]
        if node.kind == "observation":
            return observe(nid, sorted(node.label), evidence)
        tables = policies.get(nid, [])
        recorded = {pt.decision for pt in tables}
        if recorded != set(node.label):
            raise StrategyMismatchError(
                f"node {nid} label {sorted(node.label)} has policies for {sorted(recorded)}")
        return decide(nid, list(reversed(tables)), evidence)

    return at_node(sdag.root, {})


def simulate(uid: Uid, strategy, n: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of the strategy value from n forward rollouts.

    Returns the sample mean and its standard error; fully deterministic for a
    fixed seed.  Rollouts are vectorized, partitioned across branch choices.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _guard_scale(uid)
    ctx = _Context(uid)
    sdag = strategy.sdag
    policies = _policies_by_node(strategy)
    steps = _steps_by_node(strategy)
    rng = np.random.default_rng(seed)

    assign = {v: np.full(n, -1, dtype=np.int64) for v in uid.chance}
    for d in uid.decisions:
        assign[d] = np.full(n, -1, dtype=np.int64)
    totals = np.zeros(n)

    def sample_chance(v: str, idx: np.ndarray):
        need = idx[assign[v][idx] < 0]
        if need.size == 0:
            return
        for p in ctx.parents[v]:
            if p in set(uid.chance):
                sample_chance(p, need)
        arr = ctx.cpt[v]
        if ctx.parents[v]:
            cols = tuple(assign[p][need] for p in ctx.parents[v])
            rows = arr[cols]
        else:
            rows = np.broadcast_to(arr, (need.size,) + arr.shape)
        cum = np.cumsum(rows, axis=1)
        u = rng.random(need.size)
        assign[v][need] = np.minimum((cum <= u[:, None]).sum(axis=1),
                                     arr.shape[-1] - 1)

    def vec_lookup(domain, cards, flat, idx: np.ndarray) -> np.ndarray:
        pos = np.zeros(idx.size, dtype=np.int64)
        for v, c in zip(domain, cards):
            pos = pos * c + assign[v][idx]
        return np.asarray(flat)[pos]

    def walk(nid: str, idx: np.ndarray):
        if idx.size == 0:
            return
        node = sdag.nodes[nid]
        if node.kind == "observation":
            for o in sorted(node.label):
                sample_chance(o, idx)
        else:
            for pt in reversed(policies.get(nid, [])):
                states = vec_lookup(pt.domain, pt.cards, np.asarray(pt.choices), idx)
                assign[pt.decision][idx] = states
                totals[idx] += ctx.cost[pt.decision][states]
        if not node.children:
            for v in ctx.chance_topo:
                sample_chance(v, idx)
            for u in uid.utilities:
                cards = tuple(uid.card(d) for d in u.domain)
                totals[idx] += vec_lookup(u.domain, cards, np.asarray(u.values), idx)
            return
        if len(node.children) == 1:
            walk(node.children[0], idx)
            return
        sp = steps[nid]
        chosen = vec_lookup(sp.domain, sp.cards, np.asarray(sp.choices, dtype=object), idx)
        for child in node.children:
            walk(child, idx[chosen == child])

    walk(sdag.root, np.arange(n))
    mean = float(totals.mean())
    stderr = float(totals.std(ddof=1) / sqrt(n)) if n > 1 else 0.0
    return mean, stderr
