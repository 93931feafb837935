"""Self-contained strategy bundle documents.

A bundle carries the model, the solved graph, every policy and step-policy
(including their pre-argmax tables so alternatives stay inspectable), and the
achieved value.  Re-loading one and re-scoring it against the model must
reproduce the recorded value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .model import Uid, uid_from_document, uid_to_document, validate
from .potentials import UTILITY, PolicyTable, Potential
from .skeleton import SDag, SDagNode
from .solver import StepPolicy, Strategy

FORMAT = "uid-strategy-bundle"


class BundleError(Exception):
    pass


@dataclass(frozen=True)
class StrategyBundle:
    uid: Uid
    strategy: Strategy
    meta: dict


def _potential_doc(p: Potential | None) -> dict | None:
    if p is None:
        return None
    return {"domain": list(p.domain), "values": [float(x) for x in p.flat]}


def _forward_orders(strategy: Strategy) -> dict[str, list[str]]:
    by_node: dict[str, list[str]] = {}
    for pt in strategy.policies:
        by_node.setdefault(pt.at, []).append(pt.decision)
    return {nid: list(reversed(ds)) for nid, ds in by_node.items()}


def bundle_document(uid: Uid, strategy: Strategy, flags: dict | None = None) -> dict:
    forward = _forward_orders(strategy)
    nodes = []
    for nid in sorted(strategy.sdag.nodes):
        node = strategy.sdag.nodes[nid]
        entry = {
            "id": node.id,
            "kind": node.kind,
            "label": sorted(node.label),
            "children": list(node.children),
        }
        if node.kind == "decision" and node.label:
            entry["decision_order"] = forward.get(nid, sorted(node.label))
        nodes.append(entry)
    policies = []
    for pt in strategy.policies:
        policies.append({
            "at": pt.at,
            "decision": pt.decision,
            "domain": list(pt.domain),
            "cards": list(pt.cards),
            "choices": list(pt.choices),
            "values": _potential_doc(pt.values),
        })
    step_policies = []
    for sp in strategy.step_policies:
        step_policies.append({
            "at": sp.at,
            "domain": list(sp.domain),
            "cards": list(sp.cards),
            "choices": list(sp.choices),
            "children": list(sp.children),
            "branch_values": [
                {"child": child, **_potential_doc(p)}
                for child, p in zip(sp.children, sp.branch_values)
            ],
        })
    return {
        "format": FORMAT,
        "version": 1,
        "model": uid_to_document(uid),
        "sdag": {"root": strategy.sdag.root, "nodes": nodes},
        "policies": policies,
        "step_policies": step_policies,
        "meu": strategy.meu,
        "meta": {
            "tool": "uidag",
            "tool_version": __version__,
            "created": datetime.now(timezone.utc).isoformat(),
            "flags": dict(flags or {}),
        },
    }


def write_bundle(path: str, uid: Uid, strategy: Strategy,
                 flags: dict | None = None):
    with open(path, "w") as f:
        json.dump(bundle_document(uid, strategy, flags), f, indent=2)
        f.write("\n")


def _potential_from_doc(doc: dict | None, cards: dict[str, int]) -> Potential | None:
    if doc is None:
        return None
    domain = tuple(doc["domain"])
    shape = tuple(cards[v] for v in domain)
    return Potential(UTILITY, domain,
                     np.asarray(doc["values"], dtype=float).reshape(shape))


def load_bundle(doc: dict) -> StrategyBundle:
    """Rebuild the model and strategy from a bundle document, verifying it is
    self-contained."""
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise BundleError("not a strategy bundle document")
    try:
        uid = uid_from_document(doc["model"])
    except KeyError:
        raise BundleError("bundle has no model")
    problems = validate(uid)
    if problems:
        raise BundleError(f"bundle model invalid: {problems[0]}")
    cards = {v.id: v.card for v in uid.variables}

    try:
        raw_nodes = doc["sdag"]["nodes"]
        root = doc["sdag"]["root"]
    except (KeyError, TypeError):
        raise BundleError("bundle has no graph")
    nodes: dict[str, SDagNode] = {}
    parent_map: dict[str, list[str]] = {}
    for entry in raw_nodes:
        for c in entry["children"]:
            parent_map.setdefault(c, []).append(entry["id"])
    for entry in raw_nodes:
        nid = entry["id"]
        label = frozenset(entry["label"])
        bad = [v for v in label if v not in cards]
        if bad:
            raise BundleError(f"node {nid} labels unknown variable {bad[0]}")
        nodes[nid] = SDagNode(id=nid, kind=entry["kind"], label=label,
                              parents=tuple(parent_map.get(nid, ())),
                              children=tuple(entry["children"]))
    if root not in nodes:
        raise BundleError("graph root missing from node list")
    sdag = SDag(nodes=nodes, root=root)

    policies = []
    for p in doc.get("policies", []):
        if p["at"] not in nodes:
            raise BundleError(f"policy for {p['decision']} references unknown node")
        policies.append(PolicyTable(
            decision=p["decision"], domain=tuple(p["domain"]),
            cards=tuple(p["cards"]), choices=tuple(int(c) for c in p["choices"]),
            at=p["at"], values=_potential_from_doc(p.get("values"), cards)))
    recorded = {(pt.at, pt.decision) for pt in policies}
    for node in nodes.values():
        if node.kind == "decision":
            for d in node.label:
                if (node.id, d) not in recorded:
                    raise BundleError(f"missing policy table for {d} at {node.id}")
        if len(node.children) > 1:
            if not any(sp["at"] == node.id for sp in doc.get("step_policies", [])):
                raise BundleError(f"missing step policy at branching node {node.id}")

    steps = []
    for sp in doc.get("step_policies", []):
        children = tuple(sp.get("children", ()))
        branch_values = tuple(
            p for p in (_potential_from_doc(
                {k: bv[k] for k in ("domain", "values")}, cards)
                for bv in sp.get("branch_values", []))
            if p is not None)
        steps.append(StepPolicy(at=sp["at"], domain=tuple(sp["domain"]),
                                cards=tuple(sp["cards"]),
                                choices=tuple(sp["choices"]),
                                branch_values=branch_values, children=children))

    strategy = Strategy(sdag=sdag, policies=tuple(policies),
                        step_policies=tuple(steps), meu=float(doc["meu"]))
    return StrategyBundle(uid=uid, strategy=strategy, meta=dict(doc.get("meta", {})))


def read_bundle(path: str) -> StrategyBundle:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise BundleError(f"bundle is not valid JSON: {e.msg}")
    return load_bundle(doc)
