"""Construction of the decision skeleton and its normal-form expansion.

The skeleton is built in reverse temporal order starting from the decisions
that can come last.  Every node is identified by its label together with the
set of variables performed after it, so shared futures collapse into shared
nodes.  Expansion interposes an observation node wherever completing a label
releases observables, and adds a single virtual root observation node holding
the observables with no decision ancestors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

from .model import Uid

DECISION_NODE = "decision"
OBSERVATION_NODE = "observation"


@dataclass(frozen=True)
class ParentCandidate:
    """A prospective parent group: its label and the observables it releases."""

    label: frozenset[str]
    release: frozenset[str]
    future_below: frozenset[str]

    @property
    def future(self) -> frozenset[str]:
        return self.label | self.release | self.future_below

    def sort_key(self):
        return tuple(sorted(self.label))


@dataclass(frozen=True)
class SkeletonNode:
    id: str
    label: frozenset[str]
    future_below: frozenset[str]
    released: frozenset[str]
    parents: tuple[str, ...]
    children: tuple[str, ...]

    @property
    def future(self) -> frozenset[str]:
        return self.label | self.released | self.future_below

    @property
    def key(self) -> tuple[frozenset[str], frozenset[str]]:
        return (self.label, self.future_below)


@dataclass(frozen=True)
class Skeleton:
    nodes: dict[str, SkeletonNode]
    sink: str
    sources: tuple[str, ...]

    def __iter__(self) -> Iterator[SkeletonNode]:
        return iter(self.nodes.values())

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(n.id, c) for n in self.nodes.values() for c in n.children]

    def maximal_paths(self) -> list[tuple[str, ...]]:
        """All source-to-sink node id paths."""
        out: list[tuple[str, ...]] = []

        def walk(nid: str, acc: tuple[str, ...]):
            node = self.nodes[nid]
            if not node.children:
                out.append(acc + (nid,))
                return
            for c in node.children:
                walk(c, acc + (nid,))

        for s in self.sources:
            walk(s, ())
        return out

    def label_release_paths(self, key) -> list[list[tuple[frozenset, frozenset]]]:
        """Maximal (label, released) sequences from the keyed node to the sink."""
        start = next(n for n in self.nodes.values() if n.key == key)
        out: list[list[tuple[frozenset, frozenset]]] = []

        def walk(n: SkeletonNode, acc: list):
            step = acc + [(n.label, n.released)]
            if not n.children:
                out.append(step)
                return
            for cid in n.children:
                walk(self.nodes[cid], step)

        walk(start, [])
        return out


@dataclass(frozen=True)
class SDagNode:
    id: str
    kind: str
    label: frozenset[str]
    parents: tuple[str, ...]
    children: tuple[str, ...]


@dataclass(frozen=True)
class SDag:
    nodes: dict[str, SDagNode]
    root: str

    def __iter__(self) -> Iterator[SDagNode]:
        return iter(self.nodes.values())

    def maximal_paths(self) -> list[tuple[str, ...]]:
        out: list[tuple[str, ...]] = []

        def walk(nid: str, acc: tuple[str, ...]):
            node = self.nodes[nid]
            if not node.children:
                out.append(acc + (nid,))
                return
            for c in node.children:
                walk(c, acc + (nid,))

        walk(self.root, ())
        return out

    def path_orderings(self) -> list[list[str]]:
        """Each maximal path as a flat variable sequence (labels sorted within)."""
        return [[v for nid in path for v in sorted(self.nodes[nid].label)]
                for path in self.maximal_paths()]


class _Builder:
    """Mutable construction state, frozen into a Skeleton at the end."""

    def __init__(self, uid: Uid):
        self.uid = uid
        self.info: dict[tuple[frozenset, frozenset], dict] = {}
        self.order: list[tuple[frozenset, frozenset]] = []
        self.ids: dict[tuple[frozenset, frozenset], str] = {}
        self.obs_desc = {
            d: frozenset(x for x in uid.descendants(d) if x in set(uid.observables))
            for d in uid.decisions
        }

    def add_node(self, label: frozenset[str], future_below: frozenset[str]) -> tuple:
        key = (label, future_below)
        if key not in self.info:
            fut_dec = {v for v in future_below if v in set(self.uid.decisions)}
            released = frozenset(
                o for o in self.uid.observables
                if not (self.uid.decision_ancestors(o) & fut_dec)
                and (self.uid.decision_ancestors(o) & label)
            )
            self.ids[key] = f"s{len(self.order)}"
            self.order.append(key)
            self.info[key] = {
                "key": key, "label": label, "future_below": future_below,
                "released": released,
                "future": label | released | future_below,
                "parents": [], "children": [],
            }
        return key

    def link(self, parent_key: tuple, child_key: tuple):
        pid, cid = self.ids[parent_key], self.ids[child_key]
        if cid not in self.info[parent_key]["children"]:
            self.info[parent_key]["children"].append(cid)
            self.info[child_key]["parents"].append(pid)

    def label_release_paths(self, key: tuple) -> list[list[tuple[frozenset, frozenset]]]:
        """Maximal (label, released) sequences from the node down to the sink."""
        by_id = {self.ids[k]: k for k in self.order}
        out: list[list[tuple[frozenset, frozenset]]] = []

        def walk(k: tuple, acc: list):
            node = self.info[k]
            step = acc + [(node["label"], node["released"])]
            if not node["children"]:
                out.append(step)
                return
            for cid in node["children"]:
                walk(by_id[cid], step)

        walk(key, [])
        return out

    def freeze(self) -> Skeleton:
        nodes = {}
        sink_id = self.ids[self.order[0]]
        sources = []
        all_dec = set(self.uid.decisions)
        for key in self.order:
            d = self.info[key]
            nid = self.ids[key]
            node = SkeletonNode(
                id=nid, label=d["label"], future_below=d["future_below"],
                released=d["released"], parents=tuple(d["parents"]),
                children=tuple(d["children"]),
            )
            nodes[nid] = node
            fut_dec = {v for v in node.future if v in all_dec}
            if fut_dec == all_dec:
                sources.append(nid)
        return Skeleton(nodes=nodes, sink=sink_id, sources=tuple(sources))


def find_parents(uid: Uid, node: SkeletonNode | dict,
                 obs_desc: dict[str, frozenset[str]] | None = None) -> list[ParentCandidate]:
    """Parent groups for a node: co-free decisions keyed by the observables they
    would release, with strict-superset groups removed and equal groups merged."""
    if isinstance(node, SkeletonNode):
        future = node.future
    else:
        future = node["future"]
    if obs_desc is None:
        obs_set = set(uid.observables)
        obs_desc = {d: frozenset(x for x in uid.descendants(d) if x in obs_set)
                    for d in uid.decisions}
    all_dec = set(uid.decisions)
    unplaced = all_dec - future
    dec_desc = {d: frozenset(x for x in uid.descendants(d) if x in all_dec)
                for d in unplaced}
    co_free = [d for d in sorted(unplaced) if dec_desc[d] <= future]

    release = {d: obs_desc[d] - future for d in co_free}
    kept = [d for d in co_free
            if not any(release[o] < release[d] for o in co_free if o != d)]

    groups: dict[frozenset[str], list[str]] = {}
    for d in kept:
        groups.setdefault(release[d], []).append(d)
    cands = [ParentCandidate(label=frozenset(ds), release=rel,
                             future_below=frozenset(future))
             for rel, ds in groups.items()]
    return sorted(cands, key=ParentCandidate.sort_key)


def build_skeleton(uid: Uid, trim: bool = False) -> Skeleton:
    """Grow the skeleton from the final decisions backwards, reusing nodes that
    share a label and future.  With ``trim`` set, parent candidates whose
    information cannot matter are dropped via relevance analysis."""
    b = _Builder(uid)
    free = frozenset(d for d in uid.decisions if not b.obs_desc[d])
    start = b.add_node(free, frozenset())
    queue = [start]
    all_dec = set(uid.decisions)
    trimmer: Callable | None = None
    if trim:
        from .relevance import trim_candidates
        trimmer = trim_candidates
    while queue:
        key = queue.pop(0)
        node = b.info[key]
        if all_dec <= node["future"]:
            continue
        cands = find_parents(uid, node, b.obs_desc)
        if trimmer is not None:
            cands = trimmer(uid, b, node, cands)
        for cand in cands:
            pkey = (cand.label, frozenset(node["future"]))
            fresh = pkey not in b.info
            b.add_node(*pkey)
            if fresh:
                queue.append(pkey)
            b.link(pkey, key)
    return b.freeze()


def expand_normal_form(uid: Uid, sk: Skeleton) -> SDag:
    """Insert observation nodes after every release and prepend the virtual root."""
    nodes: dict[str, dict] = {}
    order: list[str] = []

    def add(nid: str, kind: str, label: frozenset[str]):
        nodes[nid] = {"kind": kind, "label": label, "parents": [], "children": []}
        order.append(nid)

    def link(p: str, c: str):
        nodes[p]["children"].append(c)
        nodes[c]["parents"].append(p)

    for nid in sk.nodes:
        add(f"d:{nid}", DECISION_NODE, sk.nodes[nid].label)
    for nid, node in sk.nodes.items():
        if node.released and node.children:
            add(f"o:{nid}", OBSERVATION_NODE, node.released)
            link(f"d:{nid}", f"o:{nid}")
            for c in node.children:
                link(f"o:{nid}", f"d:{c}")
        elif node.released and not node.children:
            # releases at the very end of the process still have to be observed
            add(f"o:{nid}", OBSERVATION_NODE, node.released)
            link(f"d:{nid}", f"o:{nid}")
        else:
            for c in node.children:
                link(f"d:{nid}", f"d:{c}")

    no_anc = frozenset(o for o in uid.observables if not uid.decision_ancestors(o))
    add("o:root", OBSERVATION_NODE, no_anc)
    for s in sk.sources:
        link("o:root", f"d:{s}")

    frozen = {nid: SDagNode(id=nid, kind=d["kind"], label=d["label"],
                            parents=tuple(d["parents"]), children=tuple(d["children"]))
              for nid, d in nodes.items()}
    return SDag(nodes=frozen, root="o:root")


def _fmt_label(label: frozenset[str]) -> str:
    return "{" + ", ".join(sorted(label)) + "}" if label else "∅"


def export_dot(g: Skeleton | SDag) -> str:
    """Deterministic graph description, decisions as boxes and observations as
    double-bordered ellipses."""
    lines: list[str]
    if isinstance(g, Skeleton):
        lines = ["digraph skeleton {"]
        for nid in sorted(g.nodes):
            node = g.nodes[nid]
            lines.append(f'  "{nid}" [shape=box, label="{_fmt_label(node.label)}"];')
        for p, c in sorted(g.edges):
            lines.append(f'  "{p}" -> "{c}";')
    else:
        lines = ["digraph sdag {"]
        for nid in sorted(g.nodes):
            node = g.nodes[nid]
            shape = ("shape=box" if node.kind == DECISION_NODE
                     else "shape=ellipse, peripheries=2")
            lines.append(f'  "{nid}" [{shape}, label="{_fmt_label(node.label)}"];')
        edges = sorted((n.id, c) for n in g.nodes.values() for c in n.children)
        for p, c in edges:
            lines.append(f'  "{p}" -> "{c}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
