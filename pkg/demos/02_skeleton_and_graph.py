"""Construct the decision skeleton and its normal-form expansion.

The skeleton is grown backwards from the decisions that can come last; nodes
sharing a label and future are reused, which is what keeps the graph from
exploding into a tree.
"""

from uidag import build_skeleton, expand_normal_form, export_dot
from uidag.sample_models import kings_problem, worst_case

uid = kings_problem()
sk = build_skeleton(uid)
print(f"skeleton: {len(sk.nodes)} nodes, {len(sk.edges)} edges")
print("last decision group:", sorted(sk.nodes[sk.sink].label))
print("possible first groups:", [sorted(sk.nodes[s].label) for s in sk.sources])

print("\none maximal path (earliest to latest):")
for nid in sk.maximal_paths()[0]:
    node = sk.nodes[nid]
    released = f" then observe {sorted(node.released)}" if node.released else ""
    print(f"  decide {sorted(node.label) or '(nothing)'}{released}")

sdag = expand_normal_form(uid, sk)
obs = sum(1 for n in sdag if n.kind == "observation")
print(f"\nnormal form: {len(sdag.nodes)} nodes ({obs} observation nodes), "
      f"{len(sdag.maximal_paths())} maximal paths")

print("\ngraph text for rendering (first lines):")
print("\n".join(export_dot(sk).splitlines()[:5]))

print("\nwith nothing constraining the order, the skeleton branches maximally:")
for n in range(3, 7):
    print(f"  {n} free decisions -> {len(build_skeleton(worst_case(n)).nodes)} nodes")
