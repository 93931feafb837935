"""Build a model, validate it, and inspect its temporal structure.

The royal wooer scenario: three two-option tasks with observable results, a
marriage decision once all results are in, and war/retirement decisions that
interleave freely with the tasks.
"""

from uidag import (
    is_admissible,
    parse_uid,
    released_observables,
    serialize_uid,
    temporal_order,
    validate,
)
from uidag.sample_models import kings_problem

uid = kings_problem()
print(f"{len(uid.variables)} variables: {len(uid.decisions)} decisions, "
      f"{len(uid.observables)} observables, {len(uid.hidden)} hidden, "
      f"{len(uid.utility_ids)} utilities")

print("violations:", validate(uid) or "none")

# the document format round-trips exactly
assert parse_uid(serialize_uid(uid)) == uid
print("document round trip: ok")

po = temporal_order(uid)
print(f"\ninduced partial order has {len(po.pairs)} pairs, e.g.")
for pair in sorted(po.pairs)[:6]:
    print("  %s comes before %s" % pair)

print("\nnothing is observable until a decision releases it:")
print("  start:", sorted(released_observables(uid, set())))
print("  after T1:", sorted(released_observables(uid, {'T1'})))
print("  after all:", sorted(released_observables(uid, set(uid.decisions))))

good = ["Wnd", "T1", "R1", "T2", "R2", "T3", "R3", "MP", "Wd", "Os",
        "Wr", "Wth", "Rt"]
bad = ["Wnd", "R1", "T1", "T2", "R2", "T3", "R3", "MP", "Wd", "Os",
       "Wr", "Wth", "Rt"]
print("\ntask-then-result ordering admissible:", is_admissible(uid, good))
print("result-before-task ordering admissible:", is_admissible(uid, bad))
