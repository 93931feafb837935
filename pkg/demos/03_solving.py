"""Solve a model and read the strategy: decision policies, step-policies, and
the maximum expected utility, cross-checked against exhaustive evaluation."""

from uidag import brute_meu, solve_model, strategy_eu
from uidag.sample_models import branching_example, coin_match

# seeing the coin before guessing doubles the value of the game
for hidden in (False, True):
    uid = coin_match(hidden=hidden)
    s = solve_model(uid)
    print(f"coin {'hidden' if hidden else 'observable'}: value {s.meu}")

uid = branching_example()
s = solve_model(uid)
print(f"\nfour-decision model: meu {s.meu:.6f}")
print(f"exhaustive check:    {brute_meu(uid):.6f}")
print(f"strategy replay:     {strategy_eu(uid, s):.6f}")

print("\ndecision policies (one per elimination):")
for pt in s.policies:
    print(f"  {pt.decision} at node {pt.at}: depends on {list(pt.domain) or 'nothing'}, "
          f"choices {list(pt.choices)}")

print("\nstep policies (which action to take next):")
for sp in s.step_policies:
    print(f"  at {sp.at}: given {list(sp.domain)} continue with one of "
          f"{list(dict.fromkeys(sp.choices))}")

# the step policy is where the order of the middle decisions gets decided
sp = s.step_policies[0]
print(f"\nafter the first observation the recommended continuation varies with "
      f"{list(sp.domain)}: {list(sp.choices)}")
