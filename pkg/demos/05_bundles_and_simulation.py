"""Export a solved strategy as a self-contained bundle, re-score it, and
cross-check it with Monte Carlo rollouts.

The bundle document is what the browser navigator loads: model, graph,
policies with their pre-argmax tables, step-policies, and the value.
"""

import json
import tempfile
from pathlib import Path

from uidag import simulate, solve_model, strategy_eu
from uidag.bundle import read_bundle, write_bundle
from uidag.sample_models import kings_problem

uid = kings_problem()
strategy = solve_model(uid)
print(f"solved: meu {strategy.meu:.6f}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "king.bundle.json"
    write_bundle(str(path), uid, strategy, flags={"trim_relevance": False})
    doc = json.loads(path.read_text())
    print(f"bundle: {len(path.read_text())} bytes, "
          f"{len(doc['sdag']['nodes'])} graph nodes, "
          f"{len(doc['policies'])} policies, "
          f"{len(doc['step_policies'])} step policies")

    loaded = read_bundle(str(path))
    rescored = strategy_eu(loaded.uid, loaded.strategy)
    print(f"re-scored from disk: {rescored:.6f} "
          f"(matches: {abs(rescored - strategy.meu) < 1e-9})")

mean, stderr = simulate(uid, strategy, n=100_000, seed=7)
z = abs(mean - strategy.meu) / stderr
print(f"\n100000 rollouts: mean {mean:.4f} +- {stderr:.4f} "
      f"({z:.2f} standard errors from the exact value)")
