"""
Data potential in eTS
=====================

How the recursive potential tracks density, and when it creates a rule.
"""

import numpy as np

from evofis.ets import ETS, ets_init, ets_step, sample_potential
from evofis.timeseries import RegressorPair

rng = np.random.default_rng(0)

# a tight cloud around 0.2 followed by a second cloud around 0.8
cloud_a = [RegressorPair(0.2 + 0.02 * rng.standard_normal(2), np.array([0.3]), i) for i in range(60)]
cloud_b = [RegressorPair(0.8 + 0.02 * rng.standard_normal(2), np.array([0.7]), i) for i in range(60)]

state = ets_init(cloud_a[0])
for p in cloud_a[1:]:
    ets_step(state, p)

# potential is high inside the cloud that has been seen, low outside it
for probe in (0.2, 0.5, 0.8):
    z = np.array([probe, probe, 0.3])
    print(f"potential at {probe:.1f}: {sample_potential(state, z):.3f}")

# feed the second cloud and watch the rule base react
for t, p in enumerate(cloud_b):
    _, _, decision = ets_step(state, p)
    if decision.action != "update-only":
        print(f"sample {t} of cloud B -> {decision.action} (potential {decision.sample_potential:.3f})")

print("rules:", state.model.n_rules)
print("centers:", np.round([r.center for r in state.model.rules], 3).tolist())

# the learner class wraps the same state machine behind step()
learner = ETS(radius=0.3)
for p in cloud_a + cloud_b:
    learner.step(p)
print("ETS learner rules:", learner.n_rules)
