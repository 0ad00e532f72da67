"""Closed-loop runs and replays of recorded sequences.

A replay propagates stored inputs and disturbances through the dynamics
without solving anything.  A seeded run solves one relaxation per step,
samples a disturbance, and stops on reaching the set, on a failed solve, or
at the step cap.
"""
# %%
import json
from collections import Counter

import numpy as np

from ccmpc.config import example_path, load_example
from ccmpc.mpc import RunConfig, replay, simulate
from ccmpc.relaxation import RelaxationConfig

np.set_printoptions(precision=4, suppress=True)

# %% Replays of both recorded examples.
for name in ("example1", "example2"):
    spec = load_example(name)[0]
    rec = json.loads(example_path(f"{name}_replay").read_text())
    log = replay(spec, rec["x0"], rec["inputs"], rec["disturbances"])
    states = np.array([s["state"] for s in log.steps] + [log.final_state]).T
    err = np.abs(states - np.array(rec["states"]))
    print(f"{name}: final state {np.array(log.final_state)}, max deviation from recorded {err.max():.1e}")

# %% A handful of seeded closed-loop runs at relaxation order 3.
# x1+ = x2 is not steerable, so a large |x2| can leave the contraction event
# empty: alpha P(x) - x2^2 + 0.04 < 0 for every input.  The solve then reports
# infeasibility and the run stops there.
spec = load_example("example1")[0]
outcomes = Counter()
for seed in range(5):
    log = simulate(spec, [1.0, 1.0], RunConfig(seed=seed, max_steps=10, samples=20_000), RelaxationConfig(r=3))
    outcomes[log.terminal] += 1
    executed = [s for s in log.steps if s["input"]]
    print(f"seed {seed}: {len(executed)} steps, terminal {log.terminal}, final {np.array(log.final_state)}")
    if log.error:
        x = log.final_state
        print(f"   {log.error}; contraction slack {spec.alpha * spec.target_value(x) - x[1] ** 2 + 0.04:+.4f}")
    for s in executed:
        print(f"   k={s['k']}  u={s['input'][0]:+.4f}  w={s['disturbance'][0]:+.4f}  "
              f"MC {s['mc_probability']:.3f} vs required {s['required_probability']:.3f}")
print(dict(outcomes))
