"""Online perception: watch the filter's abnormality signals react to jamming.

Trains a small model, then feeds the perception pipeline a hopping episode in
which every seventh slot is jammed, printing the multi-level indicators.
"""

import numpy as np

from antijam import harness
from antijam.config import load_config

cfg = load_config({
    "n_prbs": 6,
    "n_slots": 60,
    "channel": {"shadowing": "frozen"},
    "training": {"n_slots": 1200, "calib_slots": 800},
})

print("training clean-signal model on 6 PRBs ...")
model = harness.train(cfg, seed=1)
print(f"calibrated threshold (PRB 1): {model.prbs[1].threshold:.2f}\n")

world = harness.build_world(cfg, seed=9)
perc = harness.Perception(model, cfg["filter"]["n_particles"], np.random.default_rng(3))
rng = np.random.default_rng(4)

print(" slot  prb  jammed  err^2     SKL    Bhatt  flagged")
hits = misses = false_alarms = 0
for t in range(cfg["n_slots"]):
    prb = int(rng.integers(1, 7))
    jam = t % 7 == 3
    z = world._u_feats[t] + (world._j_feats[t] if jam else 0.0) + world._noise[t]
    sp = perc.process(prb, z)
    mark = "  <-- jam" if jam else ""
    if t < 30:
        print(f"{t:5d} {prb:4d}  {str(jam):>6}  {sp.msgs.min_error_sq:6.1f} {sp.skl:7.2f}"
              f" {sp.bhatt:7.2f}  {str(sp.abnormal):>7}{mark}")
    hits += jam and sp.abnormal
    misses += jam and not sp.abnormal
    false_alarms += (not jam) and sp.abnormal

n_jam = sum(1 for t in range(cfg["n_slots"]) if t % 7 == 3)
print(f"\ndetected {hits}/{n_jam} jammed slots, {false_alarms} false alarms")
