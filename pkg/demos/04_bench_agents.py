"""Full pipeline: train, then benchmark AIn vs QL vs FH on a sweep jammer.

Writes per-seed CSVs under results/demo_bench/ so the frontend plot tool can
render the cumulative-metric figures:

    node frontend/dist/cli.js plot --metric cum_reward \
        --inputs ain=results/demo_bench/ain/seed0.csv,results/demo_bench/ain/seed1.csv \
        --inputs ql=results/demo_bench/ql/seed0.csv,results/demo_bench/ql/seed1.csv \
        --inputs fh=results/demo_bench/fh/seed0.csv,results/demo_bench/fh/seed1.csv \
        --out results/demo_bench/cum_reward.svg
"""

import copy
import os

from antijam import harness
from antijam.config import load_config

BASE = {
    "jammer": {"kind": "sweep"},
    "channel": {"shadowing": "frozen"},
    "seeds": [0, 1, 2],
}

os.makedirs("results/demo_bench", exist_ok=True)
model_path = "results/demo_bench/model.json"

print("training model (50 PRBs) ...")
harness.train(load_config(copy.deepcopy(BASE)), out_path=model_path, seed=42)

cfgs = []
for kind in ("ain", "ql", "fh"):
    d = copy.deepcopy(BASE)
    # every agent gets the model so its abnormality curve is logged too
    d["agent"] = {"kind": kind, "model_path": model_path}
    cfgs.append(load_config(d))

print("benchmarking 3 agents x 3 seeds against a sweep jammer ...")
rows = harness.bench(cfgs, out_dir="results/demo_bench")

print(f"\n{'agent':>6} {'seed':>4} {'collisions':>10} {'reward':>8} {'conv slot':>9}")
for r in rows:
    print(f"{r['agent']:>6} {r['seed']:>4} {r['collisions']:>10} "
          f"{r['final_cum_reward']:>8.0f} {r['convergence_slot']:>9}")

print("\nper-seed CSVs and comparison.csv written to results/demo_bench/")
