# Falsification: how many collisions does each sampler find on the same budget?
import json
import tempfile
from pathlib import Path

from scenariotest.batch import CampaignConfig, run_campaign

out = Path(tempfile.mkdtemp(prefix="scenariotest-demo-"))
budget = 240

for sampler in ("uniform", "genetic"):
    rep = run_campaign(CampaignConfig("ped_crossing", sampler=sampler, budget=budget, seed=0,
                                      output_dir=str(out / sampler)))
    print(f"{sampler:8s} collisions {rep.collision_count:4d} (unique {rep.unique_collision_count}), "
          f"near misses {rep.near_miss_count}, {rep.wall_time:.1f} s")

# best fitness per generation never drops thanks to elitism
report = json.loads((out / "genetic" / "report.json").read_text())
for g in report["generations"]:
    print(g["generation"], round(g["best_fitness"], 3), round(g["mean_fitness"], 3), g["collisions"])

# which parameter values lead to crashes
for name, s in report["colliding_parameter_stats"].items():
    print(f"{name:22s} mean {s['mean']:.2f}  range [{s['min']:.2f}, {s['max']:.2f}]")
print("case files under", out)
