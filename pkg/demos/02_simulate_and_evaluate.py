# One pedestrian crossing, driven by the two built-in controllers.
import numpy as np

from scenariotest.evaluation import evaluate
from scenariotest.library import get_template, instantiate
from scenariotest.sim import pairwise_min_distance, run_simulation

cfg = instantiate(get_template("ped_crossing"), {"start_distance": 40.0, "trigger_distance": 15.0,
                                                 "pedestrian_velocity": 2.0, "cloudiness": 0.0}, seed=1)

for name in ("constant_speed", "reactive_braking"):
    trace = run_simulation(cfg, name)
    r = evaluate(trace)
    print(name, trace.outcome, len(trace.frames), "frames")
    print("  min distance %.3f m at t=%.2f s, fitness %.3f" % (r.min_distance, r.time_of_min, r.fitness))

# distance profile of the last run
gaps = np.array([pairwise_min_distance(f) for f in trace.frames])
print("gap every second:", np.round(gaps[::20], 2))

# the pedestrian waits until the ego is within the trigger distance
fired = next(f for f in trace.frames if f.others[0].triggered)
print("pedestrian starts walking at t=%.2f s, ego at x=%.2f" % (fired.time, fired.ego.position[0]))

# halving the step roughly halves the discretization error of the minimum
for dt in (0.05, 0.025, 0.0125):
    print(dt, evaluate(run_simulation(cfg.with_bindings(pedestrian_velocity=1.5), "constant_speed", dt)).min_distance)
