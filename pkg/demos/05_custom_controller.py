# Plug in your own driving policy: anything mapping an observation to an acceleration.
from scenariotest.batch import CampaignConfig, run_campaign
from scenariotest.controllers import ControllerSpec, Observation, actors_ahead, register_controller
from scenariotest.sim import Command


def timid(params, state, obs: Observation):
    # creep whenever anything is visible ahead within the lookahead
    near = actors_ahead(obs, params["lookahead"], lateral=params["lateral"])
    target = params["slow"] if near else params["cruise"]
    return Command(max(-8.0, min(3.0, target - obs.ego.speed))), state


register_controller(ControllerSpec("timid", {"lookahead": 40.0, "lateral": 5.0, "slow": 2.0, "cruise": 10.0}), timid)

import tempfile
for ctl in ("reactive_braking", "timid"):
    rep = run_campaign(CampaignConfig("ped_crossing", controller=ctl, budget=100, seed=1,
                                      output_dir=tempfile.mkdtemp()))
    print(f"{ctl:18s} collisions {rep.collision_count:3d}  best fitness {rep.best_fitness:.3f}")
