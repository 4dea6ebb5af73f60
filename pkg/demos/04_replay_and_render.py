# Every case leaves a replay log; re-run it bit-exactly and plot it.
import dataclasses
import tempfile
from pathlib import Path

from scenariotest.batch import CampaignConfig, run_campaign
from scenariotest.replay import read_log, render_trace, verify_replay

out = Path(tempfile.mkdtemp(prefix="scenariotest-replay-"))
rep = run_campaign(CampaignConfig("side_traffic_crossing", sampler="genetic", budget=48, seed=3,
                                  output_dir=str(out)))
best = out / Path(rep.best_config).parent / "case.replay.json"
log = read_log(best)
print(best, log.outcome, len(log.frame_digests), "frames")
print(verify_replay(log))

# nudge one parameter by 1% and the replay pinpoints where it diverges
v = log.config.bindings["actor_velocity"]
print(verify_replay(dataclasses.replace(log, config=log.config.with_bindings(actor_velocity=v * 1.01))))

svg = render_trace(log, out / "best.svg")
print("wrote", svg, svg.stat().st_size, "bytes")
