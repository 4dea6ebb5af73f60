"""Campaign orchestration: sample, instantiate, simulate, evaluate, persist.

Output layout under ``output_dir``::

    campaign.json                   the campaign configuration (minus output_dir, workers)
    report.json                     CampaignReport (written last)
    cases/<index:06d>/config.json
    cases/<index:06d>/result.json
    cases/<index:06d>/case.replay.json

Case seeds are derived from the campaign seed and the case index, and
results are applied in case order, so the worker count never changes any
output besides ``wall_time``.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .controllers import make_controller
from .errors import InvalidCampaign
from .evaluation import CampaignReport, EvaluationResult, campaign_summary, evaluate
from .library import ScenarioConfig, get_template, instantiate
from .replay import write_log
from .sampling import CASE_STREAM, GAParams, GeneticSampler, UniformSampler, derive_seed
from .sim import DEFAULT_STEP, run_simulation

OUTPUT_ENV = "SCENARIOTEST_OUT"
CASE_DIGITS = 6


@dataclass
class CampaignConfig:
    template_id: str
    controller: str = "reactive_braking"
    controller_params: dict = field(default_factory=dict)
    sampler: str = "uniform"
    sampler_params: dict = field(default_factory=dict)
    budget: int = 100
    seed: int = 0
    step_size: float = DEFAULT_STEP
    output_dir: str | None = None
    workers: int = 1
    embed_frames: bool = False

    def __post_init__(self):
        if self.budget < 1:
            raise InvalidCampaign("budget must be >= 1")
        if self.workers < 1:
            raise InvalidCampaign("workers must be >= 1")
        if self.sampler not in ("uniform", "genetic"):
            raise InvalidCampaign(f"unknown sampler {self.sampler!r}")
        if not self.step_size > 0:
            raise InvalidCampaign("step_size must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidCampaign("seed must be a 64-bit unsigned integer")
        if self.sampler == "genetic":
            try:
                ga = GAParams(**self.sampler_params)
            except TypeError as exc:
                raise InvalidCampaign(f"bad genetic sampler parameter: {exc}") from None
            if self.budget < ga.population_size:
                raise InvalidCampaign("budget must be at least the population size")

    @property
    def ga_params(self) -> GAParams:
        return GAParams(**self.sampler_params)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "CampaignConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidCampaign(f"unknown campaign fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "CampaignConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def case_dir(output_dir, index: int) -> Path:
    return Path(output_dir) / "cases" / f"{index:0{CASE_DIGITS}d}"


def _write_json(path: Path, obj) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def run_case(job) -> EvaluationResult:
    """Simulate, evaluate and persist one case. ``job`` is picklable."""
    out, index, config_dict, ctl_name, ctl_params, step_size, embed = job
    config = ScenarioConfig.from_dict(config_dict)
    controller = make_controller(ctl_name, ctl_params)
    trace = run_simulation(config, controller, step_size)
    result = evaluate(trace)
    d = case_dir(out, index)
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.json").write_text(config.to_json(), encoding="utf-8")
    _write_json(d / "result.json", result.to_dict(config_ref="config.json"))
    write_log(trace, controller.spec, d / "case.replay.json", embed)
    return result


class _Executor:
    def __init__(self, workers: int):
        self.pool = None
        if workers > 1:
            ctx = multiprocessing.get_context("fork") if "fork" in multiprocessing.get_all_start_methods() else None
            self.pool = ProcessPoolExecutor(max_workers=workers, mp_context=ctx)

    def map(self, jobs):
        if self.pool is None:
            return [run_case(j) for j in jobs]
        return list(self.pool.map(run_case, jobs, chunksize=max(1, len(jobs) // 16)))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def resolve_output_dir(config: CampaignConfig) -> Path:
    if config.output_dir:
        return Path(config.output_dir)
    return Path(os.environ.get(OUTPUT_ENV, "campaign_out"))


def run_campaign(config: CampaignConfig) -> CampaignReport:
    t0 = time.perf_counter()
    template = get_template(config.template_id)
    controller = make_controller(config.controller, config.controller_params)
    out = resolve_output_dir(config)
    (out / "cases").mkdir(parents=True, exist_ok=True)
    # where and how wide it ran are not part of the campaign's identity
    identity = {k: v for k, v in config.to_dict().items() if k not in ("output_dir", "workers")}
    _write_json(out / "campaign.json", identity)

    specs = template.parameters
    ctl_params = dict(controller.spec.parameters)
    configs: list[ScenarioConfig] = []
    results: list[EvaluationResult] = []
    generations: list[dict] = []
    executor = _Executor(config.workers)

    def run_batch(bindings_list):
        start = len(configs)
        batch = [instantiate(template, b, derive_seed(config.seed, CASE_STREAM, start + i))
                 for i, b in enumerate(bindings_list)]
        jobs = [(str(out), start + i, c.to_dict(), controller.name, ctl_params,
                 config.step_size, config.embed_frames) for i, c in enumerate(batch)]
        res = executor.map(jobs)
        configs.extend(batch)
        results.extend(res)
        return res

    try:
        if config.sampler == "uniform":
            sampler = UniformSampler(specs, config.seed)
            bindings = [sampler.sample() for _ in range(config.budget)]
            for b, r in zip(bindings, run_batch(bindings)):
                sampler.record(b, r.fitness)
        else:
            ga = config.ga_params
            sampler = GeneticSampler(specs, seed=config.seed, params=ga)
            pop = ga.population_size
            n_gen = math.ceil(config.budget / pop)
            for g in range(n_gen):
                remaining = config.budget - len(results)
                bindings = sampler.bindings()[:remaining]
                res = run_batch(bindings)
                for b, r in zip(bindings, res):
                    sampler.record(b, r.fitness)
                if len(res) < pop:
                    break  # partial final generation: evaluated, not evolved
                fits = [r.fitness for r in res]
                sampler.set_fitness(fits)
                generations.append(generation_stats(g, res))
                if len(results) < config.budget:
                    sampler.next_generation()
    finally:
        executor.close()

    refs = [f"cases/{i:0{CASE_DIGITS}d}/config.json" for i in range(len(configs))]
    report = campaign_summary(zip(configs, results), refs)
    report.generations = generations
    report.wall_time = time.perf_counter() - t0
    write_report(out, report, config)
    return report


def generation_stats(g: int, res) -> dict:
    fits = [r.fitness for r in res]
    return {"generation": g, "cases": len(res), "best_fitness": max(fits),
            "mean_fitness": math.fsum(fits) / len(fits),
            "collisions": sum(1 for r in res if r.collision)}


def report_dict(report: CampaignReport, config: CampaignConfig | None) -> dict:
    d = report.to_dict()
    if config is not None:
        d["campaign"] = {"template_id": config.template_id, "controller": config.controller,
                         "sampler": config.sampler, "budget": config.budget, "seed": config.seed}
    return d


def write_report(out, report: CampaignReport, config: CampaignConfig | None) -> None:
    _write_json(Path(out) / "report.json", report_dict(report, config))


def summarize(output_dir) -> CampaignReport:
    """Rebuild a report from the case files alone; ``report.json`` is not read."""
    out = Path(output_dir)
    cases = sorted(p for p in (out / "cases").iterdir() if p.is_dir()) if (out / "cases").is_dir() else []
    configs, results, refs = [], [], []
    for d in cases:
        try:
            cfg = ScenarioConfig.from_json((d / "config.json").read_text("utf-8"))
            res = EvaluationResult.from_dict(json.loads((d / "result.json").read_text("utf-8")))
        except FileNotFoundError:
            continue  # interrupted mid-case
        configs.append(cfg)
        results.append(res)
        refs.append(f"cases/{d.name}/config.json")
    report = campaign_summary(zip(configs, results), refs)
    campaign_file = out / "campaign.json"
    if campaign_file.exists():
        campaign = CampaignConfig.from_file(campaign_file)
        if campaign.sampler == "genetic":
            pop = campaign.ga_params.population_size
            for g in range(len(results) // pop):
                report.generations.append(generation_stats(g, results[g * pop:(g + 1) * pop]))
    return report

