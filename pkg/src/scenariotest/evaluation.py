"""Scoring of simulation traces and campaign-level summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping

from .errors import EmptyTrace, NoOtherActors
from .library import SCHEMA_VERSION, ScenarioConfig
from .sim import COLLISION, Trace, pairwise_min_distance

COLLISION_FITNESS = 2.0
NEAR_MISS_THRESHOLD = 0.5


def fitness_from_distance(min_distance: float, collision: bool) -> float:
    """Higher means more dangerous; collisions are pinned above every miss."""
    if collision:
        return COLLISION_FITNESS
    return 1.0 / (1.0 + min_distance)


@dataclass(frozen=True)
class EvaluationResult:
    collision: bool
    min_distance: float
    time_of_min: float
    fitness: float
    outcome: str

    def to_dict(self, config_ref: str | None = None) -> dict:
        d = asdict(self)
        d["config"] = config_ref
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvaluationResult":
        return cls(bool(d["collision"]), float(d["min_distance"]), float(d["time_of_min"]),
                   float(d["fitness"]), d["outcome"])


def evaluate(trace: Trace) -> EvaluationResult:
    if not trace.frames:
        raise EmptyTrace("trace has no frames")
    if not trace.frames[0].others:
        raise NoOtherActors("trace has no non-ego actors")
    best, best_t = math.inf, 0.0
    for f in trace.frames:
        d = pairwise_min_distance(f)
        if d < best:
            best, best_t = d, f.time
    collision = trace.outcome == COLLISION
    if collision:
        best = 0.0
        best_t = next(f.time for f in trace.frames if pairwise_min_distance(f) == 0.0)
    return EvaluationResult(collision, best, best_t, fitness_from_distance(best, collision),
                            trace.outcome)


@dataclass
class CampaignReport:
    cases_run: int = 0
    collision_count: int = 0
    near_miss_count: int = 0
    unique_collision_count: int = 0
    best_fitness: float | None = None
    best_case: int | None = None
    best_config: str | None = None
    colliding_parameter_stats: dict = field(default_factory=dict)
    generations: list = field(default_factory=list)
    wall_time: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d


def campaign_summary(results: Iterable[tuple[ScenarioConfig, EvaluationResult]],
                     config_refs: Iterable[str] | None = None) -> CampaignReport:
    """Totals over a list of evaluated cases.

    ``config_refs`` optionally names where each config lives (e.g. a path);
    otherwise the best config is referenced by its position in the list.
    """
    results = list(results)
    refs = list(config_refs) if config_refs is not None else [str(i) for i in range(len(results))]
    report = CampaignReport(cases_run=len(results))
    colliding = []
    seen = set()
    for i, (cfg, res) in enumerate(results):
        if res.collision:
            report.collision_count += 1
            colliding.append(cfg)
            seen.add(tuple(sorted(cfg.bindings.items())))
        elif res.min_distance < NEAR_MISS_THRESHOLD:
            report.near_miss_count += 1
        if report.best_fitness is None or res.fitness > report.best_fitness:
            report.best_fitness = res.fitness
            report.best_case = i
            report.best_config = refs[i]
    report.unique_collision_count = len(seen)
    report.colliding_parameter_stats = parameter_stats(colliding)
    return report


def parameter_stats(configs: list[ScenarioConfig]) -> dict:
    names = sorted({k for c in configs for k in c.bindings})
    out = {}
    for name in names:
        xs = [c.bindings[name] for c in configs if name in c.bindings]
        n = len(xs)
        mean = math.fsum(xs) / n
        var = math.fsum((x - mean) ** 2 for x in xs) / n
        out[name] = {"count": n, "mean": mean, "std": math.sqrt(var), "min": min(xs), "max": max(xs)}
    return out
