"""Deterministic fixed-step 2D kinematic simulator.

Every actor is a disc moving along its polyline route. The ego's speed is set
by a controller through a longitudinal acceleration; all other actors move at
their bound speed, gated by an optional distance trigger. Integration is
forward Euler on arc length and time is always ``step_index * step_size``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import NoOtherActors, NonFiniteCommand
from .geometry import Polyline
from .library import (
    VISIBILITY_MAX,
    InvalidTemplate,
    ScenarioConfig,
    ScenarioTemplate,
    get_template,
    visibility_from_cloudiness,
)

DEFAULT_STEP = 0.05
ACCEL_MIN = -8.0
ACCEL_MAX = 3.0

COLLISION = "Collision"
ROUTE_COMPLETED = "RouteCompleted"
TIMEOUT = "Timeout"
OUTCOMES = (COLLISION, ROUTE_COMPLETED, TIMEOUT)


@dataclass(frozen=True, slots=True)
class ActorState:
    actor_id: str
    position: tuple[float, float]
    heading: float
    speed: float
    route_progress: float
    triggered: bool
    radius: float
    # distance to the trigger reference minus the trigger distance; None when
    # the actor has no trigger
    trigger_gap: float | None = None


@dataclass(frozen=True, slots=True)
class WorldState:
    step: int
    time: float
    ego: ActorState
    others: tuple[ActorState, ...]
    visibility: float

    def actor(self, actor_id: str) -> ActorState:
        if self.ego.actor_id == actor_id:
            return self.ego
        for a in self.others:
            if a.actor_id == actor_id:
                return a
        raise KeyError(actor_id)


@dataclass(frozen=True, slots=True)
class Command:
    acceleration: float


@dataclass(frozen=True)
class ResolvedActor:
    """An actor spec with every parameter reference replaced by its value."""

    actor_id: str
    actor_class: str
    radius: float
    route: Polyline
    initial_offset: float
    speed: float
    trigger_distance: float | None = None
    trigger_reference: str | None = None
    trigger_mode: str = "start"


@dataclass(frozen=True)
class Scene:
    """Everything the simulator needs, resolved from a template and a config."""

    template: ScenarioTemplate
    config: ScenarioConfig
    ego: ResolvedActor
    others: tuple[ResolvedActor, ...]
    visibility: float

    @property
    def actors(self) -> tuple[ResolvedActor, ...]:
        return (self.ego,) + self.others


@dataclass(frozen=True)
class Trace:
    config: ScenarioConfig
    step_size: float
    frames: tuple[WorldState, ...]
    outcome: str
    collision_pair: tuple[str, str] | None = None


def resolve_scene(config: ScenarioConfig, template: ScenarioTemplate | None = None) -> Scene:
    if template is None:
        template = get_template(config.template_id)
    b = config.bindings

    def val(v):
        return float(b[v]) if isinstance(v, str) else float(v)

    resolved = []
    for a in template.actors:
        route = Polyline(a.route)
        offset = val(a.initial_offset)
        if not 0.0 <= offset <= route.length:
            raise InvalidTemplate(
                f"{template.template_id}: actor {a.actor_id} offset {offset} is off its route"
            )
        trig = a.trigger
        resolved.append(ResolvedActor(
            a.actor_id, a.actor_class, float(a.footprint), route, offset, val(a.speed),
            None if trig is None else val(trig.trigger_distance),
            None if trig is None else trig.reference_actor,
            "start" if trig is None else trig.mode,
        ))
    visibility = VISIBILITY_MAX
    if "cloudiness" in template.weather_parameters:
        visibility = visibility_from_cloudiness(float(b["cloudiness"]))
    ego = next(r for r in resolved if r.actor_class == "ego")
    others = tuple(r for r in resolved if r.actor_class != "ego")
    return Scene(template, config, ego, others, visibility)


def _gap(spec: ResolvedActor, pos, positions) -> float | None:
    if spec.trigger_distance is None:
        return None
    rx, ry = positions[spec.trigger_reference]
    return math.hypot(pos[0] - rx, pos[1] - ry) - spec.trigger_distance


def initial_world(scene: Scene) -> WorldState:
    positions = {}
    placed = []
    for spec in scene.actors:
        x, y, h = spec.route.point_at(spec.initial_offset)
        positions[spec.actor_id] = (x, y)
        placed.append((spec, (x, y), h))
    states = []
    for spec, pos, h in placed:
        if spec.actor_class == "ego" or spec.trigger_distance is None:
            speed = spec.speed
        else:
            speed = 0.0 if spec.trigger_mode == "start" else spec.speed
        if spec.initial_offset >= spec.route.length and spec.actor_class != "ego":
            speed = 0.0
        states.append(ActorState(spec.actor_id, pos, h, speed, spec.initial_offset,
                                 False, spec.radius, _gap(spec, pos, positions)))
    return WorldState(0, 0.0, states[0], tuple(states[1:]), scene.visibility)


def step(world: WorldState, command: Command, actors: Sequence[ResolvedActor], dt: float) -> WorldState:
    """Advance the world by one step of length ``dt``.

    ``actors`` lists the resolved specs, ego first, in the same order as
    ``world.ego, *world.others``.
    """
    a = command.acceleration
    if not math.isfinite(a):
        raise NonFiniteCommand(f"non-finite acceleration {a!r} at step {world.step}",
                               step=world.step)
    a = min(max(a, ACCEL_MIN), ACCEL_MAX)

    old = (world.ego,) + world.others
    old_pos = {s.actor_id: s.position for s in old}
    moved = []
    new_pos = {}
    for spec, s in zip(actors, old):
        progress = s.route_progress + s.speed * dt
        L = spec.route.length
        if progress > L:
            progress = L
        triggered = s.triggered
        if spec.actor_class == "ego":
            speed = max(0.0, s.speed + a * dt)
        else:
            if spec.trigger_distance is not None and not triggered:
                rx, ry = old_pos[spec.trigger_reference]
                x, y = s.position
                if math.hypot(x - rx, y - ry) <= spec.trigger_distance:
                    triggered = True
            if spec.trigger_distance is None:
                speed = spec.speed
            elif spec.trigger_mode == "start":
                speed = spec.speed if triggered else 0.0
            else:
                speed = 0.0 if triggered else spec.speed
            if progress >= L:
                speed = 0.0
        if progress == s.route_progress:
            pos, h = s.position, s.heading
        else:
            x, y, h = spec.route.point_at(progress)
            pos = (x, y)
        new_pos[s.actor_id] = pos
        moved.append((spec, s, pos, h, speed, progress, triggered))

    states = [
        ActorState(s.actor_id, pos, h, speed, progress, triggered, s.radius,
                   _gap(spec, pos, new_pos))
        for spec, s, pos, h, speed, progress, triggered in moved
    ]
    k = world.step + 1
    return WorldState(k, k * dt, states[0], tuple(states[1:]), world.visibility)


def detect_collision(world: WorldState, actor_specs=None) -> tuple[str, str] | None:
    """First overlapping pair: ego pairs first, then the rest by actor id.

    Discs overlap when their center distance is strictly below the sum of
    radii; touching does not count.
    """
    ego = world.ego
    ex, ey = ego.position
    er = ego.radius
    hit = None
    for o in world.others:
        ox, oy = o.position
        if math.hypot(ex - ox, ey - oy) < er + o.radius and (hit is None or o.actor_id < hit):
            hit = o.actor_id
    if hit is not None:
        return ego.actor_id, hit
    if len(world.others) < 2:
        return None
    rest = sorted(world.others, key=lambda s: s.actor_id)
    for i, p in enumerate(rest):
        px, py = p.position
        for q in rest[i + 1:]:
            qx, qy = q.position
            if math.hypot(px - qx, py - qy) < p.radius + q.radius:
                return p.actor_id, q.actor_id
    return None


def pairwise_min_distance(world: WorldState) -> float:
    """Smallest ego-to-actor surface distance, floored at zero."""
    if not world.others:
        raise NoOtherActors("no non-ego actors in the world")
    ex, ey = world.ego.position
    r = world.ego.radius
    best = math.inf
    for o in world.others:
        ox, oy = o.position
        d = math.hypot(ex - ox, ey - oy) - r - o.radius
        if d < best:
            best = d
    return max(best, 0.0)


def _frame_limit(horizon: float, dt: float) -> int:
    n = math.ceil(horizon / dt - 1e-9)
    return max(n, 1)


def run_simulation(config: ScenarioConfig, controller, step_size: float = DEFAULT_STEP,
                   template: ScenarioTemplate | None = None) -> Trace:
    """Simulate one test case to completion.

    ``controller`` is a :class:`~scenariotest.controllers.Controller` or the
    name of a registered controller. Stops on collision, when the ego reaches
    the end of its route, or at the template horizon.
    """
    from .controllers import build_observation, make_controller

    if not step_size > 0:
        raise ValueError("step_size must be positive")
    if isinstance(controller, str):
        controller = make_controller(controller)
    scene = resolve_scene(config, template)
    actors = scene.actors
    limit = _frame_limit(scene.template.horizon, step_size)
    ego_len = scene.ego.route.length

    state = controller.initial_state(config.seed)
    world = initial_world(scene)
    frames = [world]
    while True:
        pair = detect_collision(world)
        if pair is not None:
            return Trace(config, step_size, tuple(frames), COLLISION, pair)
        if world.ego.route_progress >= ego_len:
            return Trace(config, step_size, tuple(frames), ROUTE_COMPLETED)
        if world.step >= limit:
            return Trace(config, step_size, tuple(frames), TIMEOUT)
        obs = build_observation(world, scene.ego.route)
        command, state = controller.decide(state, obs)
        try:
            world = step(world, command, actors, step_size)
        except NonFiniteCommand as exc:
            exc.frames = tuple(frames)
            raise
        frames.append(world)
