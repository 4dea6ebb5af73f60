"""The driver-under-test interface and the built-in baseline controllers.

A controller is a pure decision function ``decide(params, state, observation)
-> (Command, state)``. Any internal memory (including RNG state) must be
threaded through ``state``; the simulator hands the returned state back on
the next call. ``init(params, seed)`` builds the first state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .errors import DuplicateName, UnknownController
from .geometry import Polyline
from .sim import ACCEL_MAX, ACCEL_MIN, ActorState, Command, WorldState

LATERAL_MARGIN = 2.0


@dataclass(frozen=True)
class Observation:
    ego: ActorState
    visible_actors: tuple[tuple[ActorState, float], ...]
    time: float
    route_remaining: float
    ego_route: Polyline


@dataclass(frozen=True)
class ControllerSpec:
    name: str
    parameters: Mapping[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "parameters": {k: float(v) for k, v in sorted(self.parameters.items())}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ControllerSpec":
        return cls(d["name"], {k: float(v) for k, v in d.get("parameters", {}).items()})


DecideFn = Callable[[Mapping[str, float], Any, Observation], "tuple[Command, Any]"]
InitFn = Callable[[Mapping[str, float], int], Any]


def _no_state(params, seed):
    return None


@dataclass(frozen=True)
class Controller:
    """A registered decision function bound to concrete parameter values."""

    spec: ControllerSpec
    decide_fn: DecideFn
    init_fn: InitFn = _no_state

    @property
    def name(self) -> str:
        return self.spec.name

    def initial_state(self, seed: int):
        return self.init_fn(self.spec.parameters, seed)

    def decide(self, state, observation: Observation):
        return self.decide_fn(self.spec.parameters, state, observation)


def build_observation(world: WorldState, ego_route: Polyline) -> Observation:
    ego = world.ego
    ex, ey = ego.position
    vis = world.visibility
    visible = tuple(
        (o, o.radius) for o in world.others
        if math.hypot(o.position[0] - ex, o.position[1] - ey) <= vis
    )
    return Observation(ego, visible, world.time, ego_route.length - ego.route_progress, ego_route)


def _clamp(a: float) -> float:
    return min(max(a, ACCEL_MIN), ACCEL_MAX)


def constant_speed(params, state, obs: Observation):
    """Track ``target_speed`` with a proportional law; ignores every other actor."""
    a = params["gain"] * (params["target_speed"] - obs.ego.speed)
    return Command(_clamp(a)), state


def actors_ahead(obs: Observation, distance: float, lateral: float = LATERAL_MARGIN):
    """Visible actors whose projection on the ego route lies within ``distance``
    meters of arc length ahead of the ego, closer than ``lateral`` to the route.

    Returns ``(arc_gap, lateral_offset, state)`` tuples sorted by gap.
    """
    s0 = obs.ego.route_progress
    found = []
    for o, _radius in obs.visible_actors:
        s, lat = obs.ego_route.project(*o.position)
        gap = s - s0
        if 0.0 <= gap <= distance and lat < lateral:
            found.append((gap, lat, o))
    found.sort(key=lambda t: (t[0], t[2].actor_id))
    return found


def reactive_braking(params, state, obs: Observation):
    """Brake hard for anything in the ego's path, slow down near the path.

    Decision rule, in priority order:

    1. A visible actor projects onto the route within ``reaction_distance``
       ahead with lateral offset below 2 m: command -8 m/s^2.
    2. A visible actor projects within ``caution_distance`` ahead with
       lateral offset below ``caution_lateral``: track ``caution_speed``,
       decelerating no harder than ``comfort_decel``.
    3. Otherwise track ``target_speed`` like :func:`constant_speed`.
    """
    reaction = params["reaction_distance"]
    caution = params["caution_distance"]
    caution_lat = params["caution_lateral"]
    target = params["target_speed"]
    cautious = False
    s0 = obs.ego.route_progress
    for o, _radius in obs.visible_actors:
        s, lat = obs.ego_route.project(*o.position)
        gap = s - s0
        if gap < 0.0:
            continue
        if gap <= reaction and lat < LATERAL_MARGIN:
            return Command(ACCEL_MIN), state
        if gap <= caution and lat < caution_lat:
            cautious = True
    if cautious:
        target = min(target, params["caution_speed"])
        a = params["gain"] * (target - obs.ego.speed)
        return Command(_clamp(max(a, -params["comfort_decel"]))), state
    return Command(_clamp(params["gain"] * (target - obs.ego.speed))), state


# --- registry ---------------------------------------------------------------

_REGISTRY: dict[str, tuple[ControllerSpec, DecideFn, InitFn]] = {}


def register_controller(spec: ControllerSpec, decide_fn: DecideFn, init_fn: InitFn | None = None) -> None:
    if spec.name in _REGISTRY:
        raise DuplicateName(f"controller {spec.name!r} is already registered")
    for k, v in spec.parameters.items():
        if not math.isfinite(float(v)):
            raise ValueError(f"controller parameter {k} must be finite")
    _REGISTRY[spec.name] = (ControllerSpec(spec.name, dict(spec.parameters)), decide_fn,
                            init_fn or _no_state)


def unregister_controller(name: str) -> None:
    _REGISTRY.pop(name, None)


def list_controllers() -> list[str]:
    return sorted(_REGISTRY)


def controller_defaults(name: str) -> dict[str, float]:
    try:
        return dict(_REGISTRY[name][0].parameters)
    except KeyError:
        raise UnknownController(name) from None


def make_controller(name: str, parameters: Mapping[str, float] | None = None) -> Controller:
    """Instantiate a registered controller, overriding any default parameters."""
    try:
        base, fn, init = _REGISTRY[name]
    except KeyError:
        raise UnknownController(name) from None
    params = dict(base.parameters)
    for k, v in (parameters or {}).items():
        if k not in params:
            raise ValueError(f"controller {name!r} has no parameter {k!r}")
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"controller parameter {k} must be finite")
        params[k] = v
    return Controller(ControllerSpec(name, params), fn, init)


register_controller(ControllerSpec("constant_speed", {"target_speed": 10.0, "gain": 1.0}),
                    constant_speed)
register_controller(
    ControllerSpec("reactive_braking", {
        "target_speed": 10.0, "gain": 1.0, "reaction_distance": 12.0,
        "caution_distance": 30.0, "caution_lateral": 6.0, "caution_speed": 4.0,
        "comfort_decel": 3.0,
    }),
    reactive_braking,
)
