"""Parameterized scenario templates, binding validation and instantiation.

Templates are declarative: every actor follows a fixed polyline route, starts
at an arc-length offset, moves at a speed and may wait for (or react to) a
distance trigger. Any of offset, speed and trigger distance can be a constant
or the name of a template parameter. Built-in templates ship as JSON files in
the ``templates/`` package directory.
"""

from __future__ import annotations

import enum
import json
import math
import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Union

from .errors import InvalidBindings, InvalidTemplate, UnknownTemplate
from .geometry import Polyline

SCHEMA_VERSION = 1

VISIBILITY_MAX = 60.0
VISIBILITY_MIN = 15.0

ACTOR_CLASSES = ("ego", "vehicle", "pedestrian", "bicycle", "static_obstacle")
TERMINATORS = ("route_end", "collision", "timeout")

Value = Union[float, str]  # a constant or a parameter name


class ScenarioCategory(str, enum.Enum):
    ObstacleRecognition = "ObstacleRecognition"
    IntersectionEncounter = "IntersectionEncounter"
    PedestrianNonMotorized = "PedestrianNonMotorized"
    SurroundingVehicle = "SurroundingVehicle"
    EmergencyEvasion = "EmergencyEvasion"


def visibility_from_cloudiness(cloudiness: float) -> float:
    """Linear map from cloudiness percent to sight range in meters."""
    return VISIBILITY_MAX - (cloudiness / 100.0) * (VISIBILITY_MAX - VISIBILITY_MIN)


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    unit: str
    lower: float
    upper: float
    kind: str = "continuous"
    step: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise InvalidTemplate(f"parameter {self.name}: bounds must be finite")
        if self.lower > self.upper:
            raise InvalidTemplate(f"parameter {self.name}: lower > upper")
        if self.kind == "continuous":
            if self.step is not None:
                raise InvalidTemplate(f"parameter {self.name}: continuous kind takes no step")
        elif self.kind == "integer-stepped":
            if self.step is None or not self.step > 0:
                raise InvalidTemplate(f"parameter {self.name}: step must be > 0")
            n = (self.upper - self.lower) / self.step
            if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
                raise InvalidTemplate(
                    f"parameter {self.name}: range is not a multiple of step"
                )
        else:
            raise InvalidTemplate(f"parameter {self.name}: unknown kind {self.kind!r}")

    @property
    def stepped(self) -> bool:
        return self.kind == "integer-stepped"

    @property
    def lattice_size(self) -> int:
        """Number of lattice points for stepped kinds."""
        return int(round((self.upper - self.lower) / self.step)) + 1

    def on_step(self, value: float) -> bool:
        if not self.stepped:
            return True
        k = (value - self.lower) / self.step
        return abs(k - round(k)) <= 1e-9 * max(1.0, abs(k))

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        d = {"name": self.name, "unit": self.unit, "lower": self.lower,
             "upper": self.upper, "kind": self.kind}
        if self.step is not None:
            d["step"] = self.step
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParameterSpec":
        step = d.get("step")
        return cls(d["name"], d["unit"], float(d["lower"]), float(d["upper"]),
                   d.get("kind", "continuous"), None if step is None else float(step))


@dataclass(frozen=True)
class TriggerRule:
    """Distance trigger against a reference actor.

    ``mode="start"`` keeps the actor still until the trigger fires;
    ``mode="stop"`` lets it move at its speed and halts it once fired.
    """

    trigger_distance: Value
    reference_actor: str = "ego"
    metric: str = "euclidean"
    mode: str = "start"

    def to_dict(self) -> dict:
        return {"reference_actor": self.reference_actor,
                "trigger_distance": self.trigger_distance,
                "metric": self.metric, "mode": self.mode}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TriggerRule":
        return cls(_value(d["trigger_distance"]), d.get("reference_actor", "ego"),
                   d.get("metric", "euclidean"), d.get("mode", "start"))


@dataclass(frozen=True)
class ActorSpec:
    actor_id: str
    actor_class: str
    footprint: float
    route: tuple[tuple[float, float], ...]
    initial_offset: Value = 0.0
    speed: Value = 0.0
    trigger: TriggerRule | None = None

    def __post_init__(self):
        object.__setattr__(self, "route", tuple((float(x), float(y)) for x, y in self.route))

    @property
    def polyline(self) -> Polyline:
        return Polyline(self.route)

    def to_dict(self) -> dict:
        return {"actor_id": self.actor_id, "actor_class": self.actor_class,
                "footprint": self.footprint, "route": [list(p) for p in self.route],
                "initial_offset": self.initial_offset, "speed": self.speed,
                "trigger": None if self.trigger is None else self.trigger.to_dict()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ActorSpec":
        trig = d.get("trigger")
        return cls(d["actor_id"], d["actor_class"], float(d["footprint"]),
                   tuple(tuple(p) for p in d["route"]),
                   _value(d.get("initial_offset", 0.0)), _value(d.get("speed", 0.0)),
                   None if trig is None else TriggerRule.from_dict(trig))


def _value(v) -> Value:
    return v if isinstance(v, str) else float(v)


@dataclass(frozen=True)
class ScenarioTemplate:
    template_id: str
    category: ScenarioCategory
    actors: tuple[ActorSpec, ...]
    parameters: tuple[ParameterSpec, ...]
    weather_parameters: tuple[str, ...] = ()
    horizon: float = 20.0
    terminators: tuple[str, ...] = TERMINATORS
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "category", ScenarioCategory(self.category))
        object.__setattr__(self, "actors", tuple(self.actors))
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "weather_parameters", tuple(self.weather_parameters))
        object.__setattr__(self, "terminators", tuple(self.terminators))
        self._check()

    def _check(self):
        tid = self.template_id
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise InvalidTemplate(f"{tid}: duplicate parameter names")
        ids = [a.actor_id for a in self.actors]
        if len(set(ids)) != len(ids):
            raise InvalidTemplate(f"{tid}: duplicate actor ids")
        egos = [a for a in self.actors if a.actor_class == "ego"]
        if len(egos) != 1:
            raise InvalidTemplate(f"{tid}: exactly one ego actor required, got {len(egos)}")
        if not self.horizon > 0:
            raise InvalidTemplate(f"{tid}: horizon must be positive")
        for t in self.terminators:
            if t not in TERMINATORS:
                raise InvalidTemplate(f"{tid}: unknown terminator {t!r}")
        known = set(names)
        for a in self.actors:
            if a.actor_class not in ACTOR_CLASSES:
                raise InvalidTemplate(f"{tid}: unknown actor class {a.actor_class!r}")
            if not a.footprint > 0:
                raise InvalidTemplate(f"{tid}: actor {a.actor_id} footprint must be > 0")
            try:
                Polyline(a.route)
            except ValueError as exc:
                raise InvalidTemplate(f"{tid}: actor {a.actor_id}: {exc}") from None
            refs = [a.initial_offset, a.speed]
            if a.trigger is not None:
                if a.actor_class == "ego":
                    raise InvalidTemplate(f"{tid}: the ego cannot carry a trigger")
                if a.trigger.reference_actor not in ids:
                    raise InvalidTemplate(f"{tid}: trigger references unknown actor")
                if a.trigger.metric != "euclidean":
                    raise InvalidTemplate(f"{tid}: only euclidean triggers are supported")
                if a.trigger.mode not in ("start", "stop"):
                    raise InvalidTemplate(f"{tid}: unknown trigger mode {a.trigger.mode!r}")
                td = a.trigger.trigger_distance
                if not isinstance(td, str) and not td > 0:
                    raise InvalidTemplate(f"{tid}: trigger distance must be > 0")
                refs.append(td)
            for r in refs:
                if isinstance(r, str) and r not in known:
                    raise InvalidTemplate(f"{tid}: unresolved parameter reference {r!r}")
        for w in self.weather_parameters:
            if w not in known:
                raise InvalidTemplate(f"{tid}: unresolved weather parameter {w!r}")

    @property
    def ego(self) -> ActorSpec:
        return next(a for a in self.actors if a.actor_class == "ego")

    def parameter(self, name: str) -> ParameterSpec:
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    def to_dict(self) -> dict:
        return {"template_id": self.template_id, "category": self.category.value,
                "description": self.description,
                "actors": [a.to_dict() for a in self.actors],
                "parameters": [p.to_dict() for p in self.parameters],
                "weather_parameters": list(self.weather_parameters),
                "horizon": self.horizon, "terminators": list(self.terminators)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScenarioTemplate":
        return cls(
            template_id=d["template_id"],
            category=ScenarioCategory(d["category"]),
            actors=tuple(ActorSpec.from_dict(a) for a in d["actors"]),
            parameters=tuple(ParameterSpec.from_dict(p) for p in d["parameters"]),
            weather_parameters=tuple(d.get("weather_parameters", ())),
            horizon=float(d.get("horizon", 20.0)),
            terminators=tuple(d.get("terminators", TERMINATORS)),
            description=d.get("description", ""),
        )

    @classmethod
    def from_file(cls, path) -> "ScenarioTemplate":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ScenarioConfig:
    """One executable test case: a template with every parameter bound."""

    template_id: str
    bindings: dict[str, float]
    seed: int
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {"template_id": self.template_id,
                "bindings": {k: float(v) for k, v in self.bindings.items()},
                "seed": int(self.seed), "schema_version": self.schema_version}

    def to_json(self) -> str:
        # Python float repr is the shortest round-trip-exact decimal
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScenarioConfig":
        return cls(d["template_id"], {k: float(v) for k, v in d["bindings"].items()},
                   int(d["seed"]), int(d.get("schema_version", SCHEMA_VERSION)))

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        return cls.from_dict(json.loads(text))

    def with_bindings(self, **changes: float) -> "ScenarioConfig":
        return ScenarioConfig(self.template_id, {**self.bindings, **changes},
                              self.seed, self.schema_version)


# --- binding validation ---------------------------------------------------

@dataclass(frozen=True)
class OutOfRange:
    name: str
    value: float
    lower: float
    upper: float

    def __str__(self):
        return f"{self.name}={self.value!r} outside [{self.lower!r}, {self.upper!r}]"


@dataclass(frozen=True)
class Missing:
    name: str

    def __str__(self):
        return f"missing binding for {self.name}"


@dataclass(frozen=True)
class Extra:
    name: str

    def __str__(self):
        return f"unknown parameter {self.name}"


@dataclass(frozen=True)
class OffStep:
    name: str
    value: float
    step: float

    def __str__(self):
        return f"{self.name}={self.value!r} is not on the step-{self.step!r} lattice"


@dataclass(frozen=True)
class NotFinite:
    name: str
    value: float

    def __str__(self):
        return f"{self.name}={self.value!r} is not finite"


def validate_bindings(template: ScenarioTemplate, bindings: Mapping[str, float]) -> list:
    """Every violation of the template's parameter contract; empty means ok."""
    violations: list = []
    for p in template.parameters:
        if p.name not in bindings:
            violations.append(Missing(p.name))
            continue
        v = float(bindings[p.name])
        if not math.isfinite(v):
            violations.append(NotFinite(p.name, v))
        elif not p.contains(v):
            violations.append(OutOfRange(p.name, v, p.lower, p.upper))
        elif not p.on_step(v):
            violations.append(OffStep(p.name, v, p.step))
    known = set(template.parameter_names)
    for name in sorted(bindings):
        if name not in known:
            violations.append(Extra(name))
    return violations


def instantiate(template: ScenarioTemplate, bindings: Mapping[str, float], seed: int) -> ScenarioConfig:
    violations = validate_bindings(template, bindings)
    if violations:
        raise InvalidBindings(violations)
    if not 0 <= int(seed) < 2**64:
        raise InvalidBindings([f"seed {seed} is not a 64-bit unsigned integer"])
    ordered = {p.name: float(bindings[p.name]) for p in template.parameters}
    return ScenarioConfig(template.template_id, ordered, int(seed))


# --- registry -------------------------------------------------------------

def builtin_template_files() -> list:
    root = resources.files(__package__).joinpath("templates")
    return sorted((p for p in root.iterdir() if p.name.endswith(".json")), key=lambda p: p.name)


class ScenarioLibrary:
    """A registry of templates keyed by id. Safe to share once populated."""

    def __init__(self, builtins: bool = True):
        self._templates: dict[str, ScenarioTemplate] = {}
        self._lock = threading.Lock()
        if builtins:
            for path in builtin_template_files():
                self.register(ScenarioTemplate.from_dict(json.loads(path.read_text("utf-8"))))

    def register(self, template: ScenarioTemplate) -> None:
        with self._lock:
            if template.template_id in self._templates:
                raise InvalidTemplate(f"template {template.template_id!r} already registered")
            self._templates[template.template_id] = template

    def load_directory(self, path) -> list[str]:
        """Register every ``*.json`` template file found in ``path``."""
        added = []
        for p in sorted(Path(path).glob("*.json")):
            t = ScenarioTemplate.from_file(p)
            self.register(t)
            added.append(t.template_id)
        return added

    def list_templates(self) -> list[tuple[str, ScenarioCategory]]:
        return [(tid, self._templates[tid].category) for tid in sorted(self._templates)]

    def get_template(self, template_id: str) -> ScenarioTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplate(template_id) from None

    def __contains__(self, template_id) -> bool:
        return template_id in self._templates


_default: ScenarioLibrary | None = None


def default_library() -> ScenarioLibrary:
    global _default
    if _default is None:
        _default = ScenarioLibrary()
    return _default


def list_templates():
    return default_library().list_templates()


def get_template(template_id: str) -> ScenarioTemplate:
    return default_library().get_template(template_id)


def register_template(template: ScenarioTemplate) -> None:
    default_library().register(template)
