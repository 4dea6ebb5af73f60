"""Per-case replay logs, re-execution checks and SVG trajectory plots.

Frame digests are 64-bit FNV-1a hashes of a canonical little-endian encoding
of each :class:`~scenariotest.sim.WorldState`::

    u64 step | f64 time | f64 visibility | u32 actor count
    then per actor (ego first, others in scene order):
    u16 id length | utf-8 id | f64 x | f64 y | f64 heading | f64 speed
    | f64 route_progress | f64 radius | u8 triggered | u8 has_gap | f64 gap

(``gap`` is 0.0 when ``has_gap`` is 0.) Digests are stored as 16-digit
lowercase hex strings.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .controllers import ControllerSpec, make_controller
from .errors import FramesUnavailable
from .library import SCHEMA_VERSION, ScenarioConfig, get_template
from .sim import ActorState, Trace, WorldState, resolve_scene, run_simulation

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1

LOG_SUFFIX = ".replay.json"


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK
    return h


def _fnv1a64_rows(rows: np.ndarray) -> np.ndarray:
    """FNV-1a over each row of a 2D uint8 array, all rows at once."""
    h = np.full(rows.shape[0], FNV_OFFSET, dtype=np.uint64)
    prime = np.uint64(FNV_PRIME)
    with np.errstate(over="ignore"):
        for j in range(rows.shape[1]):
            h ^= rows[:, j].astype(np.uint64)
            h *= prime
    return h


def _pack_actor(a: ActorState) -> bytes:
    name = a.actor_id.encode("utf-8")
    has_gap = a.trigger_gap is not None
    return (struct.pack("<H", len(name)) + name
            + struct.pack("<6dBBd", a.position[0], a.position[1], a.heading, a.speed,
                          a.route_progress, a.radius, a.triggered, has_gap,
                          a.trigger_gap if has_gap else 0.0))


def encode_frame(world: WorldState) -> bytes:
    actors = (world.ego,) + world.others
    head = struct.pack("<QddI", world.step, world.time, world.visibility, len(actors))
    return head + b"".join(_pack_actor(a) for a in actors)


def frame_digest(world: WorldState) -> int:
    return fnv1a64(encode_frame(world))


def frame_digests(frames: Sequence[WorldState]) -> list[int]:
    encoded = [encode_frame(f) for f in frames]
    if not encoded:
        return []
    width = len(encoded[0])
    if any(len(e) != width for e in encoded):
        return [fnv1a64(e) for e in encoded]
    rows = np.frombuffer(b"".join(encoded), dtype=np.uint8).reshape(len(encoded), width)
    return [int(h) for h in _fnv1a64_rows(rows)]


# --- frame (de)serialization for embedded logs ---------------------------------

def _actor_to_list(a: ActorState) -> list:
    return [a.actor_id, a.position[0], a.position[1], a.heading, a.speed, a.route_progress,
            a.triggered, a.radius, a.trigger_gap]


def _actor_from_list(v) -> ActorState:
    return ActorState(v[0], (float(v[1]), float(v[2])), float(v[3]), float(v[4]), float(v[5]),
                      bool(v[6]), float(v[7]), None if v[8] is None else float(v[8]))


def frame_to_dict(w: WorldState) -> dict:
    return {"step": w.step, "time": w.time, "visibility": w.visibility,
            "ego": _actor_to_list(w.ego), "others": [_actor_to_list(o) for o in w.others]}


def frame_from_dict(d) -> WorldState:
    return WorldState(int(d["step"]), float(d["time"]), _actor_from_list(d["ego"]),
                      tuple(_actor_from_list(o) for o in d["others"]), float(d["visibility"]))


@dataclass(frozen=True)
class ReplayLog:
    config: ScenarioConfig
    controller: ControllerSpec
    step_size: float
    frame_digests: tuple[int, ...]
    outcome: str
    full_frames: tuple[WorldState, ...] | None = None
    schema_version: int = SCHEMA_VERSION
    build: str = __version__

    @classmethod
    def from_trace(cls, trace: Trace, controller: ControllerSpec, embed_frames: bool = False) -> "ReplayLog":
        return cls(trace.config, controller, trace.step_size, tuple(frame_digests(trace.frames)),
                   trace.outcome, tuple(trace.frames) if embed_frames else None)

    def to_dict(self) -> dict:
        d = {"schema_version": self.schema_version, "build": self.build,
             "config": self.config.to_dict(), "controller": self.controller.to_dict(),
             "step_size": self.step_size, "outcome": self.outcome,
             "frame_digests": [f"{h:016x}" for h in self.frame_digests]}
        if self.full_frames is not None:
            d["frames"] = [frame_to_dict(f) for f in self.full_frames]
        return d

    @classmethod
    def from_dict(cls, d) -> "ReplayLog":
        frames = d.get("frames")
        return cls(ScenarioConfig.from_dict(d["config"]), ControllerSpec.from_dict(d["controller"]),
                   float(d["step_size"]), tuple(int(h, 16) for h in d["frame_digests"]),
                   d["outcome"], None if frames is None else tuple(frame_from_dict(f) for f in frames),
                   int(d["schema_version"]), d.get("build", ""))


def log_to_json(log: ReplayLog) -> str:
    return json.dumps(log.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def write_log(trace: Trace, controller_spec: ControllerSpec, path, embed_frames: bool = False) -> ReplayLog:
    log = ReplayLog.from_trace(trace, controller_spec, embed_frames)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(log_to_json(log))
    os.replace(tmp, path)
    return log


def read_log(path) -> ReplayLog:
    with open(path, encoding="utf-8") as fh:
        return ReplayLog.from_dict(json.load(fh))


@dataclass(frozen=True)
class ReplayVerdict:
    match: bool
    frame: int | None = None
    reason: str = ""
    trace: Trace | None = None

    def __bool__(self) -> bool:
        return self.match

    def __str__(self) -> str:
        if self.match:
            return "Match"
        return f"Mismatch at frame {self.frame}: {self.reason}"


def verify_replay(log: ReplayLog) -> ReplayVerdict:
    """Re-run the logged case and compare frame digests one by one."""
    controller = make_controller(log.controller.name, log.controller.parameters)
    trace = run_simulation(log.config, controller, log.step_size)
    fresh = frame_digests(trace.frames)
    for k, (old, new) in enumerate(zip(log.frame_digests, fresh)):
        if old != new:
            return ReplayVerdict(False, k, "frame digest differs", trace)
    if len(fresh) != len(log.frame_digests):
        k = min(len(fresh), len(log.frame_digests))
        return ReplayVerdict(False, k, f"frame count {len(fresh)} != logged {len(log.frame_digests)}", trace)
    if trace.outcome != log.outcome:
        return ReplayVerdict(False, len(fresh) - 1, f"outcome {trace.outcome} != logged {log.outcome}", trace)
    return ReplayVerdict(True, None, "", trace)


# --- SVG rendering ----------------------------------------------------------

_COLORS = {"ego": "#1f77b4", "vehicle": "#d62728", "pedestrian": "#2ca02c",
           "bicycle": "#9467bd", "static_obstacle": "#7f7f7f"}
_WIDTH = 800.0
_MARGIN = 20.0


def _num(x: float) -> str:
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _frames_of(source) -> tuple[Trace, str | None]:
    if isinstance(source, Trace):
        return source, None
    log = source
    if log.full_frames is not None:
        trace = Trace(log.config, log.step_size, log.full_frames, log.outcome)
        return trace, log.controller.name
    verdict = verify_replay(log)
    if not verdict.match:
        raise FramesUnavailable(f"frames are not embedded and replay does not match ({verdict})")
    return verdict.trace, log.controller.name


def render_svg(source) -> str:
    """SVG text for a trace or replay log.

    Draws every route (dashed), every trajectory, footprint circles at the
    closest-approach frame and a cross at the collision point, if any.
    """
    from .evaluation import evaluate
    from .sim import COLLISION, detect_collision, pairwise_min_distance

    trace, controller_name = _frames_of(source)
    template = get_template(trace.config.template_id)
    scene = resolve_scene(trace.config, template)
    specs = scene.actors

    pts = [p for s in specs for p in s.route.points]
    pts += [a.position for f in trace.frames for a in (f.ego,) + f.others]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs) - 2, max(xs) + 2, min(ys) - 2, max(ys) + 2
    scale = (_WIDTH - 2 * _MARGIN) / max(x1 - x0, y1 - y0)
    height = (y1 - y0) * scale + 2 * _MARGIN

    def X(x):
        return _num(_MARGIN + (x - x0) * scale)

    def Y(y):
        return _num(_MARGIN + (y1 - y) * scale)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(_WIDTH)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(_WIDTH)} {_num(height)}">',
        f'<title>{trace.config.template_id} {trace.outcome}</title>',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        '<g id="routes" fill="none" stroke="#bbbbbb" stroke-width="1" stroke-dasharray="4 3">',
    ]
    for s in specs:
        path = " ".join(f"{X(x)},{Y(y)}" for x, y in s.route.points)
        out.append(f'<polyline data-actor="{s.actor_id}" points="{path}"/>')
    out.append("</g>")

    out.append('<g id="trajectories" fill="none" stroke-width="2">')
    for i, s in enumerate(specs):
        track = [((f.ego,) + f.others)[i].position for f in trace.frames]
        path = " ".join(f"{X(x)},{Y(y)}" for x, y in track)
        out.append(f'<polyline data-actor="{s.actor_id}" stroke="{_COLORS[s.actor_class]}" points="{path}"/>')
    out.append("</g>")

    if trace.frames[0].others:
        result = evaluate(trace)
        k = next(i for i, f in enumerate(trace.frames) if f.time == result.time_of_min)
        frame = trace.frames[k]
        out.append(f'<g id="closest-approach" data-frame="{k}" data-min-distance="{_num(pairwise_min_distance(frame))}" '
                   'fill-opacity="0.3" stroke-width="1">')
        for s, a in zip(specs, (frame.ego,) + frame.others):
            c = _COLORS[s.actor_class]
            out.append(f'<circle data-actor="{s.actor_id}" cx="{X(a.position[0])}" cy="{Y(a.position[1])}" '
                       f'r="{_num(a.radius * scale)}" fill="{c}" stroke="{c}"/>')
        out.append("</g>")

    if trace.outcome == COLLISION:
        last = trace.frames[-1]
        pair = trace.collision_pair or detect_collision(last)
        a, b = last.actor(pair[0]), last.actor(pair[1])
        cx = (a.position[0] * b.radius + b.position[0] * a.radius) / (a.radius + b.radius)
        cy = (a.position[1] * b.radius + b.position[1] * a.radius) / (a.radius + b.radius)
        px, py = float(X(cx)), float(Y(cy))
        d = 6.0
        out.append(f'<g id="collision" data-actors="{pair[0]} {pair[1]}" stroke="#000000" stroke-width="2">')
        out.append(f'<line x1="{_num(px - d)}" y1="{_num(py - d)}" x2="{_num(px + d)}" y2="{_num(py + d)}"/>')
        out.append(f'<line x1="{_num(px - d)}" y1="{_num(py + d)}" x2="{_num(px + d)}" y2="{_num(py - d)}"/>')
        out.append("</g>")

    label = trace.config.template_id + (f" / {controller_name}" if controller_name else "")
    out.append(f'<text x="{_num(_MARGIN)}" y="{_num(_MARGIN - 6)}" font-family="monospace" font-size="12">'
               f'{label} {trace.outcome} t={_num(trace.frames[-1].time)}s</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_trace(source, output_path, format: str = "svg") -> Path:
    if format != "svg":
        raise ValueError(f"unsupported format {format!r}; only svg is available")
    path = Path(output_path)
    path.write_text(render_svg(source), encoding="utf-8")
    return path
