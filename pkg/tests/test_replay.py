import dataclasses
import json
import os
import struct
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ped_config
from scenariotest.controllers import ControllerSpec, make_controller
from scenariotest.errors import UnknownController
from scenariotest.library import ScenarioConfig
from scenariotest.replay import (
    ReplayLog,
    _fnv1a64_rows,
    encode_frame,
    fnv1a64,
    frame_digest,
    frame_digests,
    read_log,
    render_svg,
    render_trace,
    verify_replay,
    write_log,
)
from scenariotest.sim import ActorState, Trace, WorldState, run_simulation

GOLDEN = Path(__file__).parent / "golden" / "ped_collision.svg"


def run(cfg, name="reactive_braking"):
    ctl = make_controller(name)
    return run_simulation(cfg, ctl), ctl.spec


def test_fnv_reference_vectors():
    # published FNV-1a 64 test vectors
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


@settings(max_examples=50, deadline=None)
@given(st.lists(st.binary(min_size=7, max_size=7), min_size=1, max_size=6))
def test_vectorized_fnv_matches_scalar(rows):
    arr = np.frombuffer(b"".join(rows), dtype=np.uint8).reshape(len(rows), 7)
    assert [int(h) for h in _fnv1a64_rows(arr)] == [fnv1a64(r) for r in rows]


def test_frame_digests_batch_matches_single():
    trace, _ = run(ped_config())
    assert frame_digests(trace.frames) == [frame_digest(f) for f in trace.frames]


def test_encoding_layout():
    ego = ActorState("ego", (1.0, 2.0), 0.5, 3.0, 4.0, False, 1.0)
    w = WorldState(7, 0.35, ego, (), 60.0)
    enc = encode_frame(w)
    assert enc[:28] == struct.pack("<QddI", 7, 0.35, 60.0, 1)
    assert len(enc) == 28 + 2 + 3 + 6 * 8 + 2 + 8


@settings(max_examples=60, deadline=None)
@given(field=st.sampled_from(["x", "y", "heading", "speed", "route_progress", "radius", "trigger_gap"]),
       scale=st.sampled_from([1e-12, 1e-6, 1.0]))
def test_digest_sensitive_to_any_field(field, scale):
    a = ActorState("p", (3.0, 4.0), 0.25, 1.5, 2.0, False, 0.3, 5.0)
    if field in ("x", "y"):
        pos = (a.position[0] + scale, a.position[1]) if field == "x" else (a.position[0], a.position[1] + scale)
        b = dataclasses.replace(a, position=pos)
    else:
        b = dataclasses.replace(a, **{field: getattr(a, field) + scale})
    ego = ActorState("ego", (0.0, 0.0), 0.0, 10.0, 0.0, False, 1.0)
    assert frame_digest(WorldState(1, 0.05, ego, (a,), 60.0)) != frame_digest(WorldState(1, 0.05, ego, (b,), 60.0))


def test_round_trip_and_match(tmp_path):
    trace, spec = run(ped_config())
    path = tmp_path / "case.replay.json"
    log = write_log(trace, spec, path)
    back = read_log(path)
    assert back == log
    verdict = verify_replay(back)
    assert verdict.match and str(verdict) == "Match"


def test_embedded_frames_round_trip(tmp_path):
    trace, spec = run(ped_config(velocity=2.0), "constant_speed")
    path = tmp_path / "case.replay.json"
    write_log(trace, spec, path, embed_frames=True)
    back = read_log(path)
    assert back.full_frames == tuple(trace.frames)
    assert verify_replay(back).match


def test_digest_only_log_size_is_linear(tmp_path):
    sizes = []
    for horizon_frames in (41, 81):
        trace, spec = run(ped_config(velocity=2.0), "constant_speed")
        short = Trace(trace.config, trace.step_size, trace.frames[:horizon_frames], trace.outcome)
        log = ReplayLog.from_trace(short, spec)
        assert "frames" not in log.to_dict()
        sizes.append(len(json.dumps(log.to_dict())))
    per_frame = (sizes[1] - sizes[0]) / 40
    assert per_frame == pytest.approx(len('"0123456789abcdef", '), abs=0.5)


def test_flipped_digest_reports_that_frame():
    trace, spec = run(ped_config())
    log = ReplayLog.from_trace(trace, spec)
    digests = list(log.frame_digests)
    digests[17] ^= 1
    verdict = verify_replay(dataclasses.replace(log, frame_digests=tuple(digests)))
    assert not verdict.match and verdict.frame == 17
    assert str(verdict).startswith("Mismatch at frame 17")


def test_velocity_edit_diverges_after_trigger():
    trace, spec = run(ped_config())
    log = ReplayLog.from_trace(trace, spec)
    fire = next(k for k, f in enumerate(trace.frames) if f.others[0].triggered)
    edited = log.config.with_bindings(pedestrian_velocity=log.config.bindings["pedestrian_velocity"] * 1.01)
    verdict = verify_replay(dataclasses.replace(log, config=edited))
    assert not verdict.match
    # the first triggered frame is also the first frame the bound speed is applied
    assert verdict.frame == fire > 0


def test_trigger_edit_diverges_at_first_frame():
    trace, spec = run(ped_config())
    log = ReplayLog.from_trace(trace, spec)
    edited = log.config.with_bindings(trigger_distance=15.15)
    assert verify_replay(dataclasses.replace(log, config=edited)).frame == 0


def test_truncated_log_mismatch():
    trace, spec = run(ped_config())
    log = ReplayLog.from_trace(trace, spec)
    verdict = verify_replay(dataclasses.replace(log, frame_digests=log.frame_digests[:-3]))
    assert not verdict.match and verdict.frame == len(log.frame_digests) - 3


def test_unknown_controller_in_log():
    trace, spec = run(ped_config())
    log = ReplayLog.from_trace(trace, ControllerSpec("retired_ads", {}))
    with pytest.raises(UnknownController):
        verify_replay(log)


def test_svg_golden():
    trace, _ = run(ped_config(velocity=2.0), "constant_speed")
    assert trace.outcome == "Collision"
    svg = render_svg(trace)
    if os.environ.get("SCENARIOTEST_REGEN_GOLDEN"):
        GOLDEN.write_text(svg, encoding="utf-8")
    assert svg == GOLDEN.read_text(encoding="utf-8")


def test_svg_byte_identical_rerender(tmp_path):
    trace, spec = run(ped_config(velocity=2.0), "constant_speed")
    path = tmp_path / "case.replay.json"
    write_log(trace, spec, path)
    a = render_trace(read_log(path), tmp_path / "a.svg").read_bytes()
    b = render_trace(read_log(path), tmp_path / "b.svg").read_bytes()
    assert a == b
    assert b'id="collision"' in a


def test_svg_minimal_two_frames():
    cfg = ped_config()
    trace, _ = run(cfg)
    short = Trace(cfg, trace.step_size, trace.frames[:2], "Timeout")
    svg = render_svg(short)
    assert svg.startswith("<?xml") and svg.rstrip().endswith("</svg>")
    assert 'id="collision"' not in svg
    assert svg.count("<polyline") == 4  # two routes, two trajectories


def test_render_rejects_other_formats(tmp_path):
    trace, _ = run(ped_config())
    with pytest.raises(ValueError):
        render_trace(trace, tmp_path / "x.png", format="png")
