import pytest

from conftest import ped_config
from scenariotest.controllers import (
    ControllerSpec,
    Observation,
    build_observation,
    list_controllers,
    make_controller,
    register_controller,
    unregister_controller,
)
from scenariotest.errors import DuplicateName, UnknownController
from scenariotest.geometry import Polyline
from scenariotest.sim import ActorState, Command, WorldState, run_simulation

ROUTE = Polyline([(0, 0), (130, 0)])


def observe(ego_x, ego_speed, *others, visibility=60.0):
    ego = ActorState("ego", (ego_x, 0.0), 0.0, ego_speed, ego_x, False, 1.0)
    actors = tuple(ActorState(f"a{i}", p, 0.0, 0.0, 0.0, False, 0.3) for i, p in enumerate(others))
    return build_observation(WorldState(0, 0.0, ego, actors, visibility), ROUTE)


@pytest.mark.parametrize("speed, accel", [(8.0, 2.0), (10.0, 0.0), (0.0, 3.0), (20.0, -8.0), (12.5, -2.5)])
def test_constant_speed(speed, accel):
    ctl = make_controller("constant_speed")
    cmd, _ = ctl.decide(None, observe(10.0, speed, (15.0, 0.0)))
    assert cmd == Command(accel)


def test_reactive_braking_full_brake_for_actor_in_path():
    # pedestrian at (58, -1): projects 8 m ahead, 1 m lateral -> in path
    ctl = make_controller("reactive_braking")
    cmd, _ = ctl.decide(None, observe(50.0, 10.0, (58.0, -1.0)))
    assert cmd == Command(-8.0)


def test_reactive_braking_caution_zone():
    # 20 m ahead, 4 m lateral: outside the 2 m path band, inside the 6 m caution band
    ctl = make_controller("reactive_braking")
    cmd, _ = ctl.decide(None, observe(50.0, 10.0, (70.0, -4.0)))
    assert cmd == Command(-3.0)  # toward 4 m/s, limited by comfort_decel
    cmd, _ = ctl.decide(None, observe(50.0, 3.0, (70.0, -4.0)))
    assert cmd == Command(1.0)


def test_reactive_braking_ignores_actors_behind_or_far():
    ctl = make_controller("reactive_braking")
    assert ctl.decide(None, observe(50.0, 10.0, (45.0, 0.0)))[0] == Command(0.0)
    assert ctl.decide(None, observe(50.0, 10.0, (70.0, -9.0)))[0] == Command(0.0)


def test_reactive_braking_cannot_see_past_visibility():
    obs = observe(50.0, 8.0, (58.0, 0.0), visibility=5.0)
    assert obs.visible_actors == ()
    rb = make_controller("reactive_braking").decide(None, obs)[0]
    cs = make_controller("constant_speed").decide(None, obs)[0]
    assert rb == cs == Command(2.0)


def test_visibility_boundary_is_inclusive():
    obs = observe(50.0, 8.0, (58.0, 0.0), visibility=8.0)
    assert len(obs.visible_actors) == 1


def test_register_and_lifecycle():
    seen = []

    def recorder(params, state, obs: Observation):
        seen.append(obs.time)
        return Command(params["a"]), (state or 0) + 1

    register_controller(ControllerSpec("my_ads", {"a": 0.0}), recorder)
    try:
        assert "my_ads" in list_controllers()
        with pytest.raises(DuplicateName):
            register_controller(ControllerSpec("my_ads"), recorder)
        trace = run_simulation(ped_config(), "my_ads")
        assert seen[0] == 0.0
        assert len(seen) == len(trace.frames) - 1
    finally:
        unregister_controller("my_ads")


def test_duplicate_builtin():
    with pytest.raises(DuplicateName):
        register_controller(ControllerSpec("reactive_braking"), lambda p, s, o: (Command(0.0), s))


def test_unknown_controller_and_parameter():
    with pytest.raises(UnknownController):
        make_controller("nobody")
    with pytest.raises(ValueError):
        make_controller("constant_speed", {"bogus": 1.0})
    with pytest.raises(ValueError):
        make_controller("constant_speed", {"target_speed": float("nan")})


def test_state_threading_and_seed():
    def init(params, seed):
        return {"seed": seed, "calls": 0}

    def counting(params, state, obs):
        return Command(0.0), {**state, "calls": state["calls"] + 1}

    register_controller(ControllerSpec("counting"), counting, init)
    try:
        ctl = make_controller("counting")
        assert ctl.initial_state(42) == {"seed": 42, "calls": 0}
    finally:
        unregister_controller("counting")


def _record_run(cfg, ctl):
    """Observation and command sequences from one run."""
    log = []

    def spy(params, state, obs):
        cmd, state = ctl.decide(state, obs)
        log.append((obs, cmd))
        return cmd, state

    from scenariotest.controllers import Controller
    run_simulation(cfg, Controller(ctl.spec, spy))
    return log


def test_purity_replaying_observations():
    ctl = make_controller("reactive_braking")
    log = _record_run(ped_config(velocity=1.2, trigger=20.0), ctl)
    fresh = make_controller("reactive_braking")
    state = fresh.initial_state(0)
    for obs, cmd in log:
        again, state = fresh.decide(state, obs)
        assert again == cmd


def test_visibility_causality():
    ctl = make_controller("reactive_braking")
    # the pedestrian starts ~40 m away: visible under both 0% (60 m) and 10% (55.5 m) cloudiness
    a = _record_run(ped_config(cloudiness=0.0), ctl)
    b = _record_run(ped_config(cloudiness=10.0), ctl)
    ids = lambda log: [tuple(o.actor_id for o, _ in obs.visible_actors) for obs, _ in log]
    assert ids(a) == ids(b)
    assert [c for _, c in a] == [c for _, c in b]
    # heavy cloud hides it at first and changes the driving
    c = _record_run(ped_config(cloudiness=100.0), ctl)
    assert ids(c) != ids(a)
