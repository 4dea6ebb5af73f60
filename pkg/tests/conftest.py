import math

import pytest

from scenariotest.library import get_template, instantiate


def ped_config(start=40.0, trigger=15.0, velocity=1.5, cloudiness=0.0, seed=7):
    return instantiate(get_template("ped_crossing"), {
        "start_distance": start, "trigger_distance": trigger,
        "pedestrian_velocity": velocity, "cloudiness": cloudiness,
    }, seed)


def seg_min(r0, w, t0, t1):
    """Minimum of |r0 + w t| over t in [t0, t1]."""
    ww = w[0] ** 2 + w[1] ** 2
    t = t0 if ww == 0 else min(max(-(r0[0] * w[0] + r0[1] * w[1]) / ww, t0), t1)
    return math.hypot(r0[0] + w[0] * t, r0[1] + w[1] * t)


def analytic_ped_min_distance(start, trigger, velocity, ego_speed=10.0, cross_x=80.0,
                              ped_y0=-4.0, ped_y1=8.0, radii=1.3, horizon=15.0):
    """Continuous-time closest approach for the ped_crossing geometry.

    The ego drives along y=0 at constant speed; the pedestrian waits at
    (cross_x, ped_y0) and walks to (cross_x, ped_y1) from the instant the
    ego comes within ``trigger`` meters. Piecewise-linear relative motion,
    minimized piece by piece in closed form.
    """
    t_fire = max((cross_x - math.sqrt(trigger ** 2 - ped_y0 ** 2) - start) / ego_speed, 0.0)
    t_end = t_fire + (ped_y1 - ped_y0) / velocity
    dx0 = cross_x - start
    best = seg_min((dx0, ped_y0), (-ego_speed, 0.0), 0.0, t_fire)
    best = min(best, seg_min((dx0, ped_y0 - velocity * t_fire), (-ego_speed, velocity), t_fire, t_end))
    best = min(best, seg_min((dx0, ped_y1), (-ego_speed, 0.0), t_end, horizon))
    return max(best - radii, 0.0)


@pytest.fixture
def ped_template():
    return get_template("ped_crossing")
