"""Independent reference implementations used to check the package.

Everything here is written directly from the closed-form definitions,
separately from the package code, so the two can disagree when one of
them is wrong. Keep these free of imports from mergesim.
"""

from __future__ import annotations

import math


def step_oracle(x, y, vx, ax, vy, dt):
    """Constant-acceleration step with the stop-time truncation."""
    v_next = vx + ax * dt
    if v_next < 0.0:
        t = vx / (-ax)
        return (x + vx * t + 0.5 * ax * t * t, y + vy * dt, 0.0)
    return (x + vx * dt + 0.5 * ax * dt * dt, y + vy * dt, v_next)


def desired_gap_oracle(vx, dvx, d_min, t_des, a_max, b_max):
    return d_min + t_des * vx + vx * dvx / (2.0 * math.sqrt(a_max * b_max))


def idm_oracle(vx, gap, dvx, v_des, d_min, t_des, a_max, b_max,
               b_phys=9.0):
    d_des = desired_gap_oracle(vx, dvx, d_min, t_des, a_max, b_max)
    acc = a_max * (1.0 - (vx / v_des) ** 4 - (d_des / gap) ** 2)
    return min(max(acc, -b_phys), a_max)


def ucb_oracle(value, n_node, n_arm, c):
    if n_arm == 0:
        return math.inf
    return value + c * math.sqrt(math.log(n_node) / n_arm)


def percentile_oracle(values, rank):
    """Linear-interpolation percentile over a sorted copy of values."""
    data = sorted(values)
    if not data:
        raise ValueError("empty dataset")
    if len(data) == 1:
        return data[0]
    pos = (rank / 100.0) * (len(data) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(data) - 1)
    frac = pos - lo
    return data[lo] * (1.0 - frac) + data[hi] * frac


def lerp(a, b, t):
    return a + (b - a) * t
