"""Random Wulff shapes with every facet active, for checks and demos."""

import math

import numpy as np

from .measures import covolume, surface_measure_facet, surface_measure_pushforward
from .pseudo_cone import DiscreteMeasure, WulffShape


def spread_directions(cone, m, rng, margin=0.08, jitter=0.35):
    """m directions in int C°, roughly evenly spread, as unit rows.

    Planar cones: foot directions -v are jittered around equally spaced
    angles of the dual cone. Higher dimensions (circular cones only): feet
    on a ring around the axis plus one near the axis.
    """
    if cone.dim == 2:
        lo, hi = cone.interval
        a, b = hi - 0.5 * math.pi + margin, lo + 0.5 * math.pi - margin
        step = (b - a) / m
        t = a + step * (np.arange(m) + 0.5 + jitter * rng.uniform(-0.5, 0.5, m))
        return -np.column_stack([np.cos(t), np.sin(t)])
    if cone.kind != "circular":
        raise ValueError("spread_directions supports planar cones and circular cones")
    opening = 0.5 * math.pi - cone.half_angle - margin
    frame = cone.frame
    feet = [frame[:, 0]]
    for k in range(m - 1):
        phi = 2.0 * math.pi * (k + 0.5 * jitter * rng.uniform(-1, 1)) / (m - 1)
        psi = opening * rng.uniform(0.45, 0.85)
        side = math.cos(phi) * frame[:, 1] + math.sin(phi) * frame[:, 2 % cone.dim]
        feet.append(math.cos(psi) * frame[:, 0] + math.sin(psi) * side)
    feet = np.array(feet)
    return -feet / np.linalg.norm(feet, axis=1)[:, None]


def hyperbolic_support(cone, directions, radius=1.0):
    """Support values of a hyperbolic sheet asymptotic to C, at -directions.

    Planar cones: E = {a g_lo + b g_hi : a, b >= 0, ab >= r^2} with
    h_bar(v) = 2 r sqrt(<g_lo, -v><g_hi, -v>). Circular cones: the sheet
    t^2 - |y|^2 / tan^2(theta) >= r^2 with h_bar = r sqrt(cos^2 psi -
    tan^2 theta sin^2 psi), psi the angle between -v and the axis. Every
    direction is then a tangent facet.
    """
    feet = -np.atleast_2d(directions)
    if cone.dim == 2:
        g = cone.generators
        return 2.0 * radius * np.sqrt((feet @ g[0]) * (feet @ g[1]))
    if cone.kind != "circular":
        raise ValueError("hyperbolic_support supports planar cones and circular cones")
    c = np.clip(feet @ cone.axis, -1.0, 1.0)
    return radius * np.sqrt(c * c - math.tan(cone.half_angle) ** 2 * (1.0 - c * c))


def random_active_shape(cone, m, rng, grid=None, scale=(0.3, 1.2), covolume_cap=None, min_share=0.05, max_tries=500):
    """Random WulffShape whose m facets all carry surface mass.

    Supports are a randomly scaled hyperbolic sheet perturbed by up to 5%.
    Each facet's mass must be at least ``min_share`` of the largest one.
    With ``covolume_cap`` the support is shrunk until the co-volume is
    below the cap (requires ``grid``).
    """
    for _ in range(max_tries):
        v = spread_directions(cone, m, rng)
        f = hyperbolic_support(cone, v, rng.uniform(*scale)) * (1.0 + 0.05 * rng.uniform(-1.0, 1.0, m))
        shape = WulffShape(cone, v, f)
        if covolume_cap is not None:
            while covolume(shape, grid) >= covolume_cap:
                shape = shape.scaled(0.8)
        if cone.dim == 2:
            s = surface_measure_facet(shape).masses
        else:
            s = surface_measure_pushforward(shape, grid).masses
        if np.min(s) >= min_share * np.max(s):
            return shape
    raise RuntimeError("could not draw a strictly active shape")


def measure_of(shape, weights):
    return DiscreteMeasure(shape.cone, shape.directions, weights)
