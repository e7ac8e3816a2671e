"""Polyhedral C-pseudo-cones represented as Wulff shapes.

A positive support vector f over directions v_1..v_m in int C° represents

    [f] = C ∩ {x : <x, v_j> <= -f_j for all j},

whose radial function has the closed form max_j f_j / <u, -v_j>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cone import DEFAULT_MARGIN, Cone, polar_membership
from .errors import DirectionOutsideCone, EmptySubset, InvalidMeasure, ValidationError

DUPLICATE_ANGLE = 1e-8


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite atomic measure with positive weights on directions in int C°."""

    cone: Cone
    directions: np.ndarray
    weights: np.ndarray
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if v.shape[0] == 0:
            raise InvalidMeasure("measure must have at least one atom")
        if v.shape[1] != self.cone.dim:
            raise InvalidMeasure(f"directions must have dimension {self.cone.dim}, got {v.shape[1]}")
        if w.shape != (v.shape[0],):
            raise InvalidMeasure(f"expected {v.shape[0]} weights, got {w.shape[0]}")
        norms = np.linalg.norm(v, axis=1)
        for j, (norm, wj) in enumerate(zip(norms, w)):
            if not np.isfinite(norm) or norm == 0.0:
                raise InvalidMeasure(f"atom {j}: direction must be a nonzero finite vector", j)
            if not (np.isfinite(wj) and wj > 0.0):
                raise InvalidMeasure(f"atom {j}: weight must be positive and finite, got {wj}", j)
        v = v / norms[:, None]
        for j in range(len(v)):
            if not polar_membership(self.cone, v[j], self.margin):
                raise InvalidMeasure(f"atom {j}: direction {v[j].tolist()} is not in the interior of the polar cone", j)
        cos_dup = math.cos(DUPLICATE_ANGLE)
        gram = v @ v.T
        for j in range(len(v)):
            for k in range(j + 1, len(v)):
                if gram[j, k] > cos_dup:
                    raise InvalidMeasure(f"atoms {j} and {k} have duplicate directions", k)
        object.__setattr__(self, "directions", _frozen(v))
        object.__setattr__(self, "weights", _frozen(w))

    def __len__(self):
        return len(self.weights)

    @property
    def total(self):
        return float(np.sum(self.weights))

    def restrict(self, subset):
        """The measure μ⌞ω for an index set ω."""
        idx = _index_array(subset, len(self))
        return DiscreteMeasure(self.cone, self.directions[idx], self.weights[idx], self.margin)

    def scaled(self, c):
        return DiscreteMeasure(self.cone, self.directions, c * self.weights, self.margin)


@dataclass(frozen=True, eq=False)
class WulffShape:
    """The Wulff shape [f] of a positive support vector over fixed directions."""

    cone: Cone
    directions: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.directions, dtype=float))
        f = np.atleast_1d(np.asarray(self.support, dtype=float))
        if f.shape != (v.shape[0],):
            raise ValidationError(f"support has {f.shape[0]} entries for {v.shape[0]} directions")
        if not np.all(np.isfinite(f)) or np.any(f <= 0.0):
            raise ValidationError("support values must be positive and finite")
        object.__setattr__(self, "directions", v if not v.flags.writeable else _frozen(v))
        object.__setattr__(self, "support", _frozen(f))

    def __len__(self):
        return len(self.support)

    def scaled(self, c):
        return WulffShape(self.cone, self.directions, c * self.support)

    def with_support(self, f):
        return WulffShape(self.cone, self.directions, f)

    def contains(self, x):
        """Membership of points (rows of ``x``) in [f]."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        inside = np.all(x @ self.directions.T <= -self.support, axis=1)
        return inside & self.cone.contains(x)


def wulff(measure, support):
    """Wulff shape of ``support`` over the atoms of ``measure``."""
    return WulffShape(measure.cone, measure.directions, support)


def _index_array(subset, m):
    idx = np.asarray(list(subset), dtype=int)
    if idx.size == 0:
        raise EmptySubset("subset must be nonempty")
    if np.any(idx < 0) or np.any(idx >= m):
        raise ValidationError(f"subset indices must lie in [0, {m})")
    if len(np.unique(idx)) != len(idx):
        raise ValidationError("subset indices must be distinct")
    return idx


def radial_over(shape, nodes):
    """Radial function and radial Gauss map index at each row of ``nodes``.

    No interiority check; ``nodes`` must lie in Ω_C. Ties go to the lowest
    index.
    """
    cosines = -(nodes @ shape.directions.T)
    ratios = shape.support / cosines
    idx = np.argmax(ratios, axis=1)
    rho = ratios[np.arange(len(nodes)), idx]
    return rho, idx


def radial(shape, u):
    """ρ_[f](u) and the index of the facet hit by the ray through u.

    Accepts a single unit vector (returns ``(float, int)``) or a stack of
    them (returns arrays).
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    nodes = np.atleast_2d(u)
    if not np.all(shape.cone.interior_direction(nodes)):
        raise DirectionOutsideCone("radial function is only defined for directions in Ω_C")
    rho, idx = radial_over(shape, nodes)
    if single:
        return float(rho[0]), int(idx[0])
    return rho, idx


def support_value(shape, v, grid):
    """h_[f](v) for v in Ω_{C°}, approximated over the boundary points ρ(u)u.

    For v in int C° the sup of <x, v> over [f] is attained on the radial
    graph, so the grid value is a lower bound converging from below.
    """
    _check_grid(shape, grid)
    rho, _ = radial_over(shape, grid.nodes)
    return float(np.max(rho * (grid.nodes @ np.asarray(v, dtype=float))))


def min_distance(shape, grid):
    """b([f]) = d(o, [f]) as the minimum of the radial function over grid nodes.

    The error is bounded by the node spacing times the Lipschitz constant of
    ρ; see ``min_distance_slack``.
    """
    _check_grid(shape, grid)
    rho, _ = radial_over(shape, grid.nodes)
    return float(np.min(rho))


def min_distance_slack(shape, grid):
    """Upper bound on the grid error of ``min_distance``."""
    cosines = np.clip(-(grid.nodes @ shape.directions.T), 1e-300, 1.0)
    lip = float(np.max(np.sqrt(1.0 - np.minimum(cosines, 1.0) ** 2) / cosines))
    return min_distance(shape, grid) * (1.0 + lip) * grid.spacing


def restrict(shape, subset):
    """Wulff shape over the sub-support ``subset``; contains the original set."""
    idx = _index_array(subset, len(shape))
    return WulffShape(shape.cone, shape.directions[idx], shape.support[idx])


def _check_grid(shape, grid):
    if grid.cone is not shape.cone:
        raise DirectionOutsideCone("grid was built for a different cone")
