"""Pointed convex cones, their polar cones, and quadrature grids over Ω_C.

Two cone families are supported: circular cones (any dimension, given by an
axis and a half-angle) and polyhedral cones in dimensions 2 and 3 (given by
generating rays). Ω_C denotes the open spherical section int C ∩ S^{n-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.spatial import ConvexHull

from .errors import (
    DimensionUnsupported,
    DirectionOutsideCone,
    NoConvergence,
    NotFullDim,
    NotPointed,
    UnsupportedScheme,
    ValidationError,
)
from .special import radial_integral, radial_integral_total, sphere_area

DEFAULT_MARGIN = 1e-9

ANGULAR = "angular-product"
TRIANGULATED = "triangulated"
MONTE_CARLO = "monte-carlo"
SCHEMES = (ANGULAR, TRIANGULATED, MONTE_CARLO)


def _unit(v, what="vector"):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValidationError(f"{what} must be a nonzero finite vector")
    return v / norm


def _frame(axis):
    """Orthonormal matrix whose first column is ``axis``.

    Deterministic: built from QR of [axis | I].
    """
    n = axis.shape[0]
    q, _ = np.linalg.qr(np.column_stack([axis, np.eye(n)]))
    q = q[:, :n]
    if q[:, 0] @ axis < 0:
        q = -q
    return q


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _triangle_excess(a, b, c):
    """Spherical excess (area) of unit-vector triangles, vectorized over rows."""
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(num, den)


@dataclass(frozen=True, eq=False)
class Cone:
    """A pointed, full-dimensional closed convex cone C in R^n.

    ``generators`` holds the extreme rays of a polyhedral cone, ordered
    around the axis; for circular cones it is ``None`` (except in the
    plane, where the two boundary rays are stored). ``facet_normals`` are
    the outward unit normals of a polyhedral cone, which generate C°.
    """

    dim: int
    kind: str
    axis: np.ndarray
    half_angle: float | None = None
    generators: np.ndarray | None = None
    facet_normals: np.ndarray | None = None
    interval: tuple[float, float] | None = None
    frame: np.ndarray = field(default=None, repr=False)

    # -- membership --------------------------------------------------------

    def contains(self, x):
        """Membership of points (rows of ``x``) in the closed cone."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "circular":
            return x @ self.axis >= np.linalg.norm(x, axis=1) * math.cos(self.half_angle)
        return np.all(x @ self.facet_normals.T <= 0.0, axis=1)

    def interior_direction(self, u, margin=0.0):
        """True where unit vectors ``u`` lie in Ω_C (strictly, with angular margin)."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.kind == "circular":
            return u @ self.axis > math.cos(max(self.half_angle - margin, 0.0))
        return np.all(u @ self.facet_normals.T < -math.sin(margin), axis=1)

    @property
    def beta(self):
        return cone_gaussian_mass(self)

    @property
    def area(self):
        """Hausdorff measure of Ω_C."""
        return cone_gaussian_mass(self) * sphere_area(self.dim)

    def to_spec(self):
        """Description that ``make_cone`` maps back to an identical cone."""
        if self.kind == "circular":
            return {
                "type": "circular",
                "axis": [float(a) for a in self.axis],
                "half_angle": float(self.half_angle),
                "angle_unit": "radians",
            }
        return {"type": "polyhedral", "generators": [[float(a) for a in g] for g in self.generators]}


# -- construction --------------------------------------------------------------


def circular_cone(axis, half_angle):
    """Circular cone {x : angle(x, axis) <= half_angle}, half_angle in radians."""
    axis = _unit(axis, "axis")
    n = axis.shape[0]
    if n < 2:
        raise DimensionUnsupported("cone dimension must be at least 2")
    half_angle = float(half_angle)
    if not half_angle > 0.0:
        raise NotFullDim("half_angle must be positive")
    if half_angle >= math.pi / 2:
        raise NotPointed(f"half_angle {half_angle} >= pi/2 gives a cone that is not pointed")
    generators = None
    interval = None
    if n == 2:
        phi = math.atan2(axis[1], axis[0])
        interval = (phi - half_angle, phi + half_angle)
        generators = _frozen([[math.cos(a), math.sin(a)] for a in interval])
    return Cone(
        dim=n,
        kind="circular",
        axis=_frozen(axis),
        half_angle=half_angle,
        generators=generators,
        interval=interval,
        frame=_frozen(_frame(axis)),
    )


def _separating_axis(g):
    """Unit w maximizing min_i <w, g_i> over the box |w|_inf <= 1; None if not positive."""
    k, n = g.shape
    # variables (w, s); maximize s subject to s <= <w, g_i>
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.column_stack([-g, np.ones(k)])
    res = optimize.linprog(c, A_ub=a_ub, b_ub=np.zeros(k), bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    if not res.success or res.x[-1] <= 1e-12:
        return None
    return _unit(res.x[:n])


def polyhedral_cone(generators):
    """Polyhedral cone spanned by ``generators`` (n = 2 or 3)."""
    g = np.asarray(generators, dtype=float)
    if g.ndim != 2 or g.shape[0] < 1:
        raise ValidationError("generators must be a non-empty list of vectors")
    n = g.shape[1]
    if n not in (2, 3):
        raise DimensionUnsupported(f"polyhedral cones are supported for n in (2, 3), got n={n}")
    norms = np.linalg.norm(g, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise ValidationError("generators must be nonzero finite vectors")
    g = g / norms[:, None]
    for i in range(len(g)):
        for j in range(i + 1, len(g)):
            if g[i] @ g[j] <= -1.0 + 1e-12:
                raise NotPointed(f"generators {i} and {j} are opposite")
    if np.linalg.matrix_rank(g, tol=1e-10) < n:
        raise NotFullDim(f"generators span fewer than {n} dimensions")

    axis = g.mean(axis=0)
    if np.linalg.norm(axis) < 1e-12 or np.any(g @ _unit(axis) <= 0.0):
        w = _separating_axis(g)
        if w is None:
            raise NotPointed("no strictly separating functional exists")
        # center the axis among the extreme rays seen from w
        proj = g / (g @ w)[:, None]
        axis = proj.mean(axis=0)
    axis = _unit(axis)
    if np.any(g @ axis <= 0.0):
        raise NotPointed("generators are not strictly on one side of any hyperplane")

    frame = _frame(axis)
    # project rays onto the affine slice <x, axis> = 1 and keep the extreme ones in angular order
    slice_pts = (g / (g @ axis)[:, None]) @ frame[:, 1:]
    if n == 2:
        t = slice_pts[:, 0]
        ext = g[[int(np.argmin(t)), int(np.argmax(t))]]
        angles = np.arctan2(ext[:, 1], ext[:, 0])
        lo, hi = float(angles[0]), float(angles[1])
        if hi < lo:
            lo, hi = hi, lo
        if hi - lo > math.pi:
            lo, hi = hi, lo + 2.0 * math.pi
        ext = np.array([[math.cos(lo), math.sin(lo)], [math.cos(hi), math.sin(hi)]])
        normals = np.array([[math.sin(lo), -math.cos(lo)], [-math.sin(hi), math.cos(hi)]])
        interval = (lo, hi)
    else:
        hull = ConvexHull(slice_pts)
        order = list(hull.vertices)  # counterclockwise in the slice frame
        ext = g[order]
        normals = []
        for i in range(len(ext)):
            a = np.cross(ext[i], ext[(i + 1) % len(ext)])
            if a @ axis > 0:
                a = -a
            normals.append(_unit(a))
        normals = np.array(normals)
        interval = None
    if np.any(ext @ normals.T > 1e-12):
        raise NotPointed("generators do not bound a convex cone")
    return Cone(
        dim=n,
        kind="polyhedral",
        axis=_frozen(axis),
        generators=_frozen(ext),
        facet_normals=_frozen(normals),
        interval=interval,
        frame=_frozen(frame),
    )


_ANGLE_UNITS = {"radians": 1.0, "degrees": math.pi / 180.0}


def angle_factor(unit):
    try:
        return _ANGLE_UNITS[unit]
    except KeyError:
        raise ValidationError(f"angle_unit must be one of {sorted(_ANGLE_UNITS)}, got {unit!r}") from None


def make_cone(spec):
    """Build a validated Cone from a description dict.

    Circular: ``{"type": "circular", "axis": [...], "half_angle": x,
    "angle_unit": "radians" | "degrees"}``. Polyhedral: ``{"type":
    "polyhedral", "generators": [[...], ...]}``.
    """
    kind = spec.get("type")
    if kind == "circular":
        if "angle_unit" not in spec:
            raise ValidationError("circular cone requires an explicit angle_unit")
        theta = float(spec["half_angle"]) * angle_factor(spec["angle_unit"])
        axis = spec["axis"]
        if "dim" in spec and len(axis) != int(spec["dim"]):
            raise ValidationError(f"axis has length {len(axis)} but dim is {spec['dim']}")
        return circular_cone(axis, theta)
    if kind == "polyhedral":
        return polyhedral_cone(spec["generators"])
    raise ValidationError(f"unknown cone type {kind!r}")


# -- polar cone ------------------------------------------------------------------


def polar_membership(cone, v, margin=DEFAULT_MARGIN):
    """True iff unit vector ``v`` lies in int C° with the given angular margin."""
    v = np.asarray(v, dtype=float)
    if cone.kind == "circular":
        cos_to_neg_axis = float(np.clip(-(v @ cone.axis), -1.0, 1.0))
        return bool(math.acos(cos_to_neg_axis) < math.pi / 2 - cone.half_angle - margin)
    return bool(np.all(cone.generators @ v < -math.sin(margin)))


# -- Gaussian mass and Λ -----------------------------------------------------------


def _polyhedral_solid_angle(cone):
    if cone.dim == 2:
        lo, hi = cone.interval
        return hi - lo
    g = cone.generators
    k = len(g)
    a = np.repeat(cone.axis[None, :], k, axis=0)
    return float(np.sum(_triangle_excess(a, g, np.roll(g, -1, axis=0))))


def cone_gaussian_mass(cone):
    """β = γ_n(C), the Gaussian mass of the cone (a value in (0, 1/2))."""
    n = cone.dim
    if cone.kind == "circular":
        theta = cone.half_angle
        if n == 2:
            return theta / math.pi
        if n == 3:
            return 0.5 * (1.0 - math.cos(theta))
        return 0.5 * float(special.betainc(0.5 * (n - 1), 0.5, math.sin(theta) ** 2))
    return _polyhedral_solid_angle(cone) / sphere_area(n)


def lambda_bound(cone, level=None):
    """Radius Λ with γ_n(Λ B^n ∩ C) = level (default β/2).

    Every pseudo-cone whose co-volume is at most ``level`` lies at distance
    at most Λ from the origin. Returns ``math.inf`` when ``level >= β``.
    """
    beta = cone_gaussian_mass(cone)
    if level is None:
        level = 0.5 * beta
    if not level > 0.0:
        raise ValueError("constraint level must be positive")
    if level >= beta:
        return math.inf
    q = level / beta
    n = cone.dim
    if n == 2:
        return math.sqrt(-2.0 * math.log1p(-q))
    total = radial_integral_total(n)

    def excess(r):
        return float(radial_integral(r, n)) / total - q

    hi = 1.0
    for _ in range(64):
        if excess(hi) > 0:
            break
        hi *= 2.0
    else:
        raise NoConvergence("could not bracket the Λ root")
    return optimize.brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-15, maxiter=200)


# -- quadrature grids ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SphericalGrid:
    """Quadrature nodes in Ω_C with positive weights summing to its area."""

    cone: Cone
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    resolution: tuple
    seed: int | None
    spacing: float
    edges: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.weights)

    def coordinates(self):
        """Angle parameters of the nodes for plotting.

        n = 2: polar angle. Otherwise angle from the axis and, for n = 3,
        azimuth in the cone's frame.
        """
        u = self.nodes
        if self.cone.dim == 2:
            return np.arctan2(u[:, 1], u[:, 0])[:, None]
        local = u @ self.cone.frame
        polar = np.arccos(np.clip(local[:, 0], -1.0, 1.0))
        if self.cone.dim == 3:
            return np.column_stack([polar, np.arctan2(local[:, 2], local[:, 1])])
        return polar[:, None]


def default_scheme(cone):
    if cone.dim == 2:
        return ANGULAR
    if cone.kind == "polyhedral":
        return TRIANGULATED
    return ANGULAR if cone.dim == 3 else MONTE_CARLO


def _default_resolution(cone, scheme):
    if scheme == ANGULAR:
        return (16384,) if cone.dim == 2 else (128, 256)
    if scheme == TRIANGULATED:
        return (6,)
    return (200000,)


def _normalize_resolution(cone, scheme, resolution):
    if resolution is None:
        return _default_resolution(cone, scheme)
    res = tuple(int(r) for r in np.atleast_1d(resolution))
    if any(r <= 0 for r in res) and not (scheme == TRIANGULATED and res == (0,)):
        raise ValidationError(f"grid resolution must be positive, got {resolution}")
    if scheme == ANGULAR and cone.dim == 3 and len(res) == 1:
        res = (res[0], 2 * res[0])
    return res


def build_grid(cone, resolution=None, scheme=None, seed=0):
    """Deterministic quadrature grid over Ω_C.

    ``angular-product``: midpoint rule in the polar angle (n = 2, both cone
    kinds; the cell edges are kept so integrands can split cells) or an
    exact-area (polar, azimuth) product grid (circular n = 3).
    ``triangulated``: recursive 4-split of the spherical fan triangles of a
    polyhedral n = 3 cone, weights are exact spherical areas.
    ``monte-carlo``: equal-weight uniform samples of Ω_C from a Philox stream.
    """
    scheme = scheme or default_scheme(cone)
    if scheme not in SCHEMES:
        raise UnsupportedScheme(f"unknown grid scheme {scheme!r}")
    res = _normalize_resolution(cone, scheme, resolution)
    n = cone.dim
    edges = None
    if scheme == ANGULAR:
        if n == 2:
            nodes, weights, edges = _angular_2d(cone, res[0])
            spacing = (cone.interval[1] - cone.interval[0]) / res[0]
        elif n == 3 and cone.kind == "circular":
            nodes, weights = _angular_cap(cone, res[0], res[1])
            spacing = max(cone.half_angle / res[0], 2 * math.pi * math.sin(cone.half_angle) / res[1])
        else:
            raise UnsupportedScheme("angular-product grids need n = 2 or a circular n = 3 cone")
        seed = None
    elif scheme == TRIANGULATED:
        if not (n == 3 and cone.kind == "polyhedral"):
            raise UnsupportedScheme("triangulated grids are for polyhedral n = 3 cones")
        nodes, weights = _triangulated(cone, res[0])
        spacing = math.sqrt(2.0 * float(np.max(weights)))
        seed = None
    else:
        nodes, weights = _monte_carlo(cone, res[0], int(seed))
        spacing = (cone.area / res[0]) ** (1.0 / max(n - 1, 1))
    if not np.all(cone.interior_direction(nodes)):
        raise DirectionOutsideCone("grid construction produced a node outside Ω_C")
    return SphericalGrid(
        cone=cone,
        nodes=_frozen(nodes),
        weights=_frozen(weights),
        scheme=scheme,
        resolution=res,
        seed=seed,
        spacing=float(spacing),
        edges=None if edges is None else _frozen(edges),
    )


def _angular_2d(cone, count):
    lo, hi = cone.interval
    edges = np.linspace(lo, hi, count + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return np.column_stack([np.cos(mid), np.sin(mid)]), np.diff(edges), edges


def _angular_cap(cone, n_polar, n_azim):
    theta = cone.half_angle
    psi_edges = np.linspace(0.0, theta, n_polar + 1)
    psi = 0.5 * (psi_edges[:-1] + psi_edges[1:])
    ring = (np.cos(psi_edges[:-1]) - np.cos(psi_edges[1:])) * (2.0 * math.pi / n_azim)
    phi = (np.arange(n_azim) + 0.5) * (2.0 * math.pi / n_azim)
    pp, ff = np.meshgrid(psi, phi, indexing="ij")
    local = np.stack([np.cos(pp), np.sin(pp) * np.cos(ff), np.sin(pp) * np.sin(ff)], axis=-1).reshape(-1, 3)
    weights = np.repeat(ring, n_azim)
    return local @ cone.frame.T, weights


def _triangulated(cone, level):
    g = cone.generators
    k = len(g)
    tri = np.stack([np.repeat(cone.axis[None, :], k, axis=0), g, np.roll(g, -1, axis=0)], axis=1)
    for _ in range(level):
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        ab = a + b
        bc = b + c
        ca = c + a
        ab /= np.linalg.norm(ab, axis=1)[:, None]
        bc /= np.linalg.norm(bc, axis=1)[:, None]
        ca /= np.linalg.norm(ca, axis=1)[:, None]
        tri = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ]
        )
    centroid = tri.sum(axis=1)
    centroid /= np.linalg.norm(centroid, axis=1)[:, None]
    return centroid, _triangle_excess(tri[:, 0], tri[:, 1], tri[:, 2])


def _cap_sample(rng, frame, n, theta, count):
    """Uniform samples on the spherical cap of half-angle theta < pi/2 around frame[:, 0]."""
    a = 0.5 * (n - 1)
    top = special.betainc(a, 0.5, math.sin(theta) ** 2)
    q = rng.random(count) * top
    psi = np.arcsin(np.sqrt(special.betaincinv(a, 0.5, q)))
    if n == 2:
        side = np.where(rng.random(count) < 0.5, -1.0, 1.0)[:, None]
    else:
        side = rng.standard_normal((count, n - 1))
        side /= np.linalg.norm(side, axis=1)[:, None]
    local = np.column_stack([np.cos(psi), np.sin(psi)[:, None] * side])
    return local @ frame.T


def _monte_carlo(cone, count, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    n = cone.dim
    if cone.kind == "circular":
        nodes = _cap_sample(rng, cone.frame, n, cone.half_angle, count)
        keep = cone.interior_direction(nodes)
        nodes = nodes[keep]
        while len(nodes) < count:
            extra = _cap_sample(rng, cone.frame, n, cone.half_angle, count - len(nodes))
            nodes = np.concatenate([nodes, extra[cone.interior_direction(extra)]])
    else:
        cover = float(np.max(np.arccos(np.clip(cone.generators @ cone.axis, -1.0, 1.0))))
        chunks = []
        have = 0
        while have < count:
            cand = _cap_sample(rng, cone.frame, n, cover, max(count, 1024))
            cand = cand[cone.interior_direction(cand)]
            chunks.append(cand)
            have += len(cand)
        nodes = np.concatenate(chunks)[:count]
    weights = np.full(count, cone.area / count)
    return nodes, weights
