"""Gaussian co-volume and Gaussian surface area measure of Wulff shapes.

Two independent routes compute the surface measure: a push-forward
quadrature over Ω_C (any dimension) and exact facet integration (planar
cones only). Their agreement, together with the Monte Carlo co-volume
oracle, is the main correctness check of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DimensionUnsupported
from .pseudo_cone import _check_grid, radial_over
from .special import SQRT_HALF_PI, gauss_normalizer, radial_integral

PUSHFORWARD = "push-forward"
FACET = "facet"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class MeasureVector:
    """Per-direction masses S_j of the Gaussian surface area measure."""

    masses: np.ndarray
    route: str
    error: float = 0.0

    @property
    def total(self):
        return float(np.sum(self.masses))

    def __len__(self):
        return len(self.masses)

    def __getitem__(self, j):
        return self.masses[j]


def _pushforward_terms(shape, weights, rho, idx):
    n = shape.cone.dim
    return weights * rho**n * np.exp(-0.5 * rho * rho) / shape.support[idx] * gauss_normalizer(n)


def _split_rule(shape, edges):
    """Midpoint rule on angular cells, each cut at its facet breakpoint.

    A cell whose two edges are hit by different facets j, i is split at the
    direction u with f_i <u, -v_j> = f_j <u, -v_i>, and each part gets its own
    midpoint node assigned to its facet. The discrete co-volume is then C^1 in
    f up to O(h^2), instead of jumping in slope whenever a breakpoint crosses a
    node. Cells crossed by three or more facets keep the node's facet only.
    Returns ``(weights, rho, idx)``.
    """
    v = shape.directions
    f = shape.support
    mid = 0.5 * (edges[:-1] + edges[1:])
    weights = np.diff(edges)
    nodes = np.column_stack([np.cos(mid), np.sin(mid)])
    _, idx = radial_over(shape, nodes)
    _, edge_idx = radial_over(shape, np.column_stack([np.cos(edges), np.sin(edges)]))
    cells = np.nonzero(edge_idx[:-1] != edge_idx[1:])[0]
    if cells.size:
        j, i = edge_idx[cells], edge_idx[cells + 1]
        d = f[i, None] * v[j] - f[j, None] * v[i]
        base = np.arctan2(d[:, 1], d[:, 0]) + 0.5 * math.pi
        a, b = edges[cells], edges[cells + 1]
        tb = base + math.pi * np.round((mid[cells] - base) / math.pi)
        tb = np.clip(tb, a, b)
        weights = np.concatenate([weights, b - tb])
        weights[cells] = tb - a
        mid = np.concatenate([mid, 0.5 * (tb + b)])
        mid[cells] = 0.5 * (a + tb)
        idx = np.concatenate([idx, i])
        idx[cells] = j
        nodes = np.column_stack([np.cos(mid), np.sin(mid)])
    rho = f[idx] / -np.einsum("kd,kd->k", nodes, v[idx])
    return weights, rho, idx


def _coarse_edges(edges):
    coarse = edges[::2]
    if coarse[-1] != edges[-1]:
        coarse = np.append(coarse, edges[-1])
    return coarse


def _rule(shape, grid):
    _check_grid(shape, grid)
    if grid.edges is not None:
        return _split_rule(shape, grid.edges)
    rho, idx = radial_over(shape, grid.nodes)
    return grid.weights, rho, idx


def evaluate(shape, grid):
    """Co-volume and push-forward surface masses from a single radial pass."""
    n = shape.cone.dim
    weights, rho, idx = _rule(shape, grid)
    cov = gauss_normalizer(n) * float(np.dot(weights, radial_integral(rho, n)))
    terms = _pushforward_terms(shape, weights, rho, idx)
    return cov, np.bincount(idx, weights=terms, minlength=len(shape))


def covolume(shape, grid):
    """Gaussian co-volume γ_n(C \\ [f]) by polar-coordinate quadrature."""
    n = shape.cone.dim
    weights, rho, _ = _rule(shape, grid)
    return gauss_normalizer(n) * float(np.dot(weights, radial_integral(rho, n)))


def surface_measure_pushforward(shape, grid):
    """S_j via the radial Gauss map: directions whose ray hits facet j
    contribute w_k ρ^n e^{-ρ²/2} / f_j (times the Gaussian normalizer).

    On planar angular grids cells are split at facet breakpoints and the
    error estimate is the Richardson difference against the grid with every
    other edge. Otherwise the estimate sums the contributions of nodes whose
    top two facet candidates are within the grid resolution of each other,
    i.e. the nodes that could be misassigned at a facet boundary.
    """
    _check_grid(shape, grid)
    m = len(shape)
    if grid.edges is not None:
        weights, rho, idx = _split_rule(shape, grid.edges)
        masses = np.bincount(idx, weights=_pushforward_terms(shape, weights, rho, idx), minlength=m)
        cw, crho, cidx = _split_rule(shape, _coarse_edges(grid.edges))
        coarse = np.bincount(cidx, weights=_pushforward_terms(shape, cw, crho, cidx), minlength=m)
        error = float(np.max(np.abs(masses - coarse))) / 3.0
        return MeasureVector(masses=masses, route=PUSHFORWARD, error=error)
    cosines = -(grid.nodes @ shape.directions.T)
    ratios = shape.support / cosines
    idx = np.argmax(ratios, axis=1)
    rho = ratios[np.arange(len(idx)), idx]
    terms = _pushforward_terms(shape, grid.weights, rho, idx)
    masses = np.bincount(idx, weights=terms, minlength=m)
    error = 0.0
    if m > 1:
        second = np.partition(ratios, m - 2, axis=1)[:, m - 2]
        lip = float(np.max(np.sqrt(1.0 - np.minimum(cosines, 1.0) ** 2) / cosines))
        band = (rho - second) / rho < 2.0 * (1.0 + lip) * grid.spacing
        error = float(np.sum(terms[band]))
    return MeasureVector(masses=masses, route=PUSHFORWARD, error=error)


# -- exact planar route --------------------------------------------------------------


def _unwrap_near(angle, center):
    return angle + 2.0 * math.pi * np.round((center - angle) / (2.0 * math.pi))


def facet_intervals(shape):
    """Angular intervals of the planar cone on which each facet is hit.

    Returns ``(runs, psi)``: ``runs`` lists ``(j, t_start, t_end)`` in the
    cone's angle coordinates, ordered by angle with consecutive runs merged;
    ``psi[j]`` is the angle of the foot direction -v_j. Facets absent from
    ``runs`` have an empty inverse Gauss image.
    """
    cone = shape.cone
    if cone.dim != 2:
        raise DimensionUnsupported("facet integration is implemented for n = 2 only")
    lo, hi = cone.interval
    mid = 0.5 * (lo + hi)
    v = shape.directions
    f = shape.support
    psi = _unwrap_near(np.arctan2(-v[:, 1], -v[:, 0]), mid)
    cuts = [lo, hi]
    m = len(f)
    for j in range(m):
        for k in range(j + 1, m):
            p = np.linalg.solve(np.array([v[j], v[k]]), np.array([-f[j], -f[k]]))
            if p @ cone.axis <= 0.0:
                continue
            t = float(_unwrap_near(math.atan2(p[1], p[0]), mid))
            if lo < t < hi:
                cuts.append(t)
    cuts = np.unique(cuts)
    runs = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        t = 0.5 * (a + b)
        j = int(np.argmax(f / np.cos(t - psi)))
        if runs and runs[-1][0] == j:
            runs[-1] = (j, runs[-1][1], float(b))
        else:
            runs.append((j, float(a), float(b)))
    return [(j, a, b) for j, a, b in runs], psi


def surface_measure_facet(shape):
    """S_j by integrating the Gaussian density along each (clipped) facet.

    On facet j, a point at signed arclength s from the foot -f_j v_j has
    |x|² = f_j² + s², so S_j = (1/2π) e^{-f_j²/2} ∫ e^{-s²/2} ds, closed
    form in erf.
    """
    runs, psi = facet_intervals(shape)
    f = shape.support
    masses = np.zeros(len(f))
    for j, a, b in runs:
        s1 = f[j] * math.tan(a - psi[j])
        s2 = f[j] * math.tan(b - psi[j])
        seg = SQRT_HALF_PI * (special.erf(s2 / math.sqrt(2.0)) - special.erf(s1 / math.sqrt(2.0)))
        masses[j] += math.exp(-0.5 * f[j] ** 2) * seg / (2.0 * math.pi)
    return MeasureVector(masses=masses, route=FACET, error=0.0)


# -- tail series ---------------------------------------------------------------------


def _log_tail_term(t0, n, i):
    return -0.5 * (t0 + i) ** 2 + (n - 2) * math.log(t0 + i + 1.0)


def tail_terms(t0, n, count, start=0):
    """Terms e^{-(t0+i)²/2} (t0+i+1)^{n-2} for i = start .. start+count-1."""
    return np.array([math.exp(_log_tail_term(t0, n, i)) for i in range(start, start + count)])


def tail_series(t0, n, start=0):
    """Sum of e^{-(t0+i)²/2} (t0+i+1)^{n-2} over i >= start.

    Bounds the Gaussian surface mass of the slabs beyond height t0 + start
    along the axis, up to a cone-dependent constant. Summation stops once a
    term is below 1e-18 of the running sum and the terms are decreasing.
    """
    if not t0 > 0.0:
        raise ValueError("t0 must be positive")
    terms = []
    i = start
    prev = math.inf
    while True:
        term = math.exp(_log_tail_term(t0, n, i))
        if term == 0.0 and (not terms or prev > term):
            break
        terms.append(term)
        total = math.fsum(terms)
        if term < 1e-18 * total and term < prev:
            break
        prev = term
        i += 1
    return math.fsum(terms)


# -- Monte Carlo oracle ----------------------------------------------------------------

_MC_CHUNK = 1 << 16


def mc_covolume_oracle(shape, samples, seed):
    """Monte Carlo estimate of γ_n(C \\ [f]) with its binomial standard error.

    Standard Gaussian vectors from a Philox stream are tested for membership
    in C and in the complement of [f]. Deterministic for a fixed seed.
    """
    samples = int(samples)
    if samples < 10_000:
        raise ValueError("mc_covolume_oracle needs at least 10^4 samples")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    n = shape.cone.dim
    hits = 0
    left = samples
    while left > 0:
        size = min(left, _MC_CHUNK)
        x = rng.standard_normal((size, n))
        cut = np.any(x @ shape.directions.T > -shape.support, axis=1)
        hits += int(np.count_nonzero(cut & shape.cone.contains(x)))
        left -= size
    p = hits / samples
    return p, math.sqrt(p * (1.0 - p) / samples)
