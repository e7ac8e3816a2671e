"""One atom on the diagonal of the quarter plane.

For a single direction the Wulff shape is a half-plane cut, its surface mass is
S(c) = exp(-c^2/2) erf(c/sqrt 2) / sqrt(2 pi), and the unconstrained critical
points solve S(c) = mu.  Small masses have two roots; the solver should pick
the small one.  Large masses push the solution onto the co-volume boundary.
"""

import math

import numpy as np
from scipy import optimize, special

from gmc import DiscreteMeasure, SolverConfig, build_grid, make_cone, solve


def surface(c):
    return math.exp(-0.5 * c * c) * special.erf(c / math.sqrt(2.0)) / math.sqrt(2.0 * math.pi)


def main():
    cone = make_cone({"type": "polyhedral", "generators": [[1, 0], [0, 1]]})
    grid = build_grid(cone)
    axis = np.array([1.0, 1.0]) / math.sqrt(2.0)
    peak = optimize.minimize_scalar(lambda c: -surface(c), bounds=(0.1, 3.0), method="bounded").x
    print(f"S peaks at c = {peak:.4f} with value {surface(peak):.5f}")

    for mu in (0.1, 0.16, 1.0):
        report = solve(DiscreteMeasure(cone, [-axis], [mu]), SolverConfig(), grid=grid)
        c = report.support[0]
        roots = []
        if mu < surface(peak):
            roots = [optimize.brentq(lambda t: surface(t) - mu, a, b) for a, b in ((1e-9, peak), (peak, 12.0))]
        print(
            f"mu={mu:<5} f={c:.9f} covolume={report.covolume:.6f} active={report.constraint_active} "
            f"lambda={report.kkt_lambda:.4f} residual={report.residual:.1e} roots={np.round(roots, 6).tolist()}"
        )


if __name__ == "__main__":
    main()
