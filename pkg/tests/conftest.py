"""Shared independent oracles for the test suite.

These deliberately avoid the library's own predicates: region work goes
through shapely on densely sampled boundaries, and disk-intersection
emptiness goes through a brute-force grid.
"""

import numpy as np
from shapely.geometry import Polygon


def shapely_sign(a, b, n: int = 1500, depth_tol: float = 1e-3,
                 gap_tol: float = 1e-3):
    """Sign of separation from dense boundary sampling; None when ambiguous."""
    pa = Polygon(a.boundary_samples(n))
    pb = Polygon(b.boundary_samples(n))
    inter = pa.intersection(pb).area
    if inter > depth_tol:
        return -1
    d = pa.distance(pb)
    if d > gap_tol:
        return 1
    return None


def shapely_overlap_area(a, b, n: int = 1500) -> float:
    pa = Polygon(a.boundary_samples(n))
    pb = Polygon(b.boundary_samples(n))
    return pa.intersection(pb).area


def grid_disks_intersection_nonempty(disks, res: float = 1e-3) -> bool:
    """Brute-force grid search for a point common to all disks."""
    lo = np.max([d.center - d.radius for d in disks], axis=0)
    hi = np.min([d.center + d.radius for d in disks], axis=0)
    if np.any(hi < lo):
        return False
    xs = np.arange(lo[0], hi[0] + res, res)
    ys = np.arange(lo[1], hi[1] + res, res)
    for y0 in range(0, len(ys), 512):
        YY, XX = np.meshgrid(ys[y0:y0 + 512], xs, indexing="ij")
        mask = np.ones(XX.shape, dtype=bool)
        for d in disks:
            mask &= (XX - d.center[0]) ** 2 + (YY - d.center[1]) ** 2 \
                <= d.radius ** 2
            if not mask.any():
                break
        if mask.any():
            return True
    return False


def disks_intersection_margin(disks) -> float:
    """max_p min_i (r_i - |p - c_i|): positive iff the common intersection
    has interior, with magnitude the deepest clearance.  The objective is
    concave (a min of cones), so polishing the best seed is global."""
    from scipy.optimize import minimize
    from adornchain.geom import circle_circle_intersections
    centers = np.array([d.center for d in disks], dtype=float)
    radii = np.array([d.radius for d in disks], dtype=float)

    def depth(p):
        return float(np.min(radii - np.hypot(centers[:, 0] - p[0],
                                             centers[:, 1] - p[1])))

    cands = list(centers)
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            ci, cj = centers[i], centers[j]
            d = np.hypot(*(cj - ci))
            if d > 0:
                t = np.clip((radii[i] - radii[j] + d) / (2 * d), 0.0, 1.0)
                cands.append(ci + t * (cj - ci))
            cands.extend(circle_circle_intersections(
                ci, radii[i], cj, radii[j]))
    seed = max(cands, key=depth)
    res = minimize(lambda p: -depth(p), seed, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
    return max(depth(seed), -float(res.fun))
