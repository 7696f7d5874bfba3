"""Flower areas and the monotone-union check for symmetric adornments.

A flower is the union of pairwise intersections of an even-length disk
list: (B1 n B2) u (B3 n B4) u ...  Keeping the radii fixed while the
centers move with a chain expansion never shrinks the flower, and since
symmetric slender adornments are unions of lenses (each a two-disk
intersection), the flower built from sampled boundary lenses gives a
computable lower proxy for the adornment union whose area must not
decrease along an expansive motion.

Exact areas cover single petals and pairwise disjoint-or-nested petal
sets; anything with genuine petal overlap falls back to stratified
Monte Carlo with a pinned seed and a reported confidence interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .adornment import Adornment, _path_samples, is_slender
from .chain import (
    AdornedChain,
    Configuration,
    disks_common_intersection_empty,
    is_expansion,
)
from .errors import GeometryError, PreconditionError
from .geom import (
    DEFAULT_TOL,
    Disk,
    Region,
    Tolerance,
    circle_circle_intersections,
    norm,
)
from .unfold import Trajectory


@dataclass(frozen=True)
class AreaEstimate:
    """Area value with a 95% confidence half-width (0 when exact)."""

    value: float
    half_width: float = 0.0

    def __post_init__(self) -> None:
        if self.half_width < 0:
            raise GeometryError("half_width must be nonnegative")


@dataclass(frozen=True)
class Flower:
    """Even-length disk list read as consecutive-pair intersections."""

    disks: tuple

    def __post_init__(self) -> None:
        if len(self.disks) % 2 != 0:
            raise GeometryError("a flower needs an even number of disks")

    def petals(self) -> list:
        return [(self.disks[k], self.disks[k + 1])
                for k in range(0, len(self.disks), 2)]


# ---------------------------------------------------------------------------
# exact pieces


def petal_area(d1: Disk, d2: Disk) -> float:
    """Exact area of the intersection of two disks."""
    d = norm(d2.center - d1.center)
    r1, r2 = d1.radius, d2.radius
    if d >= r1 + r2:
        return 0.0
    if d + r1 <= r2:
        return math.pi * r1 * r1
    if d + r2 <= r1:
        return math.pi * r2 * r2
    # proper lens: two circular segments split by the radical line
    x1 = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    x2 = d - x1
    seg1 = r1 * r1 * math.acos(max(-1.0, min(1.0, x1 / r1))) \
        - x1 * math.sqrt(max(r1 * r1 - x1 * x1, 0.0))
    seg2 = r2 * r2 * math.acos(max(-1.0, min(1.0, x2 / r2))) \
        - x2 * math.sqrt(max(r2 * r2 - x2 * x2, 0.0))
    return seg1 + seg2


def lens_area(lens) -> AreaEstimate:
    """Closed-form area of a lens (z on the base gives 0)."""
    return AreaEstimate(petal_area(lens.disk_x(), lens.disk_y()), 0.0)


def _petal_empty(d1: Disk, d2: Disk) -> bool:
    return norm(d2.center - d1.center) >= d1.radius + d2.radius - 1e-15 \
        or min(d1.radius, d2.radius) <= 0.0


def _petal_far_dist(d1: Disk, d2: Disk, c: np.ndarray) -> float:
    """Largest distance from c to a point of the (nonempty) petal d1 n d2.

    The petal is convex, so the maximum sits on the boundary: at a corner
    where the circles cross, or at the point of one circle diametrically
    away from c when that point survives the clip by the other disk.
    """
    d = norm(d2.center - d1.center)
    if d + d1.radius <= d2.radius + 1e-12:
        return norm(c - d1.center) + d1.radius
    if d + d2.radius <= d1.radius + 1e-12:
        return norm(c - d2.center) + d2.radius
    cands = [float(norm(q - c)) for q in
             circle_circle_intersections(d1.center, d1.radius,
                                         d2.center, d2.radius)]
    for da, db in ((d1, d2), (d2, d1)):
        v = da.center - c
        nv = norm(v)
        if nv < 1e-12:
            # c is the center: every boundary point of circle a, and the
            # crossing corners guarantee some of it bounds the petal
            cands.append(da.radius)
        else:
            far = da.center + da.radius * (v / nv)
            if db.contains_point(far, 1e-12):
                cands.append(float(norm(far - c)))
    if not cands:
        raise GeometryError("petal has no boundary candidates; is it empty?")
    return max(cands)


def _petal_inside(inner, outer) -> bool:
    return all(_petal_far_dist(inner[0], inner[1], od.center)
               <= od.radius + 1e-9 for od in outer)


def _petals_disjoint(a, b) -> bool:
    return disks_common_intersection_empty([a[0], a[1], b[0], b[1]])


# ---------------------------------------------------------------------------
# Monte Carlo


def _petal_bbox(d1: Disk, d2: Disk) -> Optional[np.ndarray]:
    lo = np.maximum(d1.center - d1.radius, d2.center - d2.radius)
    hi = np.minimum(d1.center + d1.radius, d2.center + d2.radius)
    if np.any(hi <= lo):
        return None
    return np.array([lo, hi])


def _mc_union_area(boxes: list, member, samples: int, seed: int,
                   grid: int = 16) -> AreaEstimate:
    """Stratified hit-or-miss over the union of the given bboxes.

    member(pts) -> bool mask.  Strata with no overlapping bbox are skipped
    outright; per-stratum seeds come from one spawning sequence so the
    result is deterministic however the work is chunked.
    """
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    span = hi - lo
    if np.any(span <= 0):
        return AreaEstimate(0.0, 0.0)
    xs = np.linspace(lo[0], hi[0], grid + 1)
    ys = np.linspace(lo[1], hi[1], grid + 1)
    live = []
    for i in range(grid):
        for j in range(grid):
            cell = np.array([[xs[i], ys[j]], [xs[i + 1], ys[j + 1]]])
            if any(b[0][0] < cell[1][0] and cell[0][0] < b[1][0] and
                   b[0][1] < cell[1][1] and cell[0][1] < b[1][1]
                   for b in boxes):
                live.append(cell)
    if not live:
        return AreaEstimate(0.0, 0.0)
    n_cell = max(64, samples // len(live))
    seeds = np.random.SeedSequence(seed).spawn(len(live))
    value = 0.0
    var = 0.0
    for cell, ss in zip(live, seeds):
        rng = np.random.default_rng(ss)
        pts = rng.uniform(cell[0], cell[1], size=(n_cell, 2))
        hits = int(np.count_nonzero(member(pts)))
        a_cell = float(np.prod(cell[1] - cell[0]))
        p = hits / n_cell
        value += a_cell * p
        # add-one smoothing keeps the variance honest at p near 0 or 1
        ps = (hits + 1.0) / (n_cell + 2.0)
        var += (a_cell ** 2) * ps * (1.0 - ps) / n_cell
    return AreaEstimate(value, 1.96 * math.sqrt(var))


def _bbox_inside(inner: np.ndarray, outer: np.ndarray,
                 pad: float = 1e-9) -> bool:
    return bool(np.all(inner[0] >= outer[0] - pad)
                and np.all(inner[1] <= outer[1] + pad))


def _bbox_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(a[0] < b[1]) and np.all(b[0] < a[1]))


def flower_area(f: Flower, samples: int = 120_000, seed: int = 0,
                exact_cap: int = 24) -> AreaEstimate:
    """Area of a flower; exact when petals are pairwise disjoint or nested.

    Petal overlap that is neither containment nor emptiness sends the
    computation to stratified Monte Carlo with the given seed, as does any
    flower with more than exact_cap petals (the disjoint-or-nested screen
    is quadratic and large flowers practically always overlap anyway).
    """
    petals = [p for p in f.petals() if not _petal_empty(*p)]
    if not petals:
        return AreaEstimate(0.0, 0.0)
    survivors = petals

    if len(petals) <= exact_cap:
        # drop petals swallowed by another; survivors must be pairwise
        # disjoint for the exact sum, and identical duplicates die here too
        bbs = {id(p): _petal_bbox(*p) for p in petals}
        order = sorted(range(len(petals)),
                       key=lambda k: -petal_area(*petals[k]))
        kept = []
        for k in order:
            if not any(_bbox_inside(bbs[id(petals[k])], bbs[id(petals[m])])
                       and _petal_inside(petals[k], petals[m])
                       for m in kept):
                kept.append(k)
        survivors = [petals[k] for k in kept]
        if all(not _bbox_overlap(bbs[id(survivors[a])],
                                 bbs[id(survivors[b])])
               or _petals_disjoint(survivors[a], survivors[b])
               for a in range(len(survivors))
               for b in range(a + 1, len(survivors))):
            return AreaEstimate(sum(petal_area(*p) for p in survivors), 0.0)

    boxes = [bb for p in survivors if (bb := _petal_bbox(*p)) is not None]
    c1 = np.array([p[0].center for p in survivors])
    r1 = np.array([p[0].radius for p in survivors])
    c2 = np.array([p[1].center for p in survivors])
    r2 = np.array([p[1].radius for p in survivors])

    def member(pts: np.ndarray) -> np.ndarray:
        keep = np.zeros(len(pts), dtype=bool)
        rest = np.arange(len(pts))
        for k in range(len(r1)):
            if rest.size == 0:
                break
            q = pts[rest]
            ok = (np.hypot(q[:, 0] - c1[k, 0], q[:, 1] - c1[k, 1]) <= r1[k]) \
                & (np.hypot(q[:, 0] - c2[k, 0], q[:, 1] - c2[k, 1]) <= r2[k])
            keep[rest[ok]] = True
            rest = rest[~ok]
        return keep

    return _mc_union_area(boxes, member, samples, seed)


def region_union_area(regions: Sequence[Region], samples: int = 120_000,
                      seed: int = 0) -> AreaEstimate:
    """Monte Carlo area of a union of arbitrary regions."""
    boxes = []
    for reg in regions:
        lo, hi = reg.bbox()
        boxes.append(np.array([lo, hi]))

    def member(pts: np.ndarray) -> np.ndarray:
        keep = np.zeros(len(pts), dtype=bool)
        for reg in regions:
            rest = np.nonzero(~keep)[0]
            if rest.size == 0:
                break
            keep[rest] = reg.contains_many(pts[rest])
        return keep

    return _mc_union_area(boxes, member, samples, seed)


# ---------------------------------------------------------------------------
# adornment unions along trajectories


def adornment_lens_radii(a: Adornment, n_boundary: int) -> list:
    """Disk-radius pairs of the boundary-sampled lenses of one adornment.

    Radii are intrinsic to the adornment, so the same list serves every
    frame of a motion; the disks just follow the edge endpoints.  Samples
    on the base line give degenerate lenses and are skipped.
    """
    if a.lens_radii is not None:
        pairs = list(a.lens_radii)
    else:
        pairs = []
        for _, path in a.sides():
            for z in _path_samples(path, n_boundary):
                pairs.append((float(norm(z - a.x)), float(norm(z - a.y))))
    L = a.length
    return [(rx, ry) for rx, ry in pairs
            if rx + ry > L + 1e-9 * max(1.0, L)]


def chain_flower(chain: AdornedChain, c: Configuration,
                 radii: Sequence[list]) -> Flower:
    """Flower whose petals are the sampled lenses placed on a frame."""
    disks = []
    for (i, j), pairs in zip(chain.edges, radii):
        x, y = c.positions[i], c.positions[j]
        for rx, ry in pairs:
            disks.append(Disk(x, rx))
            disks.append(Disk(y, ry))
    return Flower(tuple(disks))


@dataclass(frozen=True)
class AreaMonotonicityReport:
    nondecreasing: bool
    areas: tuple            # AreaEstimate per frame
    worst_pair: Optional[tuple]  # (k, k+1) of the worst drop, if any drop
    worst_drop: float
    n_boundary: int


def union_area_monotonicity(chain: AdornedChain, trajectory: Trajectory,
                            n_boundary: int = 64, samples: int = 120_000,
                            seed: int = 0, max_refine: int = 3,
                            tol: Tolerance = DEFAULT_TOL
                            ) -> AreaMonotonicityReport:
    """Check that the sampled-lens flower never loses area along a motion.

    Preconditions: every adornment symmetric and slender, and consecutive
    frames forming expansions.  The boundary sample count doubles until
    one more doubling moves the first frame's area by less than its own
    confidence interval, then every frame is measured at that resolution
    with an independent seed.  A decrease counts only beyond the combined
    95% interval of the two frames involved.
    """
    for k, a in enumerate(chain.adornments):
        v = is_slender(a, tol=tol)
        if not v.is_slender:
            raise PreconditionError(f"adornment {k} is not slender")
        if not v.is_symmetric:
            raise PreconditionError(f"adornment {k} is not symmetric")
    frames = trajectory.frames
    for k in range(len(frames) - 1):
        if not is_expansion(frames[k], frames[k + 1], tol).is_expansion:
            raise PreconditionError(
                f"frames {k} -> {k + 1} are not an expansion")

    ss = np.random.SeedSequence(seed)
    base_seed = int(ss.generate_state(1)[0])

    def measure(n: int, frame: Configuration, s: int) -> AreaEstimate:
        radii = [adornment_lens_radii(a, n) for a in chain.adornments]
        return flower_area(chain_flower(chain, frame, radii), samples, s)

    n = n_boundary
    first = measure(n, frames[0], base_seed)
    for _ in range(max_refine):
        finer = measure(2 * n, frames[0], base_seed)
        gap = abs(finer.value - first.value)
        if gap < max(first.half_width, finer.half_width, 1e-12):
            break
        n, first = 2 * n, finer

    radii = [adornment_lens_radii(a, n) for a in chain.adornments]
    seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(len(frames))]
    areas = [flower_area(chain_flower(chain, fr, radii), samples, s)
             for fr, s in zip(frames, seeds)]

    worst_pair = None
    worst_drop = 0.0
    ok = True
    for k in range(len(areas) - 1):
        drop = areas[k].value - areas[k + 1].value
        # exact frames get a pure-roundoff floor
        allowed = max(math.hypot(areas[k].half_width,
                                 areas[k + 1].half_width),
                      1e-12 * max(areas[k].value, 1.0))
        if drop > worst_drop:
            worst_drop, worst_pair = drop, (k, k + 1)
        if drop > allowed:
            ok = False
    return AreaMonotonicityReport(ok, tuple(areas), worst_pair,
                                  worst_drop, n)
