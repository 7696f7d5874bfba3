"""Slender adornments and the lens calculus.

An adornment hangs a compact shape on a bar: the bar is a chord (the base)
of the shape, and the shape is split by the base into an upper and a lower
side, each an arc path from one base endpoint to the other.  Slenderness
asks that walking either side away from x, the distance to x never drops
and the distance to y never rises.

Everything here is exact on segments and circular arcs: distance to a fixed
point along either primitive has at most one interior extremum, so
monotonicity reduces to evaluating a handful of critical parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryError, PreconditionError
from .geom import (
    Arc,
    ArcPath,
    DEFAULT_TOL,
    Disk,
    Point2,
    Primitive,
    Region,
    Segment,
    Tolerance,
    angle_of,
    arc_between,
    cross2,
    dist_point_prim,
    norm,
    path_reversed,
    path_transformed,
    perp,
    region_contains_region,
    rot,
    unit,
    vec,
)


@dataclass(frozen=True, eq=False)
class MonotonicityWitness:
    """Two arclengths s1 < s2 on one side where a distance runs the wrong way."""

    side: str    # 'upper' or 'lower'
    target: str  # 'x' or 'y'
    s1: float
    s2: float


@dataclass(frozen=True, eq=False)
class SlenderVerdict:
    is_slender: bool
    is_symmetric: bool
    witness: Optional[MonotonicityWitness] = None


@dataclass(frozen=True, eq=False)
class Adornment:
    """Shape on a base chord; either side may be the base itself (degenerate).

    lens_radii, when present, lists (r_x, r_y) disk-radius pairs meaning the
    shape is the union of the corresponding lenses; it powers a vectorized
    membership test for Monte Carlo work.
    """

    base: Segment
    side_upper: ArcPath
    side_lower: ArcPath
    lens_radii: Optional[tuple] = None

    @property
    def x(self) -> Point2:
        return self.base.a

    @property
    def y(self) -> Point2:
        return self.base.b

    @property
    def length(self) -> float:
        return self.base.length()

    def sides(self):
        return (("upper", self.side_upper), ("lower", self.side_lower))

    def region(self) -> Region:
        prims = list(self.side_upper.prims) + path_reversed(self.side_lower.prims)
        fc = None
        if self.lens_radii is not None:
            x, y, pairs = self.base.a, self.base.b, self.lens_radii

            def fc(pts, x=x, y=y, pairs=pairs):
                dx = np.hypot(pts[:, 0] - x[0], pts[:, 1] - x[1])
                dy = np.hypot(pts[:, 0] - y[0], pts[:, 1] - y[1])
                keep = np.zeros(len(pts), dtype=bool)
                for rx, ry in pairs:
                    keep |= (dx <= rx + 1e-12) & (dy <= ry + 1e-12)
                return keep

        return Region(prims, fast_contains=fc)

    def transformed(self, R: np.ndarray, t: np.ndarray) -> "Adornment":
        return Adornment(
            self.base.transformed(R, t),
            ArcPath(path_transformed(self.side_upper.prims, R, t)),
            ArcPath(path_transformed(self.side_lower.prims, R, t)),
            self.lens_radii,
        )

    def placed(self, p_from: Point2, p_to: Point2) -> "Adornment":
        """Rigidly carry the adornment onto the directed edge p_from -> p_to."""
        L = norm(p_to - p_from)
        if abs(L - self.length) > 1e-6 * max(1.0, L):
            raise PreconditionError(
                f"edge length {L} does not match adornment base {self.length}")
        ang = angle_of(p_to - p_from) - angle_of(self.y - self.x)
        R = rot(ang)
        t = p_from - R @ self.x
        return self.transformed(R, t)

    def region_at(self, p_from: Point2, p_to: Point2) -> Region:
        return self.placed(p_from, p_to).region()


# ---------------------------------------------------------------------------
# constructors


def bare_adornment(x: Point2, y: Point2) -> Adornment:
    """Degenerate adornment: the bar itself, both sides the base."""
    return Adornment(Segment(x, y), ArcPath([Segment(x, y)]),
                     ArcPath([Segment(x, y)]))


def triangle_adornment(x: Point2, y: Point2, apex: Point2,
                       apex_lower: Optional[Point2] = None) -> Adornment:
    """Triangle over the base through apex; optionally a second one below."""
    upper = ArcPath([Segment(x, apex), Segment(apex, y)])
    if apex_lower is None:
        lower = ArcPath([Segment(x, y)])
    else:
        lower = ArcPath([Segment(x, apex_lower), Segment(apex_lower, y)])
    return Adornment(Segment(x, y), upper, lower)


def half_disk_adornment(x: Point2, y: Point2, side: int = 1) -> Adornment:
    """Half disk with the base as diameter, on the given side of x -> y."""
    m = (x + y) / 2
    r = norm(y - x) / 2
    a0 = angle_of(x - m)
    arc = Arc(m, r, a0, -math.pi if side > 0 else math.pi)
    bulge = ArcPath([arc])
    flat = ArcPath([Segment(x, y)])
    if side > 0:
        return Adornment(Segment(x, y), bulge, flat)
    return Adornment(Segment(x, y), flat, bulge)


def isosceles_adornment(x: Point2, y: Point2, apex_angle: float,
                        side: int = 1, symmetric: bool = False) -> Adornment:
    """Isosceles triangle over the nonequal base with the given apex angle."""
    L = norm(y - x)
    h = (L / 2) / math.tan(apex_angle / 2)
    n = perp(unit(y - x)) * side
    apex = (x + y) / 2 + h * n
    return triangle_adornment(x, y, apex,
                              (x + y) / 2 - h * n if symmetric else None)


# ---------------------------------------------------------------------------
# slenderness


def _seg_crit_params(seg: Segment, target: Point2) -> list:
    d = seg.b - seg.a
    L2 = float(d @ d)
    if L2 < 1e-300:
        return []
    t = float((target - seg.a) @ d) / L2
    return [t] if 1e-12 < t < 1 - 1e-12 else []


def _arc_crit_params(arc: Arc, target: Point2) -> list:
    w = arc.center - target
    if norm(w) < 1e-14:
        return []  # concentric: distance is constant
    out = []
    base = angle_of(w)
    for phi in (base, base + math.pi):
        if arc.contains_angle(phi, 1e-12):
            t = arc.param_of_angle(phi)
            if 1e-9 < t < 1 - 1e-9:
                out.append(t)
    return out


def _crit_params(prim: Primitive, target: Point2) -> list:
    if isinstance(prim, Segment):
        return _seg_crit_params(prim, target)
    return _arc_crit_params(prim, target)


def _side_violation(path: ArcPath, target: Point2, nondecreasing: bool,
                    eps: float):
    """Largest monotonicity violation along the path; (magnitude, (s1, s2))."""
    worst, pair = 0.0, None
    s0 = 0.0
    for prim in path.prims:
        ln = prim.length()
        ts = sorted({0.0, 1.0, *_crit_params(prim, target)})
        vals = [norm(prim.point_at(t) - target) for t in ts]
        for (t1, v1), (t2, v2) in zip(zip(ts, vals), zip(ts[1:], vals[1:])):
            viol = (v1 - v2) if nondecreasing else (v2 - v1)
            if viol > worst:
                worst = viol
                pair = (s0 + t1 * ln, s0 + t2 * ln)
        s0 += ln
    return worst, pair


def _sampled_violation(path: ArcPath, target: Point2, nondecreasing: bool,
                       n: int):
    total = path.length()
    ss = np.linspace(0.0, total, max(n, 4))
    vals = [norm(path.point_at_arclength(float(s)) - target) for s in ss]
    worst, pair = 0.0, None
    run_best, run_s = vals[0], float(ss[0])
    for s, v in zip(ss[1:], vals[1:]):
        if nondecreasing:
            viol = run_best - v
        else:
            viol = v - run_best
        if viol > worst:
            worst, pair = viol, (run_s, float(s))
        better = v > run_best if nondecreasing else v < run_best
        if better:
            run_best, run_s = v, float(s)
    return worst, pair


def _reflect_across_base(x: Point2, y: Point2, pts: np.ndarray) -> np.ndarray:
    u = unit(y - x)
    n = perp(u)
    w = pts - x
    return x + np.outer(w @ u, u) - np.outer(w @ n, n)


def _sides_mirror(a: Adornment, tol: float = 1e-7, n: int = 96) -> bool:
    su = _path_samples(a.side_upper, n)
    sl = _path_samples(a.side_lower, n)
    ml = _reflect_across_base(a.x, a.y, sl)
    mu = _reflect_across_base(a.x, a.y, su)
    for pts, path in ((ml, a.side_upper), (mu, a.side_lower)):
        for p in pts:
            if min(dist_point_prim(p, prim) for prim in path.prims) > tol:
                return False
    return True


def _path_samples(path: ArcPath, n: int) -> np.ndarray:
    total = path.length()
    if total <= 0:
        return np.array([path.start()])
    return np.array([path.point_at_arclength(float(s))
                     for s in np.linspace(0, total, n)])


def is_slender(a: Adornment, n_samples: int = 48,
               tol: Tolerance = DEFAULT_TOL) -> SlenderVerdict:
    """Classify an adornment; ties at equal distances count as monotone."""
    for name, path in a.sides():
        if norm(path.start() - a.x) > 1e-6 or norm(path.end() - a.y) > 1e-6:
            raise GeometryError(f"{name} side does not run from x to y")
    eps = tol.eps_geom
    witness = None
    for name, path in a.sides():
        for tgt_name, tgt, nondec in (("x", a.x, True), ("y", a.y, False)):
            viol, pair = _side_violation(path, tgt, nondec, eps)
            if viol <= eps:
                n_chk = max(n_samples, 2 * len(path.prims))
                viol, pair = _sampled_violation(path, tgt, nondec, n_chk)
            if viol > eps and witness is None:
                witness = MonotonicityWitness(name, tgt_name, pair[0], pair[1])
    return SlenderVerdict(is_slender=witness is None,
                          is_symmetric=_sides_mirror(a),
                          witness=witness)


# ---------------------------------------------------------------------------
# lenses


@dataclass(frozen=True, eq=False)
class Lens:
    """Intersection of the disk at x through z with the disk at y through z."""

    x: Point2
    y: Point2
    z: Point2

    def __post_init__(self) -> None:
        L = norm(self.y - self.x)
        if L < 1e-12:
            raise GeometryError("lens base is degenerate")
        slack = 1e-9 * max(1.0, L)
        if self.rx > L + slack or self.ry > L + slack:
            raise GeometryError("defining point too far from a base endpoint")

    @property
    def length(self) -> float:
        return norm(self.y - self.x)

    @property
    def rx(self) -> float:
        return norm(self.z - self.x)

    @property
    def ry(self) -> float:
        return norm(self.z - self.y)

    def disk_x(self) -> Disk:
        return Disk(self.x, self.rx)

    def disk_y(self) -> Disk:
        return Disk(self.y, self.ry)

    @property
    def is_degenerate(self) -> bool:
        # z on the base segment collapses the lens to the single point z
        return self.rx + self.ry <= self.length + 1e-9 * max(1.0, self.length)

    def apex(self, side: int = 1) -> Point2:
        u = unit(self.y - self.x)
        n = perp(u)
        L = self.length
        a = (L * L + self.rx ** 2 - self.ry ** 2) / (2 * L)
        v = math.sqrt(max(self.rx ** 2 - a * a, 0.0))
        return self.x + a * u + side * v * n

    def side_prims(self, side: int = 1) -> list:
        """Boundary prims from x to y on one side, whiskers included."""
        if self.is_degenerate:
            raise GeometryError("degenerate lens has no side boundary")
        u = unit(self.y - self.x)
        L = self.length
        A = self.x + (L - self.ry) * u
        B = self.x + self.rx * u
        P = self.apex(side)
        ccw = side < 0
        prims = []
        if L - self.ry > 1e-12:
            prims.append(Segment(self.x, A))
        prims.append(arc_between(self.y, self.ry, A, P, ccw=ccw))
        prims.append(arc_between(self.x, self.rx, P, B, ccw=ccw))
        if L - self.rx > 1e-12:
            prims.append(Segment(B, self.y))
        return prims

    def region(self) -> Region:
        if self.is_degenerate:
            z = self.z
            return Region([Segment(z, z), Segment(z, z)])
        x, y, rx, ry = self.x, self.y, self.rx, self.ry

        def fc(pts):
            return ((np.hypot(pts[:, 0] - x[0], pts[:, 1] - x[1]) <= rx + 1e-12)
                    & (np.hypot(pts[:, 0] - y[0], pts[:, 1] - y[1]) <= ry + 1e-12))

        return Region(self.side_prims(1) + path_reversed(self.side_prims(-1)),
                      fast_contains=fc)

    def half(self, side: int = 1) -> "HalfLens":
        return HalfLens(self, side)

    def adornment(self) -> Adornment:
        """The lens as a symmetric adornment on its own base."""
        return Adornment(Segment(self.x, self.y),
                         ArcPath(self.side_prims(1)),
                         ArcPath(self.side_prims(-1)),
                         lens_radii=((self.rx, self.ry),))


@dataclass(frozen=True, eq=False)
class HalfLens:
    """A lens cut to one closed half-plane of the base line."""

    lens: Lens
    side: int

    def __post_init__(self) -> None:
        if self.side not in (1, -1):
            raise GeometryError("side must be +1 or -1")
        c = cross2(self.lens.y - self.lens.x, self.lens.z - self.lens.x)
        if c * self.side < -1e-9:
            raise GeometryError("defining point is on the other side")

    def region(self) -> Region:
        ln = self.lens
        x, y, rx, ry, side = ln.x, ln.y, ln.rx, ln.ry, self.side
        yx = y - x

        def fc(pts):
            inside = ((np.hypot(pts[:, 0] - x[0], pts[:, 1] - x[1]) <= rx + 1e-12)
                      & (np.hypot(pts[:, 0] - y[0], pts[:, 1] - y[1]) <= ry + 1e-12))
            c = yx[0] * (pts[:, 1] - x[1]) - yx[1] * (pts[:, 0] - x[0])
            return inside & (side * c >= -1e-12)

        return Region(ln.side_prims(self.side) + [Segment(y, x)],
                      fast_contains=fc)


def lens_of(x: Point2, y: Point2, z: Point2) -> Lens:
    return Lens(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))


def max_slender(x: Point2, y: Point2) -> Lens:
    """Largest slender shape on the base: the lens of the equilateral apex."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    L = norm(y - x)
    if L < 1e-12:
        raise GeometryError("degenerate base")
    z = (x + y) / 2 + (math.sqrt(3) / 2) * L * perp(unit(y - x))
    return Lens(x, y, z)


def covering_lens(a: Adornment, z: Point2,
                  tol: Tolerance = DEFAULT_TOL) -> HalfLens:
    """Half-lens inside a slender adornment with z strictly interior to it.

    The defining point sits a hair further from the base than z, so z lands
    strictly inside both disks.  The offset is capped by half the clearance
    of z and by the lens preconditions.
    """
    verdict = is_slender(a, tol=tol)
    if not verdict.is_slender:
        raise PreconditionError("adornment is not slender")
    z = np.asarray(z, float)
    reg = a.region()
    d_bnd = reg.distance_to_boundary(z)
    if d_bnd <= tol.eps_geom or not reg.contains(z, tol.eps_geom):
        raise PreconditionError("point must be strictly interior")
    x, y = a.x, a.y
    L = a.length
    n = perp(unit(y - x))
    c = cross2(y - x, z - x)
    side = 1 if c >= 0 else -1
    delta = min(tol.eps_overlap, d_bnd / 2,
                max(L - norm(z - x), 0.0) / 2, max(L - norm(z - y), 0.0) / 2)
    zp = z + side * delta * n
    hl = HalfLens(Lens(x, y, zp), side)
    if not region_contains_region(reg, hl.region(), tol.eps_overlap, 96):
        raise GeometryError("covering half-lens escaped the adornment")
    return hl


# ---------------------------------------------------------------------------
# unions


def _union_side_prims(L: float, pairs: Sequence) -> list:
    """Upper envelope of the lenses over base (0,0)-(L,0), in local coords.

    Circles in the same family are concentric and never cross, so envelope
    breaks happen only at interval ends and x-family vs y-family crossings.
    Stretches covered by no lens become whiskers along the base.
    """
    cuts = {0.0, L}
    for rx, ry in pairs:
        cuts.add(min(max(L - ry, 0.0), L))
        cuts.add(min(max(rx, 0.0), L))
    for rx, _ in pairs:
        for _, ry in pairs:
            u = (L * L + rx * rx - ry * ry) / (2 * L)
            if 0.0 <= u <= L and rx * rx - u * u >= -1e-15:
                cuts.add(u)
    us = sorted(cuts)
    merged = [us[0]]
    for u in us[1:]:
        if u - merged[-1] > 1e-12:
            merged.append(u)

    def height(i, u):
        rx, ry = pairs[i]
        hx2 = rx * rx - u * u
        hy2 = ry * ry - (u - L) ** 2
        if hx2 < 0 or hy2 < 0:
            return None
        return min(math.sqrt(hx2), math.sqrt(hy2))

    prims = []
    prev_end = vec(0.0, 0.0)
    for ua, ub in zip(merged, merged[1:]):
        um = (ua + ub) / 2
        best_i, best_h = None, 1e-12
        for i in range(len(pairs)):
            h = height(i, um)
            if h is not None and h > best_h:
                best_i, best_h = i, h
        if best_i is None:
            end = vec(ub, 0.0)
            prims.append(Segment(prev_end, end))
            prev_end = end
            continue
        rx, ry = pairs[best_i]
        hx2 = rx * rx - um * um
        hy2 = ry * ry - (um - L) ** 2
        if hx2 <= hy2:
            center, r = vec(0.0, 0.0), rx
        else:
            center, r = vec(L, 0.0), ry
        hb = math.sqrt(max(r * r - (ub - center[0]) ** 2, 0.0))
        end = vec(ub, hb)
        prims.append(arc_between(center, r, prev_end, end, ccw=False))
        prev_end = end
    return prims


def _union_from_radii(x: Point2, y: Point2, pairs: Sequence) -> Adornment:
    L = norm(y - x)
    upper_local = _union_side_prims(L, list(pairs))
    lower_local = [p.mirror_x() for p in upper_local]
    R = rot(angle_of(y - x))
    t = np.asarray(x, float)
    return Adornment(Segment(np.asarray(x, float), np.asarray(y, float)),
                     ArcPath(path_transformed(upper_local, R, t)),
                     ArcPath(path_transformed(lower_local, R, t)),
                     lens_radii=tuple((float(rx), float(ry)) for rx, ry in pairs))


def union_of_lenses(x: Point2, y: Point2, zs: Sequence[Point2]) -> Adornment:
    """Symmetric adornment: union of the lenses of the given points."""
    if len(zs) == 0:
        raise PreconditionError("need at least one defining point")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    pairs = []
    for z in zs:
        ln = Lens(x, y, np.asarray(z, float))  # validates the preconditions
        pairs.append((ln.rx, ln.ry))
    return _union_from_radii(x, y, pairs)


def _side_occupancy(a: Adornment, path: ArcPath, n: int = 64):
    """(reaches above, reaches below) for one side path."""
    nrm = perp(unit(a.y - a.x))
    hs = (_path_samples(path, n) - a.x) @ nrm
    return bool(hs.max() > 1e-9), bool(hs.min() < -1e-9)


def slender_union(a: Adornment, b: Adornment,
                  tol: Tolerance = DEFAULT_TOL) -> Adornment:
    """Union of two slender adornments on the same base.

    Handled shapes: both lens unions (envelope merge), one containing the
    other, or the two occupying opposite half-planes.  General curved
    arrangements are out of scope.
    """
    if norm(a.x - b.x) > 1e-9 or norm(a.y - b.y) > 1e-9:
        raise PreconditionError("adornments must share the base")
    for s in (a, b):
        if not is_slender(s, tol=tol).is_slender:
            raise PreconditionError("both adornments must be slender")
    if a.lens_radii is not None and b.lens_radii is not None:
        return _union_from_radii(a.x, a.y, a.lens_radii + b.lens_radii)
    if region_contains_region(a.region(), b.region(), tol.eps_overlap, 128):
        return a
    if region_contains_region(b.region(), a.region(), tol.eps_overlap, 128):
        return b
    picks = {}
    for s in (a, b):
        for _, path in s.sides():
            above, below = _side_occupancy(s, path)
            if above and below:
                raise GeometryError("side crosses the base line; unsupported")
            if above and "up" not in picks:
                picks["up"] = path
            if below and "down" not in picks:
                picks["down"] = path
    if "up" in picks and "down" in picks:
        return Adornment(a.base, picks["up"], picks["down"])
    raise GeometryError("union of these adornments is not supported")
