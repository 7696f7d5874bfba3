"""Planar primitives: segments, circular arcs, boundary paths, and the
signed separation predicate every other module builds on.

Coordinates are plain numpy arrays of shape (2,).  All tolerances are
absolute: scenes are expected to be authored at unit-to-hundreds scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import GeometryError

TWO_PI = 2.0 * math.pi

# points are plain float arrays of shape (2,)
Point2 = np.ndarray


def vec(x: float, y: float) -> Point2:
    return np.array([float(x), float(y)])


def cross2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def norm(a: np.ndarray) -> float:
    return float(math.hypot(a[0], a[1]))


def unit(a: np.ndarray) -> np.ndarray:
    n = norm(a)
    if n < 1e-300:
        raise GeometryError("cannot normalize a zero vector")
    return a / n


def perp(a: np.ndarray) -> np.ndarray:
    """Counterclockwise quarter turn."""
    return np.array([-a[1], a[0]])


def rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def angle_of(a: np.ndarray) -> float:
    return math.atan2(a[1], a[0])


def wrap_angle(phi: float) -> float:
    """Reduce to [0, 2*pi)."""
    r = math.fmod(phi, TWO_PI)
    return r + TWO_PI if r < 0 else r


def signed_wrap(phi: float) -> float:
    """Reduce to (-pi, pi]."""
    r = math.fmod(phi + math.pi, TWO_PI)
    if r <= 0:
        r += TWO_PI
    return r - math.pi


@dataclass(frozen=True)
class Tolerance:
    """Absolute tolerances: eps_geom for coincidence, eps_overlap for legal touching."""

    eps_geom: float = 1e-9
    eps_overlap: float = 1e-7

    def __post_init__(self) -> None:
        if not (0.0 < self.eps_geom <= self.eps_overlap):
            raise GeometryError("need 0 < eps_geom <= eps_overlap")


DEFAULT_TOL = Tolerance()


def orientation(p: np.ndarray, q: np.ndarray, r: np.ndarray, eps: float = 1e-9) -> int:
    """Sign of twice the signed area of pqr; 0 when collinear at scaled eps."""
    val = cross2(q - p, r - p)
    scale = max(norm(q - p) * norm(r - p), 1e-300)
    if abs(val) <= eps * scale:
        return 0
    return 1 if val > 0 else -1


# ---------------------------------------------------------------------------
# primitives


@dataclass(frozen=True, eq=False)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def length(self) -> float:
        return norm(self.b - self.a)

    def point_at(self, t: float) -> np.ndarray:
        return self.a + t * (self.b - self.a)

    def start(self) -> np.ndarray:
        return self.a

    def end(self) -> np.ndarray:
        return self.b

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)

    def transformed(self, R: np.ndarray, t: np.ndarray) -> "Segment":
        return Segment(R @ self.a + t, R @ self.b + t)

    def mirror_x(self) -> "Segment":
        m = np.array([1.0, -1.0])
        return Segment(self.a * m, self.b * m)

    def bbox(self) -> np.ndarray:
        lo = np.minimum(self.a, self.b)
        hi = np.maximum(self.a, self.b)
        return np.array([lo, hi])


@dataclass(frozen=True, eq=False)
class Arc:
    """Circular arc from angle a0 through a signed sweep; positive sweep is ccw."""

    center: np.ndarray
    radius: float
    a0: float
    sweep: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise GeometryError("arc radius must be positive")
        if not (0 < abs(self.sweep) <= TWO_PI + 1e-12):
            raise GeometryError("arc sweep must be nonzero and at most a full turn")

    @property
    def a1(self) -> float:
        return self.a0 + self.sweep

    @property
    def ccw(self) -> bool:
        return self.sweep > 0

    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def point_at_angle(self, phi: float) -> np.ndarray:
        return self.center + self.radius * np.array([math.cos(phi), math.sin(phi)])

    def point_at(self, t: float) -> np.ndarray:
        return self.point_at_angle(self.a0 + t * self.sweep)

    def start(self) -> np.ndarray:
        return self.point_at_angle(self.a0)

    def end(self) -> np.ndarray:
        return self.point_at_angle(self.a1)

    def contains_angle(self, phi: float, tol_angle: float = 1e-12) -> bool:
        d = wrap_angle((phi - self.a0) if self.ccw else (self.a0 - phi))
        return d <= abs(self.sweep) + tol_angle or d >= TWO_PI - tol_angle

    def param_of_angle(self, phi: float) -> float:
        d = wrap_angle((phi - self.a0) if self.ccw else (self.a0 - phi))
        if d > abs(self.sweep):
            # snap the out-of-range side to the nearer endpoint
            d = 0.0 if d - abs(self.sweep) > (TWO_PI - d) else abs(self.sweep)
        return d / abs(self.sweep)

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.a1, -self.sweep)

    def transformed(self, R: np.ndarray, t: np.ndarray) -> "Arc":
        dtheta = math.atan2(R[1, 0], R[0, 0])
        return Arc(R @ self.center + t, self.radius, self.a0 + dtheta, self.sweep)

    def mirror_x(self) -> "Arc":
        m = np.array([1.0, -1.0])
        return Arc(self.center * m, self.radius, -self.a0, -self.sweep)

    def bbox(self) -> np.ndarray:
        pts = [self.start(), self.end()]
        for k in range(4):
            phi = k * math.pi / 2
            if self.contains_angle(phi):
                pts.append(self.point_at_angle(phi))
        pts = np.array(pts)
        return np.array([pts.min(axis=0), pts.max(axis=0)])


Primitive = Union[Segment, Arc]


@dataclass(frozen=True, eq=False)
class Disk:
    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise GeometryError("disk radius must be nonnegative")

    def contains_point(self, p: np.ndarray, tol: float = 1e-12) -> bool:
        return norm(p - self.center) <= self.radius + tol

    def contains_many(self, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        return np.hypot(pts[:, 0] - self.center[0],
                        pts[:, 1] - self.center[1]) <= self.radius + tol

    def area(self) -> float:
        return math.pi * self.radius * self.radius

    def region(self) -> "Region":
        return region_of_disk(self.center, self.radius)


def arc_between(center: np.ndarray, radius: float, p0: np.ndarray, p1: np.ndarray,
                ccw: bool) -> Arc:
    """Arc on the given circle from p0 to p1 in the stated direction."""
    a0 = angle_of(p0 - center)
    a1 = angle_of(p1 - center)
    d = wrap_angle(a1 - a0) if ccw else wrap_angle(a0 - a1)
    if d < 1e-14:
        d = TWO_PI  # antipodal wrap guard; callers never ask for zero arcs
    return Arc(center, radius, a0, d if ccw else -d)


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True, eq=False)
class ArcPath:
    """Ordered chain of primitives; consecutive endpoints must coincide."""

    prims: tuple

    def __init__(self, prims: Iterable[Primitive], eps: float = 1e-6):
        prims = tuple(prims)
        if not prims:
            raise GeometryError("empty path")
        for p, q in zip(prims, prims[1:]):
            if norm(p.end() - q.start()) > eps:
                raise GeometryError("path primitives are not chained end to start")
        object.__setattr__(self, "prims", prims)

    def length(self) -> float:
        return sum(p.length() for p in self.prims)

    def start(self) -> np.ndarray:
        return self.prims[0].start()

    def end(self) -> np.ndarray:
        return self.prims[-1].end()

    def point_at_arclength(self, s: float, eps: float = 1e-9) -> np.ndarray:
        total = self.length()
        if s < -eps or s > total + eps:
            raise GeometryError(f"arclength {s} outside [0, {total}]")
        s = min(max(s, 0.0), total)
        for p in self.prims:
            ln = p.length()
            if s <= ln or p is self.prims[-1]:
                t = 0.0 if ln == 0 else min(s / ln, 1.0)
                return p.point_at(t)
            s -= ln
        return self.prims[-1].end()

    def reversed(self) -> "ArcPath":
        return ArcPath([p.reversed() for p in reversed(self.prims)])


def path_transformed(prims: Sequence[Primitive], R: np.ndarray, t: np.ndarray) -> list:
    return [p.transformed(R, t) for p in prims]


def path_mirror_x(prims: Sequence[Primitive]) -> list:
    return [p.mirror_x() for p in prims]


def path_reversed(prims: Sequence[Primitive]) -> list:
    return [p.reversed() for p in reversed(prims)]


# ---------------------------------------------------------------------------
# point / primitive distances


def dist_point_seg(p: np.ndarray, s: Segment) -> float:
    d = s.b - s.a
    L2 = float(d @ d)
    if L2 < 1e-300:
        return norm(p - s.a)
    t = float((p - s.a) @ d) / L2
    t = min(max(t, 0.0), 1.0)
    return norm(p - (s.a + t * d))


def dist_point_arc(p: np.ndarray, a: Arc) -> float:
    w = p - a.center
    r = norm(w)
    if r > 1e-300 and a.contains_angle(angle_of(w)):
        return abs(r - a.radius)
    return min(norm(p - a.start()), norm(p - a.end()))


def dist_point_prim(p: np.ndarray, prim: Primitive) -> float:
    if isinstance(prim, Segment):
        return dist_point_seg(p, prim)
    return dist_point_arc(p, prim)


# ---------------------------------------------------------------------------
# intersections (parameter pairs in [0,1] x [0,1])


def circle_line_params(center: np.ndarray, radius: float, a: np.ndarray,
                       d: np.ndarray) -> list:
    """Solve |a + t d - center| = radius for t."""
    f = a - center
    A = float(d @ d)
    if A < 1e-300:
        return []
    B = 2.0 * float(f @ d)
    C = float(f @ f) - radius * radius
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    return [(-B - sq) / (2 * A), (-B + sq) / (2 * A)]


def circle_circle_intersections(c0: np.ndarray, r0: float, c1: np.ndarray, r1: float,
                                eps: float = 1e-12) -> list:
    d = norm(c1 - c0)
    if d < eps:
        return []  # concentric; coincident circles handled by callers
    x = (d * d + r0 * r0 - r1 * r1) / (2 * d)
    disc = r0 * r0 - x * x
    if disc < -eps * max(r0, r1, 1.0) ** 2:
        return []
    disc = max(disc, 0.0)
    u = (c1 - c0) / d
    base = c0 + x * u
    off = math.sqrt(disc) * perp(u)
    if norm(off) < eps:
        return [base]
    return [base + off, base - off]


def seg_seg_intersections(s1: Segment, s2: Segment, eps: float = 1e-12) -> list:
    d1 = s1.b - s1.a
    d2 = s2.b - s2.a
    denom = cross2(d1, d2)
    w = s2.a - s1.a
    scale = max(norm(d1) * norm(d2), 1e-300)
    if abs(denom) <= 1e-14 * scale:
        # parallel; collinear overlap yields the overlap interval endpoints
        if abs(cross2(w, d1)) > eps * max(norm(d1), 1.0) * max(norm(w), 1.0):
            return []
        L2 = float(d1 @ d1)
        if L2 < 1e-300:
            return []
        ta = float((s2.a - s1.a) @ d1) / L2
        tb = float((s2.b - s1.a) @ d1) / L2
        lo, hi = min(ta, tb), max(ta, tb)
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if lo > hi:
            return []
        out = []
        for t1 in {lo, hi}:
            p = s1.point_at(t1)
            L22 = float(d2 @ d2)
            t2 = float((p - s2.a) @ d2) / L22 if L22 > 0 else 0.0
            out.append((t1, min(max(t2, 0.0), 1.0)))
        return out
    t1 = cross2(w, d2) / denom
    t2 = cross2(w, d1) / denom
    tol1 = eps / max(norm(d1), 1e-12)
    tol2 = eps / max(norm(d2), 1e-12)
    if -tol1 <= t1 <= 1 + tol1 and -tol2 <= t2 <= 1 + tol2:
        return [(min(max(t1, 0.0), 1.0), min(max(t2, 0.0), 1.0))]
    return []


def seg_arc_intersections(s: Segment, a: Arc, eps: float = 1e-12) -> list:
    d = s.b - s.a
    out = []
    tol_t = eps / max(norm(d), 1e-12)
    tol_ang = eps / max(a.radius, 1e-12)
    for t in circle_line_params(a.center, a.radius, s.a, d):
        if not (-tol_t <= t <= 1 + tol_t):
            continue
        p = s.point_at(min(max(t, 0.0), 1.0))
        phi = angle_of(p - a.center)
        if a.contains_angle(phi, tol_ang):
            out.append((min(max(t, 0.0), 1.0), a.param_of_angle(phi)))
    return out


def arc_arc_intersections(a: Arc, b: Arc, eps: float = 1e-12) -> list:
    d = norm(b.center - a.center)
    tol_a = eps / max(a.radius, 1e-12)
    tol_b = eps / max(b.radius, 1e-12)
    if d < eps and abs(a.radius - b.radius) < eps:
        # same circle: report endpoints of the angular overlap
        out = []
        for phi in (b.a0, b.a1):
            if a.contains_angle(phi, tol_a):
                out.append((a.param_of_angle(phi), b.param_of_angle(phi)))
        for phi in (a.a0, a.a1):
            if b.contains_angle(phi, tol_b):
                out.append((a.param_of_angle(phi), b.param_of_angle(phi)))
        return out
    out = []
    for p in circle_circle_intersections(a.center, a.radius, b.center, b.radius, eps):
        pa = angle_of(p - a.center)
        pb = angle_of(p - b.center)
        if a.contains_angle(pa, tol_a) and b.contains_angle(pb, tol_b):
            out.append((a.param_of_angle(pa), b.param_of_angle(pb)))
    return out


def prim_prim_intersections(p: Primitive, q: Primitive, eps: float = 1e-12) -> list:
    if isinstance(p, Segment) and isinstance(q, Segment):
        return seg_seg_intersections(p, q, eps)
    if isinstance(p, Segment):
        return seg_arc_intersections(p, q, eps)
    if isinstance(q, Segment):
        return [(tp, ts) for (ts, tp) in seg_arc_intersections(q, p, eps)]
    return arc_arc_intersections(p, q, eps)


# ---------------------------------------------------------------------------
# primitive / primitive distances


def seg_seg_distance(s1: Segment, s2: Segment) -> float:
    if seg_seg_intersections(s1, s2):
        return 0.0
    return min(dist_point_seg(s1.a, s2), dist_point_seg(s1.b, s2),
               dist_point_seg(s2.a, s1), dist_point_seg(s2.b, s1))


def seg_arc_distance(s: Segment, a: Arc) -> float:
    if seg_arc_intersections(s, a):
        return 0.0
    cands = [dist_point_arc(s.a, a), dist_point_arc(s.b, a),
             dist_point_seg(a.start(), s), dist_point_seg(a.end(), s)]
    # interior-interior critical point: foot of the circle center on the segment
    d = s.b - s.a
    L2 = float(d @ d)
    if L2 > 1e-300:
        t = float((a.center - s.a) @ d) / L2
        if 0.0 < t < 1.0:
            foot = s.a + t * d
            w = foot - a.center
            if norm(w) > 1e-300 and a.contains_angle(angle_of(w)):
                cands.append(abs(norm(w) - a.radius))
    return min(cands)


def arc_arc_distance(a: Arc, b: Arc) -> float:
    if arc_arc_intersections(a, b):
        return 0.0
    cands = [dist_point_arc(a.start(), b), dist_point_arc(a.end(), b),
             dist_point_arc(b.start(), a), dist_point_arc(b.end(), a)]
    d = norm(b.center - a.center)
    if d > 1e-12:
        u = (b.center - a.center) / d
        for sa in (1.0, -1.0):
            pa = a.center + sa * a.radius * u
            if not a.contains_angle(angle_of(pa - a.center)):
                continue
            for sb in (1.0, -1.0):
                pb = b.center + sb * b.radius * u
                if b.contains_angle(angle_of(pb - b.center)):
                    cands.append(norm(pa - pb))
    elif abs(a.radius - b.radius) > 0:
        # concentric: radial gap wherever the angular ranges meet
        for phi in (a.a0, a.a1, a.a0 + a.sweep / 2):
            if b.contains_angle(phi):
                cands.append(abs(a.radius - b.radius))
    return min(cands)


def prim_prim_distance(p: Primitive, q: Primitive) -> float:
    if isinstance(p, Segment) and isinstance(q, Segment):
        return seg_seg_distance(p, q)
    if isinstance(p, Segment):
        return seg_arc_distance(p, q)
    if isinstance(q, Segment):
        return seg_arc_distance(q, p)
    return arc_arc_distance(p, q)


# ---------------------------------------------------------------------------
# regions


_RAY_ANGLES = (0.39269908169872414, 2.039847, 4.111576, 5.341002,
               1.234567, 3.456789, 0.987654, 5.87311)


@dataclass(eq=False)
class Region:
    """Closed region bounded by a single loop of primitives.

    Degenerate slit boundaries (a segment out and back) are legal; they bound
    an empty interior.  ``fast_contains`` may supply a vectorized membership
    test for analytically known shapes; the generic path ray-casts.
    """

    boundary: tuple
    fast_contains: Optional[Callable[[np.ndarray], np.ndarray]] = None
    _bbox: Optional[np.ndarray] = field(default=None, repr=False)

    def __init__(self, boundary: Iterable[Primitive],
                 fast_contains: Optional[Callable] = None, eps: float = 1e-6):
        boundary = tuple(boundary)
        if not boundary:
            raise GeometryError("region with empty boundary")
        for p, q in zip(boundary, boundary[1:] + boundary[:1]):
            if norm(p.end() - q.start()) > eps:
                raise GeometryError("region boundary is not a closed chain")
        self.boundary = boundary
        self.fast_contains = fast_contains
        self._bbox = None

    def bbox(self) -> np.ndarray:
        if self._bbox is None:
            boxes = np.array([p.bbox() for p in self.boundary])
            self._bbox = np.array([boxes[:, 0].min(axis=0), boxes[:, 1].max(axis=0)])
        return self._bbox

    def distance_to_boundary(self, p: np.ndarray) -> float:
        return min(dist_point_prim(p, prim) for prim in self.boundary)

    def _ray_parity(self, p: np.ndarray, theta: float) -> Optional[int]:
        """Crossing parity along one ray, or None when the cast is degenerate."""
        d = np.array([math.cos(theta), math.sin(theta)])
        count = 0
        for prim in self.boundary:
            if isinstance(prim, Segment):
                e = prim.b - prim.a
                denom = cross2(d, e)
                w = prim.a - p
                if abs(denom) < 1e-14 * max(norm(e), 1.0):
                    if abs(cross2(w, d)) < 1e-12 * max(norm(w), 1.0):
                        return None  # ray collinear with the segment
                    continue
                t = cross2(w, e) / denom
                s = cross2(w, d) / denom
                if -1e-11 < s < 1e-11 or 1 - 1e-11 < s < 1 + 1e-11:
                    if t > 1e-12:
                        return None  # grazing an endpoint
                if t > 1e-12 and 0.0 < s < 1.0:
                    count += 1
            else:
                roots = circle_line_params(prim.center, prim.radius, p, d)
                if len(roots) == 2 and abs(roots[0] - roots[1]) < 1e-9:
                    q = p + roots[0] * d
                    phi = angle_of(q - prim.center)
                    if roots[0] > 1e-12 and prim.contains_angle(phi, 1e-6):
                        return None  # near-tangent cast
                for t in roots:
                    if t <= 1e-12:
                        continue
                    q = p + t * d
                    phi = angle_of(q - prim.center)
                    if prim.contains_angle(phi, 1e-11 / max(prim.radius, 1e-3)):
                        ta = prim.param_of_angle(phi)
                        if ta < 1e-9 or ta > 1 - 1e-9:
                            return None  # hits an arc endpoint
                        count += 1
        return count % 2

    def contains(self, p: np.ndarray, tol: float = 1e-9) -> bool:
        """Closed containment: boundary points count as inside."""
        if self.distance_to_boundary(p) <= tol:
            return True
        lo, hi = self.bbox()
        if np.any(p < lo - tol) or np.any(p > hi + tol):
            return False
        for theta in _RAY_ANGLES:
            parity = self._ray_parity(p, theta)
            if parity is not None:
                return parity == 1
        raise GeometryError("all ray casts degenerate; region likely invalid")

    def contains_many(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        if self.fast_contains is not None:
            return self.fast_contains(pts)
        return np.array([self.contains(p, tol) for p in pts])

    def boundary_samples(self, n: int) -> np.ndarray:
        """n points spread along the boundary, arclength-uniform."""
        lens = np.array([p.length() for p in self.boundary])
        total = lens.sum()
        if total <= 0:
            return np.array([self.boundary[0].start()])
        ss = (np.arange(n) + 0.5) / n * total
        out, acc, idx = [], 0.0, 0
        for s in ss:
            while idx < len(lens) - 1 and s > acc + lens[idx]:
                acc += lens[idx]
                idx += 1
            t = (s - acc) / lens[idx] if lens[idx] > 0 else 0.0
            out.append(self.boundary[idx].point_at(min(t, 1.0)))
        return np.array(out)


def region_of_disk(center: np.ndarray, radius: float) -> Region:
    """Disk boundary as two half-circle arcs."""
    a1 = Arc(center, radius, 0.0, math.pi)
    a2 = Arc(center, radius, math.pi, math.pi)
    fc = lambda pts: np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]) <= radius + 1e-12
    return Region([a1, a2], fast_contains=fc)


def _split_params(prim: Primitive, other: Region, eps: float) -> list:
    ts = [0.0, 1.0]
    for q in other.boundary:
        for (tp, _tq) in prim_prim_intersections(prim, q, eps):
            ts.append(tp)
    ts = sorted(ts)
    out = [ts[0]]
    for t in ts[1:]:
        if t - out[-1] > 1e-12:
            out.append(t)
    return out


def _piece_depth(prim: Primitive, t0: float, t1: float, other: Region,
                 eps: float) -> float:
    """Max distance-to-other-boundary over an interior stretch of prim.

    Samples include the piece endpoints (a depth maximum can sit at a
    primitive junction), then a bounded Brent polish tightens the best
    bracket.  Points not strictly inside contribute zero.
    """
    ts = np.linspace(t0, t1, 9)
    depths = []
    for t in ts:
        p = prim.point_at(float(t))
        d = other.distance_to_boundary(p)
        depths.append(d if d > eps and other.contains(p, eps) else 0.0)
    best = max(depths)
    if best <= eps:
        return 0.0
    k = int(np.argmax(depths))
    lo = float(ts[max(k - 1, 0)])
    hi = float(ts[min(k + 1, len(ts) - 1)])
    if hi - lo > 1e-12:
        res = minimize_scalar(
            lambda t: -other.distance_to_boundary(prim.point_at(float(t))),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-11})
        p = prim.point_at(float(res.x))
        d = other.distance_to_boundary(p)
        if d > best and other.contains(p, eps):
            best = d
    return best


def _max_penetration(a: Region, b: Region, eps: float, split: bool) -> float:
    """Deepest strictly-interior excursion of a's boundary into b."""
    worst = 0.0
    for prim in a.boundary:
        ts = _split_params(prim, b, eps) if split else [0.0, 1.0]
        for t0, t1 in zip(ts, ts[1:]):
            worst = max(worst, _piece_depth(prim, t0, t1, b, eps))
    return worst


def _interior_probe(a: Region, b: Region, eps: float) -> Optional[bool]:
    """Whether a boundary point of a lies inside b; None if all probes hug b."""
    for f in (0.37, 0.61, 0.13, 0.83):
        for prim in a.boundary:
            p = prim.point_at(f)
            if b.distance_to_boundary(p) > 10 * eps:
                return b.contains(p, eps)
    return None


def separation(a: Region, b: Region, tol: Tolerance = DEFAULT_TOL) -> float:
    """Signed clearance between two regions.

    Positive: minimum boundary distance of disjoint regions.  Zero: touching.
    Negative: boundary of one runs strictly inside the other; the magnitude is
    the deepest boundary excursion (containment included).
    """
    eps = tol.eps_geom
    d_min = math.inf
    crossing = False
    for p in a.boundary:
        for q in b.boundary:
            if prim_prim_intersections(p, q, eps):
                crossing = True
            else:
                d_min = min(d_min, prim_prim_distance(p, q))
    if not crossing:
        # disjoint boundaries: containment is the only way to overlap
        in_b = _interior_probe(a, b, eps)
        if in_b:
            return -_max_penetration(a, b, eps, split=False)
        in_a = _interior_probe(b, a, eps)
        if in_a:
            return -_max_penetration(b, a, eps, split=False)
        if in_b is None and in_a is None:
            return 0.0  # boundaries coincide everywhere probed
        return 0.0 if d_min <= eps else d_min
    depth = max(_max_penetration(a, b, eps, split=True),
                _max_penetration(b, a, eps, split=True))
    if depth > eps:
        return -depth
    return 0.0


def penetration_depth(a: Region, b: Region, tol: Tolerance = DEFAULT_TOL) -> float:
    """Depth of interior overlap, 0.0 when disjoint or merely touching.

    Cheaper than separation when regions are usually far apart: a bounding
    box gap rejects immediately and no minimum distance is computed.
    """
    eps = tol.eps_geom
    (lo_a, hi_a), (lo_b, hi_b) = a.bbox(), b.bbox()
    if np.any(lo_b - hi_a > eps) or np.any(lo_a - hi_b > eps):
        return 0.0
    crossing = any(prim_prim_intersections(p, q, eps)
                   for p in a.boundary for q in b.boundary)
    if crossing:
        return max(_max_penetration(a, b, eps, split=True),
                   _max_penetration(b, a, eps, split=True))
    if _interior_probe(a, b, eps):
        return _max_penetration(a, b, eps, split=False)
    if _interior_probe(b, a, eps):
        return _max_penetration(b, a, eps, split=False)
    return 0.0


def region_contains_region(outer: Region, inner: Region, tol: float,
                           n_samples: int = 96) -> bool:
    """Every sampled boundary point of inner lies in outer (within tol)."""
    pts = inner.boundary_samples(n_samples)
    return all(outer.contains(p, tol) for p in pts)
