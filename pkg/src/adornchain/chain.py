"""Adorned polygonal chains: configurations, overlap validation, discrete
expansion checks, and the four-disk rearrangement predicate.

Adornments are stored in edge-local coordinates (base on (0,0)-(L,0)) and
carried onto each configuration's edges by rigid motion, so shapes hinged at
joints stay exact by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryError, PreconditionError
from .adornment import Adornment, bare_adornment, is_slender
from .geom import (
    DEFAULT_TOL,
    Disk,
    Point2,
    Segment,
    Tolerance,
    circle_circle_intersections,
    cross2,
    norm,
    penetration_depth,
    seg_seg_intersections,
    vec,
)


@dataclass(frozen=True, eq=False)
class AdornedChain:
    """Open path or closed cycle of bars, one adornment per edge."""

    n_vertices: int
    closed: bool
    edges: tuple
    adornments: tuple

    def __post_init__(self) -> None:
        n, m = self.n_vertices, len(self.edges)
        want = n if self.closed else n - 1
        if m != want:
            raise GeometryError(f"{m} edges do not form a "
                                f"{'cycle' if self.closed else 'path'} on {n} vertices")
        for k, (i, j) in enumerate(self.edges):
            wi, wj = k, (k + 1) % n if self.closed else k + 1
            if (i, j) != (wi, wj):
                raise GeometryError(f"edge {k} must be ({wi}, {wj}), got ({i}, {j})")
        if len(self.adornments) != m:
            raise GeometryError("need one adornment per edge")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def rest_lengths(self) -> np.ndarray:
        return np.array([a.length for a in self.adornments])

    def adjacent(self, k1: int, k2: int) -> bool:
        i1, j1 = self.edges[k1]
        i2, j2 = self.edges[k2]
        return len({i1, j1} & {i2, j2}) > 0

    def edge_regions(self, c: "Configuration") -> list:
        return [a.region_at(c.positions[i], c.positions[j])
                for (i, j), a in zip(self.edges, self.adornments)]


@dataclass(frozen=True, eq=False)
class Configuration:
    positions: np.ndarray

    def __init__(self, positions) -> None:
        arr = np.asarray(positions, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise GeometryError("positions must be an (n, 2) array")
        if not np.all(np.isfinite(arr)):
            raise GeometryError("positions must be finite")
        object.__setattr__(self, "positions", arr)

    @property
    def n(self) -> int:
        return len(self.positions)

    def edge_lengths(self, chain: AdornedChain) -> np.ndarray:
        p = self.positions
        return np.array([norm(p[j] - p[i]) for i, j in chain.edges])

    def pairwise_distances(self) -> np.ndarray:
        p = self.positions
        d = p[:, None, :] - p[None, :, :]
        return np.hypot(d[..., 0], d[..., 1])


def make_chain(positions, closed: bool, adorners: Optional[Sequence] = None):
    """Chain + configuration from vertex positions.

    adorners: per edge, either None (bare bar), an Adornment already in
    local coordinates, or a callable length -> Adornment.
    """
    c = Configuration(positions)
    n = c.n
    edges = tuple((k, (k + 1) % n) for k in range(n)) if closed \
        else tuple((k, k + 1) for k in range(n - 1))
    ads = []
    for k, (i, j) in enumerate(edges):
        L = norm(c.positions[j] - c.positions[i])
        spec = None if adorners is None else adorners[k]
        if spec is None:
            ads.append(bare_adornment(vec(0, 0), vec(L, 0)))
        elif callable(spec):
            ads.append(spec(L))
        else:
            ads.append(spec)
    return AdornedChain(n, closed, edges, tuple(ads)), c


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True, eq=False)
class OverlapReport:
    """pairs: (edge_i, edge_j, depth) with interior penetration beyond tolerance."""

    pairs: tuple
    base_crossings: tuple
    length_violations: tuple
    clean: bool
    diagnostics: tuple = ()


@dataclass(frozen=True, eq=False)
class ExpansionReport:
    is_expansion: bool
    worst_pair: tuple  # ((i, j), old distance, new distance)


# ---------------------------------------------------------------------------
# validation


def _bases_conflict(e1: Segment, e2: Segment, eps: float) -> bool:
    """Relative interiors of two bars meet (crossing or collinear overlap)."""
    hits = seg_seg_intersections(e1, e2, eps)
    if not hits:
        return False
    d1, d2 = e1.b - e1.a, e2.b - e2.a
    parallel = abs(cross2(d1, d2)) <= 1e-12 * max(norm(d1) * norm(d2), 1e-300)
    if parallel and len(hits) == 2:
        a = e1.point_at(hits[0][0])
        b = e1.point_at(hits[1][0])
        if norm(a - b) > eps:
            return True
    ends = (e1.a, e1.b, e2.a, e2.b)
    for t1, _t2 in hits:
        p = e1.point_at(t1)
        if not any(norm(p - q) <= eps for q in ends):
            return True
    return False


def validate(chain: AdornedChain, c: Configuration,
             tol: Tolerance = DEFAULT_TOL) -> OverlapReport:
    """Edge lengths, bar disjointness, and all-pairs adornment overlap."""
    if c.n != chain.n_vertices:
        raise GeometryError(f"configuration has {c.n} vertices, "
                            f"chain expects {chain.n_vertices}")
    p = c.positions
    rest = chain.rest_lengths()
    lengths = c.edge_lengths(chain)
    length_violations = tuple(
        (k, float(lengths[k]), float(rest[k]))
        for k in range(chain.n_edges)
        if abs(lengths[k] - rest[k]) > tol.eps_geom * max(1.0, rest[k]))

    segs = [Segment(p[i], p[j]) for i, j in chain.edges]
    base_crossings = []
    for k1 in range(chain.n_edges):
        for k2 in range(k1 + 1, chain.n_edges):
            if _bases_conflict(segs[k1], segs[k2], tol.eps_overlap):
                base_crossings.append((k1, k2))

    # shapes cannot be carried onto a bar of the wrong length, so edges with
    # violated lengths sit out the overlap phase
    bad = {k for k, _, _ in length_violations}
    regions = {
        k: a.region_at(p[i], p[j])
        for k, ((i, j), a) in enumerate(zip(chain.edges, chain.adornments))
        if k not in bad}
    pairs = []
    for k1 in range(chain.n_edges):
        for k2 in range(k1 + 1, chain.n_edges):
            if k1 in bad or k2 in bad:
                continue
            depth = penetration_depth(regions[k1], regions[k2], tol)
            if depth > tol.eps_overlap:
                pairs.append((k1, k2, float(depth)))

    clean = not pairs and not base_crossings and not length_violations
    return OverlapReport(tuple(pairs), tuple(base_crossings),
                         length_violations, clean)


def is_expansion(c_from: Configuration, c_to: Configuration,
                 tol: Tolerance = DEFAULT_TOL) -> ExpansionReport:
    """Every pairwise vertex distance nondecreasing within eps_geom."""
    if c_from.n != c_to.n:
        raise GeometryError("vertex counts differ")
    d0 = c_from.pairwise_distances()
    d1 = c_to.pairwise_distances()
    iu = np.triu_indices(c_from.n, k=1)
    gaps = (d1 - d0)[iu]
    k = int(np.argmin(gaps))
    pair = (int(iu[0][k]), int(iu[1][k]))
    worst = (pair, float(d0[pair]), float(d1[pair]))
    return ExpansionReport(bool(gaps[k] >= -tol.eps_geom), worst)


# ---------------------------------------------------------------------------
# four-disk rearrangement predicate


def disks_common_intersection_empty(disks: Sequence[Disk],
                                    slack: float = 1e-12) -> bool:
    """Exact emptiness of the common intersection of a few disks.

    A nonempty intersection of disks contains a disk center or a pairwise
    circle intersection point, so testing those candidates is exact.
    """
    cands = [d.center for d in disks]
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            cands.extend(circle_circle_intersections(
                disks[i].center, disks[i].radius,
                disks[j].center, disks[j].radius))
    for pt in cands:
        if all(norm(pt - d.center) <= d.radius + slack for d in disks):
            return False
    return True


def kirszbraun_preserves_empty(disksA: Sequence[Disk], centers_to: Sequence[Point2],
                               tol: Tolerance = DEFAULT_TOL) -> bool:
    """Empty common intersection survives an expansive center rearrangement.

    Returns True when the guarantee holds on this instance: either the
    original intersection is nonempty (no claim to check) or both the
    original and rearranged intersections are empty.
    """
    if len(disksA) != len(centers_to):
        raise GeometryError("need one target center per disk")
    centers_to = [np.asarray(ct, float) for ct in centers_to]
    for i in range(len(disksA)):
        for j in range(i + 1, len(disksA)):
            d_old = norm(disksA[j].center - disksA[i].center)
            d_new = norm(centers_to[j] - centers_to[i])
            if d_new < d_old - tol.eps_geom:
                raise PreconditionError(
                    f"centers {i},{j} move closer: {d_old} -> {d_new}")
    before_empty = disks_common_intersection_empty(disksA)
    if not before_empty:
        return True
    moved = [Disk(ct, d.radius) for d, ct in zip(disksA, centers_to)]
    return disks_common_intersection_empty(moved)


# ---------------------------------------------------------------------------
# theorem-level verifier


def verify_symmetric_expansion(chain: AdornedChain, c_from: Configuration,
                               c_to: Configuration,
                               tol: Tolerance = DEFAULT_TOL) -> OverlapReport:
    """Check that an expansion of a symmetric slender scene stays clean.

    Preconditions are reported distinctly: symmetry/slenderness of every
    adornment, a clean starting configuration, and a genuine expansion.  A
    non-clean result then signals a numerical-tolerance failure and carries
    the four disk centers per offending pair for the rearrangement sub-check.
    """
    for k, a in enumerate(chain.adornments):
        v = is_slender(a, tol=tol)
        if not v.is_slender:
            raise PreconditionError(f"adornment {k} is not slender")
        if not v.is_symmetric:
            raise PreconditionError(f"adornment {k} is not symmetric")
    rep_from = validate(chain, c_from, tol)
    if not rep_from.clean:
        raise PreconditionError("starting configuration is not clean")
    exp = is_expansion(c_from, c_to, tol)
    if not exp.is_expansion:
        raise PreconditionError(
            f"not an expansion: pair {exp.worst_pair[0]} shrinks "
            f"{exp.worst_pair[1]} -> {exp.worst_pair[2]}")
    rep_to = validate(chain, c_to, tol)
    if rep_to.clean:
        return rep_to
    diags = []
    for (k1, k2, depth) in rep_to.pairs:
        i1, j1 = chain.edges[k1]
        i2, j2 = chain.edges[k2]
        diags.append({
            "pair": (k1, k2),
            "depth": depth,
            "disk_centers_from": [c_from.positions[v].copy()
                                  for v in (i1, j1, i2, j2)],
            "disk_centers_to": [c_to.positions[v].copy()
                                for v in (i1, j1, i2, j2)],
            "note": "tolerance failure: expansion of a symmetric slender "
                    "scene must stay clean",
        })
    return OverlapReport(rep_to.pairs, rep_to.base_crossings,
                         rep_to.length_violations, False, tuple(diags))
