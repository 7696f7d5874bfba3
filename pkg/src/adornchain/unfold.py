"""Expansive-motion engine: straighten open chains, convexify closed ones.

Velocity selection is a two-stage convex program on the strut system of the
configuration: first maximize the strict-expansion margin mu (LP), then take
the minimum-norm velocity achieving it (QP), gauge-fixed by pinning vertex 0
and the direction of edge 0.  Integration is explicit Euler with
Gauss-Newton bar reprojection and step halving; expansion is re-checked
per frame rather than trusted from the first-order step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .chain import AdornedChain, Configuration, OverlapReport, is_expansion, validate
from .errors import EngineError, PreconditionError
from .geom import (
    DEFAULT_TOL,
    Segment,
    Tolerance,
    norm,
    perp,
    prim_prim_distance,
    separation,
    signed_wrap,
    unit,
)
from .qp import min_norm_qp

STALL_MARGIN = 1e-12


@dataclass(frozen=True)
class MotionStep:
    """First-order velocities (one 2-vector per vertex) over a dt."""

    velocities: np.ndarray
    dt: float
    mu: float = 0.0  # strict-expansion margin of the velocity program


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    frames: tuple
    termination: str  # straight | convex | max_steps | stalled | reconfigured

    def __post_init__(self) -> None:
        if len(self.times) != len(self.frames):
            raise EngineError("times and frames must align")
        if len(self.times) > 1 and np.min(np.diff(self.times)) <= 0:
            raise EngineError("times must increase")


@dataclass(frozen=True)
class UnfoldOptions:
    dt_init: float = 0.05
    dt_min: float = 1e-5
    dt_max: float = 0.5
    max_steps: int = 2000
    straightness_tol: float = 1e-6
    strut_floor: float = DEFAULT_TOL.eps_overlap

    def __post_init__(self) -> None:
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise EngineError("need 0 < dt_min <= dt_init <= dt_max")


# ---------------------------------------------------------------------------
# configuration predicates


def turn_angles(chain: AdornedChain, c: Configuration) -> np.ndarray:
    """Signed heading changes at interior vertices (all vertices if closed)."""
    p = c.positions
    headings = np.array([np.arctan2(*(p[j] - p[i])[::-1])
                         for i, j in chain.edges])
    if chain.closed:
        return np.array([signed_wrap(headings[(k + 1) % len(headings)] - headings[k])
                         for k in range(len(headings))])
    return np.array([signed_wrap(headings[k + 1] - headings[k])
                     for k in range(len(headings) - 1)])


def is_terminal(chain: AdornedChain, c: Configuration,
                straightness_tol: float = 1e-6):
    """'straight' / 'convex' when the unfolding target is reached, else None."""
    turns = turn_angles(chain, c)
    if not chain.closed:
        if turns.size == 0 or np.max(np.abs(turns)) < straightness_tol:
            return "straight"
        return None
    pos = bool(np.any(turns > straightness_tol))
    neg = bool(np.any(turns < -straightness_tol))
    return "convex" if not (pos and neg) else None


def strut_pairs(chain: AdornedChain) -> list:
    """Vertex pairs not joined by a bar; these must never contract."""
    bars = {tuple(sorted(e)) for e in chain.edges}
    n = chain.n_vertices
    return [(i, j) for i in range(n) for j in range(i + 1, n)
            if (i, j) not in bars]


def _max_pair_distances(chain: AdornedChain) -> np.ndarray:
    """Largest distance each vertex pair can reach given the bar lengths
    (sum of rest lengths along the chain; the shorter way round if closed)."""
    rest = chain.rest_lengths()
    n = chain.n_vertices
    out = np.zeros((n, n))
    pref = np.concatenate([[0.0], np.cumsum(rest)])
    total = pref[-1] if chain.closed else None
    for i in range(n):
        for j in range(i + 1, n):
            along = pref[j] - pref[i]
            out[i, j] = out[j, i] = min(along, total - along) if chain.closed \
                else along
    return out


def strictly_simple(chain: AdornedChain, c: Configuration,
                    tol: Tolerance = DEFAULT_TOL) -> bool:
    """Bars pairwise separated beyond eps_overlap; no flat-folded hinge."""
    p = c.positions
    segs = [Segment(p[i], p[j]) for i, j in chain.edges]
    for k1 in range(len(segs)):
        for k2 in range(k1 + 1, len(segs)):
            if chain.adjacent(k1, k2):
                continue
            if prim_prim_distance(segs[k1], segs[k2]) <= tol.eps_overlap:
                return False
    turns = turn_angles(chain, c)
    if turns.size and np.max(np.abs(turns)) >= np.pi - 1e-7:
        return False
    return True


# ---------------------------------------------------------------------------
# velocity program


def expansive_velocity(c: Configuration, chain: AdornedChain,
                       opts: UnfoldOptions = UnfoldOptions(),
                       tol: Tolerance = DEFAULT_TOL) -> MotionStep:
    """Minimum-norm strictly expansive first-order motion.

    Maximizes the expansion margin mu over bar-preserving, gauge-fixed
    velocities with every vertex speed capped at 1, then minimizes the
    velocity norm at that margin.  The min-norm magnitude decays with the
    distance to the terminal state, which is what lets plain Euler steps
    land inside straightness_tol instead of oscillating across it.  At
    terminal configurations returns zero velocities.
    """
    n = c.n
    p = c.positions
    if is_terminal(chain, c, opts.straightness_tol):
        return MotionStep(np.zeros((n, 2)), 0.0, 0.0)
    if not strictly_simple(chain, c, tol):
        raise PreconditionError("configuration is not strictly simple")

    struts = strut_pairs(chain)
    dmax = _max_pair_distances(chain)
    nv = 2 * n
    rows_eq = []
    for i, j in chain.edges:
        row = np.zeros(nv + 1)
        d = p[i] - p[j]
        row[2 * i:2 * i + 2] = d
        row[2 * j:2 * j + 2] = -d
        rows_eq.append(row)
    for k in range(2):  # pin vertex 0
        row = np.zeros(nv + 1)
        row[k] = 1.0
        rows_eq.append(row)
    n0 = perp(unit(p[chain.edges[0][1]] - p[chain.edges[0][0]]))
    row = np.zeros(nv + 1)  # pin the direction of edge 0
    i0, j0 = chain.edges[0]
    row[2 * j0:2 * j0 + 2] = n0
    row[2 * i0:2 * i0 + 2] = -n0
    rows_eq.append(row)
    A_eq = np.array(rows_eq)
    b_eq = np.zeros(len(rows_eq))

    # slack target: close pairs are pushed apart proportionally; a pair near
    # its maximum possible distance (a straightened subchain) asks for
    # proportionally less, otherwise one nearly-straight hinge would cap the
    # margin mu and bring every velocity down with it
    g = np.array([min(1.0,
                      max(norm(p[j] - p[i]) - opts.strut_floor, 0.0),
                      max(dmax[i, j] - norm(p[j] - p[i]), 0.0))
                  for i, j in struts])
    # normalize so the largest slack is 1: near a straight state every g is
    # of order turn^2 and the raw coefficients sit below the LP solver's
    # matrix tolerance, which it misreads as infeasibility.  Rescaling g
    # rescales the reported margin but leaves the demanded rates mu*g alone.
    if g.size and g.max() > 0.0:
        g = g / g.max()
    A_ub = np.zeros((len(struts), nv + 1))
    for r, (i, j) in enumerate(struts):
        u = unit(p[i] - p[j])
        A_ub[r, 2 * i:2 * i + 2] = -u
        A_ub[r, 2 * j:2 * j + 2] = u
        A_ub[r, nv] = g[r]
    b_ub = np.zeros(len(struts))

    cost = np.zeros(nv + 1)
    cost[nv] = -1.0
    bounds = [(-1.0, 1.0)] * nv + [(0.0, 1.0)]
    # tolerance ladder: tight first so vertices satisfy the raw strut dots,
    # then relaxed variants; the solver occasionally chokes on the tight
    # setting for perfectly feasible inputs (z = 0 always satisfies this LP)
    res = None
    for lp_opts in ({"primal_feasibility_tolerance": 1e-9,
                     "dual_feasibility_tolerance": 1e-9},
                    {"presolve": False}, {}):
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs", options=lp_opts)
        if res.status == 0:
            break
    if res.status != 0:
        worst = min(struts, key=lambda ij: norm(p[ij[1]] - p[ij[0]]))
        raise EngineError(
            f"velocity program infeasible ({res.message}); closest strut "
            f"pair {worst} at distance {norm(p[worst[1]] - p[worst[0]])}")
    mu = float(res.x[nv])

    v = res.x[:nv]
    if mu >= STALL_MARGIN:
        mu_t = max(0.0, mu - 1e-9)
        G = -A_ub[:, :nv]
        h = mu_t * g
        try:
            v = min_norm_qp(A_eq[:, :nv], b_eq, G, h, x0=v,
                            feas_tol=1e-6).x
        except EngineError:
            pass  # keep the LP vertex; it satisfies every contract below

    V = v.reshape(n, 2)
    bar_res = max(abs(float((p[i] - p[j]) @ (V[i] - V[j])))
                  for i, j in chain.edges)
    if bar_res > tol.eps_geom:
        raise EngineError(f"bar residual {bar_res} out of tolerance")
    if struts:
        strut_res = min(float((p[i] - p[j]) @ (V[i] - V[j]))
                        for i, j in struts)
        if strut_res < -tol.eps_geom:
            raise EngineError(f"strut residual {strut_res} out of tolerance")
    return MotionStep(V, 0.0, mu)


# ---------------------------------------------------------------------------
# integration


PIN_MARGIN = 1e-10  # distance dips smaller than this ride on the 1e-9 slack


def _positions_from_headings(p0: np.ndarray, headings: np.ndarray,
                             lengths: np.ndarray, n: int) -> np.ndarray:
    steps = lengths[:n - 1, None] * np.stack(
        [np.cos(headings[:n - 1]), np.sin(headings[:n - 1])], axis=1)
    return np.vstack([p0, p0 + np.cumsum(steps, axis=0)])


def _project_step(chain: AdornedChain, q: np.ndarray, rest: np.ndarray,
                  d_prev: np.ndarray, d_target: dict, max_iter: int = 40):
    """Pull an Euler step back onto the bar manifold without letting any
    strut pair end below its previous distance.

    Works in heading space: positions are rebuilt from edge directions and
    the exact rest lengths, so bars hold to machine precision by
    construction and never enter a Jacobian (a bar pair flanking a nearly
    straight hinge makes a cartesian bars-plus-struts system singular).
    Newton then runs on the shrunk pairs only, restoring each to its
    first-order target -- restoring merely to d_prev would freeze pairs
    that hug their maximum distance short of straight forever.  Dips under
    PIN_MARGIN are left to the expansion check's own slack.  Closed chains
    carry two closure rows.  Returns positions or None.
    """
    n = chain.n_vertices
    headings = np.array([np.arctan2(*(q[j] - q[i])[::-1])
                         for i, j in chain.edges])
    p0 = q[0].copy()
    struts = strut_pairs(chain)
    pinned = set()

    for _ in range(max_iter):
        pos = _positions_from_headings(p0, headings, rest, n)
        rows = []
        if chain.closed:
            gap = pos[0] - (pos[n - 1] + rest[n - 1] * np.array(
                [np.cos(headings[n - 1]), np.sin(headings[n - 1])]))
            rows.append(("cx", gap[0]))
            rows.append(("cy", gap[1]))
        for (i, j) in struts:
            d = norm(pos[j] - pos[i])
            if (i, j) in pinned or d < d_prev[i, j] - PIN_MARGIN:
                pinned.add((i, j))
                rows.append(((i, j), d - d_target[i, j]))
        # closure must vanish two-sided; pins may overshoot upward
        done = all(abs(r) <= 1e-12 if tag in ("cx", "cy") else r >= -1e-12
                   for tag, r in rows)
        if done:
            return pos
        res = np.array([r for _, r in rows])

        J = np.zeros((len(rows), len(headings)))
        tangents = rest[:, None] * np.stack(
            [-np.sin(headings), np.cos(headings)], axis=1)
        for r_k, (tag, _) in enumerate(rows):
            if tag == "cx":
                J[r_k, :] = -tangents[:, 0]
            elif tag == "cy":
                J[r_k, :] = -tangents[:, 1]
            else:
                i, j = tag
                u = unit(pos[j] - pos[i])
                for k in range(i, j):  # headings i..j-1 move p_j relative p_i
                    J[r_k, k] = u @ tangents[k]
        delta, *_ = np.linalg.lstsq(J, -res, rcond=None)
        if not np.all(np.isfinite(delta)):
            return None
        headings = headings + delta
    return None


def integrate(chain: AdornedChain, c0: Configuration,
              opts: UnfoldOptions = UnfoldOptions(),
              tol: Tolerance = DEFAULT_TOL) -> Trajectory:
    """Drive the configuration to straight (open) or convex (closed)."""
    rep = validate(chain, c0, tol)
    if not rep.clean:
        raise PreconditionError("starting configuration fails validate")
    if not is_terminal(chain, c0, opts.straightness_tol) and \
            not strictly_simple(chain, c0, tol):
        raise PreconditionError("starting configuration is not strictly simple")

    rest = chain.rest_lengths()
    c = c0
    frames = [c0]
    times = [0.0]
    dt = opts.dt_init

    for _ in range(opts.max_steps):
        term = is_terminal(chain, c, opts.straightness_tol)
        if term:
            return Trajectory(np.array(times), tuple(frames), term)
        ms = expansive_velocity(c, chain, opts, tol)
        if ms.mu < STALL_MARGIN:
            return Trajectory(np.array(times), tuple(frames), "stalled")
        d_prev = c.pairwise_distances()
        p_cur, V = c.positions, ms.velocities
        dmax = _max_pair_distances(chain)
        rates = {
            (i, j): max(0.0, float(unit(p_cur[j] - p_cur[i]) @ (V[j] - V[i])))
            for i, j in strut_pairs(chain)}
        accepted = None
        while True:
            # growth targets stay strictly short of each pair's reachable
            # maximum, else the projection chases an impossible distance
            d_target = {
                (i, j): min(d_prev[i, j] + dt * r,
                            d_prev[i, j]
                            + 0.999 * (dmax[i, j] - d_prev[i, j]))
                for (i, j), r in rates.items()}
            q = _project_step(chain, p_cur + dt * V, rest, d_prev, d_target)
            if q is not None:
                c_new = Configuration(q)
                if is_expansion(c, c_new, tol).is_expansion and \
                        strictly_simple(chain, c_new, tol):
                    accepted = c_new
                    break
            dt *= 0.5
            if dt < opts.dt_min:
                return Trajectory(np.array(times), tuple(frames), "stalled")
        c = accepted
        times.append(times[-1] + dt)
        frames.append(c)
        dt = min(dt * 1.5, opts.dt_max)
    return Trajectory(np.array(times), tuple(frames), "max_steps")


# ---------------------------------------------------------------------------
# trajectory guard


@dataclass(frozen=True)
class GuardReport:
    clean: bool
    n_frames: int
    dirty_frames: tuple    # (frame index, OverlapReport)
    non_expansive: tuple   # (frame k, (i, j), dist at k, dist at k+1)
    refine_requests: tuple  # steps k -> k+1 that moved beyond the safe bound


def guard_trajectory(chain: AdornedChain, t: Trajectory,
                     tol: Tolerance = DEFAULT_TOL) -> GuardReport:
    """Per-frame validate plus conservative between-frame screening."""
    dirty = []
    for k, frame in enumerate(t.frames):
        rep = validate(chain, frame, tol)
        if not rep.clean:
            dirty.append((k, rep))

    non_exp = []
    for k in range(len(t.frames) - 1):
        rep = is_expansion(t.frames[k], t.frames[k + 1], tol)
        if not rep.is_expansion:
            pair, d0, d1 = rep.worst_pair
            non_exp.append((k, pair, d0, d1))

    refine = []
    if len(t.frames) > 1:
        prev_sep = _min_region_separation(chain, t.frames[0], tol)
        for k in range(len(t.frames) - 1):
            move = float(np.max(np.hypot(
                *(t.frames[k + 1].positions - t.frames[k].positions).T)))
            if move > 0.5 * prev_sep:
                refine.append(k)
            prev_sep = _min_region_separation(chain, t.frames[k + 1], tol)

    return GuardReport(clean=not dirty, n_frames=len(t.frames),
                       dirty_frames=tuple(dirty), non_expansive=tuple(non_exp),
                       refine_requests=tuple(refine))


def _min_region_separation(chain: AdornedChain, c: Configuration,
                           tol: Tolerance) -> float:
    regs = chain.edge_regions(c)
    best = np.inf
    for k1 in range(len(regs)):
        for k2 in range(k1 + 1, len(regs)):
            if chain.adjacent(k1, k2):
                continue
            best = min(best, separation(regs[k1], regs[k2], tol))
    return float(max(best, 0.0))


# ---------------------------------------------------------------------------
# reconfiguration through the straight state


def _exact_straight(chain: AdornedChain, c: Configuration) -> Configuration:
    """Snap a within-tolerance frame onto the straight line through its ends.

    Every pairwise distance rises to its bar-sum maximum, so the snap is
    itself an expansive step from any configuration of the same chain.
    """
    p = c.positions
    e = unit(p[-1] - p[0])
    arc = np.concatenate([[0.0], np.cumsum(chain.rest_lengths())])
    return Configuration(p[0] + arc[:, None] * e)


def reconfigure(chain: AdornedChain, c_from: Configuration,
                c_to: Configuration, opts: UnfoldOptions = UnfoldOptions(),
                tol: Tolerance = DEFAULT_TOL) -> Trajectory:
    """Open-chain path c_from -> straight -> c_to (second leg time-reversed).

    The two legs straighten under their own gauges, so their straight
    frames differ by a rigid motion; a subdivided rotation-plus-shift
    bridge joins them without changing any pairwise distance.  The result
    starts at c_from and ends at c_to exactly.
    """
    if chain.closed:
        raise PreconditionError("reconfigure requires an open chain")
    t1 = integrate(chain, c_from, opts, tol)
    if t1.termination != "straight":
        raise EngineError(f"forward leg ended '{t1.termination}', not straight")
    t2 = integrate(chain, c_to, opts, tol)
    if t2.termination != "straight":
        raise EngineError(f"return leg ended '{t2.termination}', not straight")

    s1 = _exact_straight(chain, t1.frames[-1])
    s2 = _exact_straight(chain, t2.frames[-1])
    p1, p2 = s1.positions, s2.positions
    ang = signed_wrap(np.arctan2(*(p2[-1] - p2[0])[::-1])
                      - np.arctan2(*(p1[-1] - p1[0])[::-1]))
    shift = p2[0] - p1[0]
    total = float(np.sum(chain.rest_lengths()))
    span = abs(ang) * total + norm(shift)
    sep = _min_region_separation(chain, s1, tol)
    n_bridge = int(np.ceil(span / max(0.25 * sep, 1e-3 * max(total, 1.0)))) \
        if span > 1e-12 else 0

    frames = list(t1.frames) + [s1]
    for k in range(1, n_bridge):
        f = k / n_bridge
        ca, sa = np.cos(f * ang), np.sin(f * ang)
        R = np.array([[ca, -sa], [sa, ca]])
        frames.append(Configuration(
            (p1 - p1[0]) @ R.T + p1[0] + f * shift))
    frames += [s2] + list(reversed(t2.frames))

    times = list(t1.times)
    pad = max(float(opts.dt_init), 1e-3)
    for _ in range(len(frames) - len(t2.frames) - len(times)):
        times.append(times[-1] + pad)
    back = list(t2.times)
    t_end = times[-1]
    for k in range(len(back) - 1, 0, -1):
        t_end += back[k] - back[k - 1]
        times.append(t_end)
    times.append(t_end + pad)  # the final frame is c_to itself
    return Trajectory(np.array(times), tuple(frames), "reconfigured")
