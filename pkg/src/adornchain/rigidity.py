"""Self-touching bar linkages and locked-configuration certificates.

A self-touching scene is a bar framework whose drawing collapses several
vertices onto identical coordinates.  The combinatorial information saying
which side each touching vertex presses from is carried by zero-length
connections.  Certification searches for an equilibrium stress that is
negative on every connection and pairs it with a pinned rank test; the two
simplification rules collapse doubled bars so the search runs on the smallest
equivalent scene.  A certificate is sufficient evidence of lockedness, never
of flexibility.

Sign convention note: connection stresses are required to be negative
(normalized to <= -1).  One could equivalently flip every connection normal
and ask for positive stresses; the negative convention is used consistently
here and in the emitted certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import EngineError, GeometryError, PreconditionError
from .geom import cross2, norm, perp, rot, unit, vec

EPS_COLLOCATE = 1e-9
RANK_REL_TOL = 1e-8
RESIDUAL_TOL = 1e-8
# cos margin for the strict "< 90 degrees" jaw tests in the merge rules
JAW_STRICT = 1e-9


# ---------------------------------------------------------------------------
# scene model


@dataclass(frozen=True)
class Connection:
    """Vertex `wedged` pressed against collocated vertex `host`, constrained
    to one side of the host bar (host, brace).

    side=+1 means the admissible half-plane normal is the counterclockwise
    perpendicular of (brace - host); side=-1 the clockwise one.  First-order
    motions must satisfy (v_wedged - v_host) . normal >= 0.
    """

    wedged: int
    host: int
    brace: int
    side: int

    def normal(self, vertices: np.ndarray) -> np.ndarray:
        d = vertices[self.brace] - vertices[self.host]
        return float(self.side) * perp(unit(d))


@dataclass(frozen=True, eq=False)
class SelfTouchingLinkage:
    """Bar framework with optional zero-length connections and pins.

    vertices: (n, 2) float array.  bars: index pairs.  rest_lengths default
    to the drawn lengths.  pins are extra vertex identifications used only by
    the rank test.
    """

    vertices: np.ndarray
    bars: tuple
    connections: tuple = ()
    pins: tuple = ()
    rest_lengths: tuple = None

    def __post_init__(self) -> None:
        pos = np.asarray(self.vertices, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise GeometryError("vertices must be an (n, 2) array")
        object.__setattr__(self, "vertices", pos)
        bars = tuple((int(i), int(j)) for i, j in self.bars)
        object.__setattr__(self, "bars", bars)
        n = len(pos)
        seen = set()
        for i, j in bars:
            if not (0 <= i < n and 0 <= j < n):
                raise GeometryError(f"bar ({i}, {j}) references a missing vertex")
            if i == j:
                raise GeometryError(f"bar ({i}, {j}) is a self-loop")
            key = frozenset((i, j))
            if key in seen:
                raise GeometryError(f"bar ({i}, {j}) appears twice")
            seen.add(key)
        if self.rest_lengths is None:
            rest = tuple(float(norm(pos[j] - pos[i])) for i, j in bars)
        else:
            rest = tuple(float(r) for r in self.rest_lengths)
            if len(rest) != len(bars):
                raise GeometryError("rest_lengths count does not match bars")
        object.__setattr__(self, "rest_lengths", rest)
        for (i, j), r in zip(bars, rest):
            if r <= 1e-12:
                raise GeometryError(f"bar ({i}, {j}) has nonpositive rest length")
        conns = tuple(self.connections)
        bar_set = {frozenset(b) for b in bars}
        for c in conns:
            if not isinstance(c, Connection):
                raise GeometryError("connections must be Connection records")
            for idx in (c.wedged, c.host, c.brace):
                if not (0 <= idx < n):
                    raise GeometryError("connection references a missing vertex")
            if c.wedged == c.host:
                raise GeometryError("connection joins a vertex to itself")
            if c.side not in (-1, 1):
                raise GeometryError("connection side must be +1 or -1")
            if frozenset((c.host, c.brace)) not in bar_set:
                raise GeometryError(
                    f"connection brace bar ({c.host}, {c.brace}) is not a bar")
            gap = norm(pos[c.wedged] - pos[c.host])
            if gap > EPS_COLLOCATE:
                raise PreconditionError(
                    f"connection ({c.wedged}, {c.host}) joins vertices "
                    f"{gap:.3e} apart; they must be collocated")
        object.__setattr__(self, "connections", conns)
        pins = tuple((int(i), int(j)) for i, j in self.pins)
        for i, j in pins:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise GeometryError(f"invalid pin ({i}, {j})")
        object.__setattr__(self, "pins", pins)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def bar_index(self, i: int, j: int) -> int:
        key = frozenset((i, j))
        for k, b in enumerate(self.bars):
            if frozenset(b) == key:
                return k
        raise KeyError(f"no bar ({i}, {j})")

    def bar_lengths(self) -> np.ndarray:
        p = self.vertices
        return np.array([norm(p[j] - p[i]) for i, j in self.bars])

    def bars_at(self, v: int, exclude: Sequence[int] = ()) -> list:
        out = []
        for k, (i, j) in enumerate(self.bars):
            if k in exclude:
                continue
            if i == v or j == v:
                out.append(k)
        return out

    def with_vertices(self, positions) -> "SelfTouchingLinkage":
        return replace(self, vertices=np.asarray(positions, dtype=float))


@dataclass(frozen=True, eq=False)
class Stress:
    """Equilibrium stress: one signed weight per bar and per connection."""

    omega_bar: np.ndarray
    omega_conn: np.ndarray


@dataclass(frozen=True, eq=False)
class RigidityCertificate:
    conclusion: str
    stress: Optional[Stress]
    pinned_rank_ok: bool
    rank: int
    rank_needed: int
    equilibrium_residual: float
    max_conn_stress: float
    reasons: tuple = ()
    rule_chain: tuple = ()

    @property
    def certified(self) -> bool:
        return self.conclusion == "certified_rigid"


@dataclass(frozen=True)
class PerturbationSpec:
    delta: float

    def __post_init__(self) -> None:
        if not (self.delta > 0.0):
            raise PreconditionError("perturbation delta must be positive")


@dataclass(frozen=True)
class MergeRecord:
    """One simplification-rule application: `moved` bar was collocated with
    `onto` and removed after identifying the listed vertex pairs.  Indices
    refer to the scene the rule was applied to; `where` pins the site down
    by coordinates."""

    rule: int
    moved: tuple
    onto: tuple
    identified: tuple
    where: tuple = ()


# ---------------------------------------------------------------------------
# first-order machinery


def _bar_rows(l: SelfTouchingLinkage) -> np.ndarray:
    rows = np.zeros((len(l.bars), 2 * l.n))
    p = l.vertices
    for k, (i, j) in enumerate(l.bars):
        d = p[i] - p[j]
        rows[k, 2 * i:2 * i + 2] = d
        rows[k, 2 * j:2 * j + 2] = -d
    return rows


def _connection_rows(l: SelfTouchingLinkage) -> np.ndarray:
    rows = np.zeros((len(l.connections), 2 * l.n))
    for k, c in enumerate(l.connections):
        nvec = c.normal(l.vertices)
        rows[k, 2 * c.wedged:2 * c.wedged + 2] = nvec
        rows[k, 2 * c.host:2 * c.host + 2] = -nvec
    return rows


def _pin_rows(pairs, n: int) -> np.ndarray:
    uniq = []
    seen = set()
    for i, j in pairs:
        key = frozenset((i, j))
        if key not in seen:
            seen.add(key)
            uniq.append((i, j))
    rows = np.zeros((2 * len(uniq), 2 * n))
    for k, (i, j) in enumerate(uniq):
        rows[2 * k, 2 * i] = 1.0
        rows[2 * k, 2 * j] = -1.0
        rows[2 * k + 1, 2 * i + 1] = 1.0
        rows[2 * k + 1, 2 * j + 1] = -1.0
    return rows


def rigidity_matrix(l: SelfTouchingLinkage,
                    treat_connections_as_pins: bool = True) -> np.ndarray:
    """First-order constraint matrix: one row per bar, plus two velocity
    identification rows per pinned vertex pair.  Rigid motions are not
    quotiented out."""
    blocks = [_bar_rows(l)]
    pairs = list(l.pins)
    if treat_connections_as_pins:
        pairs += [(c.wedged, c.host) for c in l.connections]
    if pairs:
        blocks.append(_pin_rows(pairs, l.n))
    return np.vstack(blocks)


def matrix_rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > RANK_REL_TOL * s[0]))


def is_infinitesimally_rigid(l: SelfTouchingLinkage, pins: bool = True) -> bool:
    if l.n < 2:
        raise PreconditionError("rigidity needs at least two vertices")
    rank = matrix_rank(rigidity_matrix(l, treat_connections_as_pins=pins))
    return rank == 2 * l.n - 3


def stress_residual(l: SelfTouchingLinkage, s: Stress) -> float:
    g = np.vstack([_bar_rows(l), _connection_rows(l)]) if l.connections \
        else _bar_rows(l)
    omega = np.concatenate([np.asarray(s.omega_bar, dtype=float),
                            np.asarray(s.omega_conn, dtype=float)])
    return float(np.abs(g.T @ omega).max()) if omega.size else 0.0


def find_stress(l: SelfTouchingLinkage,
                sign_hints: Optional[dict] = None) -> Optional[Stress]:
    """Equilibrium stress with every connection weight <= -1 (normalized),
    bar weights free, found by a feasibility LP.  Returns None when no such
    stress exists.  sign_hints optionally tightens bar bounds, keyed by bar
    index with (lo, hi) values."""
    if not l.connections:
        raise PreconditionError(
            "stress search needs at least one zero-length connection")
    nb, nc = len(l.bars), len(l.connections)
    g = np.vstack([_bar_rows(l), _connection_rows(l)])
    bounds = [(None, None)] * nb + [(None, -1.0)] * nc
    if sign_hints:
        for k, bnd in sign_hints.items():
            if not (0 <= k < nb):
                raise PreconditionError(f"sign hint for unknown bar {k}")
            bounds[k] = bnd
    cost = np.zeros(nb + nc)
    cost[nb:] = -1.0  # prefer the smallest normalized connection weights
    res = linprog(cost, A_eq=g.T, b_eq=np.zeros(2 * l.n), bounds=bounds,
                  method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise EngineError(f"stress LP failed with status {res.status}: "
                          f"{res.message}")
    s = Stress(omega_bar=res.x[:nb].copy(), omega_conn=res.x[nb:].copy())
    resid = stress_residual(l, s)
    if resid > RESIDUAL_TOL:
        raise EngineError(f"stress LP returned residual {resid:.3e}")
    if np.any(s.omega_conn > -1.0 + 1e-9):
        raise EngineError("stress LP violated the connection normalization")
    return s


def certify_rigid(l: SelfTouchingLinkage) -> RigidityCertificate:
    """Stress feasibility plus pinned first-order rank.  not_certified is a
    valid outcome and proves nothing about flexibility."""
    reasons = []
    stress = None
    try:
        stress = find_stress(l)
        if stress is None:
            reasons.append("no equilibrium stress with negative connections")
    except PreconditionError as exc:
        reasons.append(str(exc))
    rank = matrix_rank(rigidity_matrix(l, treat_connections_as_pins=True))
    needed = 2 * l.n - 3
    rank_ok = rank == needed
    if not rank_ok:
        reasons.append(f"pinned rank {rank} < {needed}")
    residual = stress_residual(l, stress) if stress is not None else math.nan
    max_conn = float(stress.omega_conn.max()) if stress is not None \
        and stress.omega_conn.size else math.nan
    ok = stress is not None and rank_ok
    return RigidityCertificate(
        conclusion="certified_rigid" if ok else "not_certified",
        stress=stress, pinned_rank_ok=rank_ok, rank=rank, rank_needed=needed,
        equilibrium_residual=residual, max_conn_stress=max_conn,
        reasons=tuple(reasons))


def certificate_text(l: SelfTouchingLinkage, cert: RigidityCertificate,
                     name: str = "scene") -> str:
    """Structured, self-contained text artifact for third-party re-checking."""
    lines = [
        f"locked-linkage certificate: {name}",
        "=" * (28 + len(name)),
        f"conclusion: {cert.conclusion}",
        f"vertices: {l.n}   bars: {len(l.bars)}   "
        f"connections: {len(l.connections)}   pins: {len(l.pins)}",
        f"pinned rank: {cert.rank} of {cert.rank_needed} needed (2n-3)",
        f"equilibrium residual: {cert.equilibrium_residual:.3e} "
        f"(tolerance {RESIDUAL_TOL:.0e})",
    ]
    if cert.reasons:
        lines.append("reasons: " + "; ".join(cert.reasons))
    lines.append("")
    lines.append("vertices (index: x y):")
    for i, p in enumerate(l.vertices):
        lines.append(f"  {i}: {p[0]:.17g} {p[1]:.17g}")
    lines.append("bars (index: i j rest omega):")
    for k, (i, j) in enumerate(l.bars):
        om = (f"{cert.stress.omega_bar[k]:.17g}"
              if cert.stress is not None else "-")
        lines.append(f"  {k}: {i} {j} {l.rest_lengths[k]:.17g} {om}")
    lines.append("connections (index: wedged host brace side omega; "
                 "all omega <= -1 required):")
    for k, c in enumerate(l.connections):
        om = (f"{cert.stress.omega_conn[k]:.17g}"
              if cert.stress is not None else "-")
        lines.append(f"  {k}: {c.wedged} {c.host} {c.brace} {c.side:+d} {om}")
    if cert.rule_chain:
        lines.append("rule applications (applied before certification):")
        for step, rec in enumerate(cert.rule_chain, 1):
            pairs = ", ".join(f"{a}->{b}" for a, b in rec.identified)
            lines.append(f"  {step}. rule {rec.rule}: bar {rec.moved} merged "
                         f"onto {rec.onto}; identified {pairs}")
    lines.append("")
    lines.append("re-check: per vertex, the stress-weighted sums of "
                 "(p_i - p_j) over bars plus side normals over connections "
                 "vanish; rank of the bar rows plus pin rows equals 2n-3.")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# simplification rules for doubled bars


def _match_endpoints(l: SelfTouchingLinkage, b: int, b_prime: int):
    """Pair up b's endpoints with b_prime's by position; None if not
    collocated as segments."""
    (i, j), (x, y) = l.bars[b], l.bars[b_prime]
    p = l.vertices
    if norm(p[i] - p[x]) <= EPS_COLLOCATE and norm(p[j] - p[y]) <= EPS_COLLOCATE:
        return ((i, x), (j, y))
    if norm(p[i] - p[y]) <= EPS_COLLOCATE and norm(p[j] - p[x]) <= EPS_COLLOCATE:
        return ((i, y), (j, x))
    return None


def _material_side(l: SelfTouchingLinkage, bar: int, d_line: np.ndarray,
                   endpoints=None) -> int:
    """Common side (relative to d_line through the bar) of all other bars
    hanging off the given endpoints of the bar: +1/-1, 0 if none,
    2 if mixed."""
    sides = set()
    p = l.vertices
    for v in (l.bars[bar] if endpoints is None else endpoints):
        for k in l.bars_at(v, exclude=(bar,)):
            i, j = l.bars[k]
            z = j if i == v else i
            s = cross2(d_line, p[z] - p[v])
            if abs(s) > 1e-12:
                sides.add(1 if s > 0 else -1)
    if len(sides) == 1:
        return sides.pop()
    if len(sides) > 1:
        return 2  # conflicting material; no admissible side
    return 0


def _has_jaw(l: SelfTouchingLinkage, at: int, toward: int, d_line: np.ndarray,
             side: int, exclude: Sequence[int]) -> bool:
    """Some bar at `at`, other than the excluded ones, makes a strict < 90
    degree angle with the direction toward `toward`, on the given side."""
    p = l.vertices
    ref = p[toward] - p[at]
    ref_n = norm(ref)
    for k in l.bars_at(at, exclude=exclude):
        i, j = l.bars[k]
        z = j if i == at else i
        arm = p[z] - p[at]
        s = cross2(d_line, arm)
        if abs(s) <= 1e-12 or (1 if s > 0 else -1) != side:
            continue
        if float(np.dot(arm, ref)) > JAW_STRICT * ref_n * norm(arm):
            return True
    return False


def _lengths_equal(l: SelfTouchingLinkage, b: int, b_prime: int) -> bool:
    la, lb = l.bar_lengths()[[b, b_prime]]
    return abs(la - lb) <= 1e-9 * max(1.0, la, lb)


def applicable_rule1(l: SelfTouchingLinkage, b: int, b_prime: int) -> bool:
    """b is a doubled copy of the non-incident bar b_prime, held in a pocket:
    at each endpoint of b_prime some bar on b's side makes a strict < 90
    degree angle with b_prime."""
    if b == b_prime:
        return False
    if set(l.bars[b]) & set(l.bars[b_prime]):
        return False
    if not _lengths_equal(l, b, b_prime):
        return False
    pairing = _match_endpoints(l, b, b_prime)
    if pairing is None:
        return False
    x, y = l.bars[b_prime]
    p = l.vertices
    d_line = unit(p[y] - p[x])
    mat = _material_side(l, b, d_line)
    if mat == 2:
        return False
    candidates = (mat,) if mat else (1, -1)
    for side in candidates:
        if _has_jaw(l, x, y, d_line, side, exclude=(b, b_prime)) and \
           _has_jaw(l, y, x, d_line, side, exclude=(b, b_prime)):
            return True
    return False


def applicable_rule2(l: SelfTouchingLinkage, b: int, b_prime: int) -> bool:
    """b is a doubled copy of the incident bar b_prime (shared vertex), and
    at the far endpoint some bar on b's side makes a strict < 90 degree angle
    with b_prime, closing over b."""
    if b == b_prime:
        return False
    shared = set(l.bars[b]) & set(l.bars[b_prime])
    if len(shared) != 1:
        return False
    if not _lengths_equal(l, b, b_prime):
        return False
    s = shared.pop()
    far_b = next(v for v in l.bars[b] if v != s)
    far_p = next(v for v in l.bars[b_prime] if v != s)
    p = l.vertices
    if norm(p[far_b] - p[far_p]) > EPS_COLLOCATE:
        return False
    d_line = unit(p[far_p] - p[s])
    # only cargo at b's far end rides along; the shared vertex's other bars
    # belong to the surrounding scene
    mat = _material_side(l, b, d_line, endpoints=(far_b,))
    if mat == 2:
        return False
    candidates = (mat,) if mat else (1, -1)
    for side in candidates:
        if _has_jaw(l, far_p, s, d_line, side, exclude=(b, b_prime)):
            return True
    return False


def _merge(l: SelfTouchingLinkage, drop_bar: int, identified) -> SelfTouchingLinkage:
    """Remove drop_bar and identify each (old, kept) vertex pair."""
    remap = {old: kept for old, kept in identified}
    drop_vertices = set(remap)
    keep = [v for v in range(l.n) if v not in drop_vertices]
    new_index = {v: k for k, v in enumerate(keep)}

    def rv(v: int) -> int:
        return new_index[remap.get(v, v)]

    bars = []
    seen = set()
    for k, (i, j) in enumerate(l.bars):
        if k == drop_bar:
            continue
        ni, nj = rv(i), rv(j)
        if ni == nj:
            raise GeometryError("merge collapsed a bar to a point")
        key = frozenset((ni, nj))
        if key in seen:
            continue
        seen.add(key)
        bars.append((ni, nj))
    conns = []
    for c in l.connections:
        nc = Connection(rv(c.wedged), rv(c.host), rv(c.brace), c.side)
        # a contact whose pair was identified by the merge became internal
        if nc.wedged == nc.host or nc.host == nc.brace:
            continue
        if nc not in conns:
            conns.append(nc)
    pins = []
    for i, j in l.pins:
        ni, nj = rv(i), rv(j)
        if ni != nj and (ni, nj) not in pins and (nj, ni) not in pins:
            pins.append((ni, nj))
    return SelfTouchingLinkage(vertices=l.vertices[keep], bars=tuple(bars),
                               connections=tuple(conns), pins=tuple(pins))


def _site_identifications(l: SelfTouchingLinkage, rule: int, b: int,
                          b_prime: int):
    if rule == 1:
        return _match_endpoints(l, b, b_prime)
    shared = (set(l.bars[b]) & set(l.bars[b_prime])).pop()
    far_b = next(v for v in l.bars[b] if v != shared)
    far_p = next(v for v in l.bars[b_prime] if v != shared)
    return ((far_b, far_p),)


def _keeps_contacts(l: SelfTouchingLinkage, identified) -> bool:
    contact_pairs = {frozenset((c.wedged, c.host)) for c in l.connections}
    return all(frozenset(pair) not in contact_pairs for pair in identified)


def _rule_sites(l: SelfTouchingLinkage, rule: int, preserve_contacts: bool):
    check = applicable_rule1 if rule == 1 else applicable_rule2
    m = len(l.bars)
    for b in range(m):
        for b_prime in range(m):
            if b_prime == b or not check(l, b, b_prime):
                continue
            if preserve_contacts and not _keeps_contacts(
                    l, _site_identifications(l, rule, b, b_prime)):
                continue
            yield b, b_prime


def _apply_rule(l: SelfTouchingLinkage, rule: int, b: Optional[int],
                b_prime: Optional[int], preserve_contacts: bool = False):
    check = applicable_rule1 if rule == 1 else applicable_rule2
    if b is None or b_prime is None:
        try:
            b, b_prime = next(_rule_sites(l, rule, preserve_contacts))
        except StopIteration:
            raise PreconditionError(f"no applicable rule {rule} site")
    elif not check(l, b, b_prime):
        raise PreconditionError(
            f"rule {rule} does not apply to bars {b} and {b_prime}")
    identified = _site_identifications(l, rule, b, b_prime)
    i, j = l.bars[b]
    record = MergeRecord(rule=rule, moved=l.bars[b], onto=l.bars[b_prime],
                         identified=identified,
                         where=(tuple(l.vertices[i]), tuple(l.vertices[j])))
    return _merge(l, b, identified), record


def apply_rule1(l: SelfTouchingLinkage, b: Optional[int] = None,
                b_prime: Optional[int] = None) -> SelfTouchingLinkage:
    return _apply_rule(l, 1, b, b_prime)[0]


def apply_rule2(l: SelfTouchingLinkage, b: Optional[int] = None,
                b_prime: Optional[int] = None) -> SelfTouchingLinkage:
    return _apply_rule(l, 2, b, b_prime)[0]


def simplify(l: SelfTouchingLinkage, max_rounds: int = 64,
             preserve_contacts: bool = True):
    """Apply rule 1 then rule 2 sites until none remain.  Returns the
    simplified linkage and the merge records in application order.

    With preserve_contacts (the certification default), merges that would
    identify a connection's wedged/host pair are skipped: such merges are
    individually sound but discard the contact structure the stress
    certificate is about to use."""
    records = []
    cur = l
    for _ in range(max_rounds):
        applied = False
        for rule in (1, 2):
            try:
                cur, rec = _apply_rule(cur, rule, None, None,
                                       preserve_contacts=preserve_contacts)
            except PreconditionError:
                continue
            records.append(rec)
            applied = True
            break
        if not applied:
            break
    else:
        raise EngineError("simplification did not terminate")
    return cur, tuple(records)


def certify_with_simplification(l: SelfTouchingLinkage):
    """Simplify, certify the reduced scene, and attach the rule chain.
    Returns (certificate, simplified linkage)."""
    reduced, records = simplify(l)
    cert = certify_rigid(reduced)
    return replace(cert, rule_chain=records), reduced


# ---------------------------------------------------------------------------
# convex arm opening check


def arm_opening_distances(positions, angle_deltas, n_steps: int = 10) -> np.ndarray:
    """Endpoint distances of a convex open chain as its turn angles shrink by
    angle_deltas in n_steps equal increments; entry 0 is the input chain."""
    pts = np.asarray(positions, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise PreconditionError("need an open chain of at least 3 vertices")
    deltas = np.asarray(angle_deltas, dtype=float)
    if deltas.shape != (len(pts) - 2,):
        raise PreconditionError("one angle delta per interior vertex required")
    edges = np.diff(pts, axis=0)
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(lengths < 1e-12):
        raise GeometryError("degenerate edge in the chain")
    headings = np.arctan2(edges[:, 1], edges[:, 0])
    turns = np.diff(headings)
    turns = (turns + math.pi) % (2 * math.pi) - math.pi
    signs = np.sign(turns[np.abs(turns) > 1e-12])
    if signs.size and (np.any(signs > 0) and np.any(signs < 0)):
        raise PreconditionError("chain is not convex (mixed turn directions)")
    if np.sum(np.abs(turns)) > math.pi + 1e-9:
        raise PreconditionError("chain is not convex (total turning exceeds "
                                "a straight angle)")
    if np.any(deltas < -1e-12):
        raise PreconditionError("closing angles violate the opening precondition")
    if np.any(deltas > np.abs(turns) + 1e-12):
        raise PreconditionError("opening past straight is not allowed")
    deltas = np.clip(deltas, 0.0, np.abs(turns))
    out = np.empty(n_steps + 1)
    for k in range(n_steps + 1):
        f = k / n_steps
        t = np.sign(turns) * (np.abs(turns) - f * deltas)
        heads = headings[0] + np.concatenate([[0.0], np.cumsum(t)])
        end = pts[0] + np.sum(
            lengths[:, None] * np.stack([np.cos(heads), np.sin(heads)], axis=1),
            axis=0)
        out[k] = norm(end - pts[0])
    return out


def cauchy_arm_check(positions, angle_deltas, n_steps: int = 10) -> bool:
    """True iff the endpoint distance never decreases while the convex chain
    opens by angle_deltas over n_steps increments."""
    d = arm_opening_distances(positions, angle_deltas, n_steps)
    return bool(np.all(np.diff(d) >= -1e-12))


# ---------------------------------------------------------------------------
# randomized lockedness probe


@dataclass(frozen=True, eq=False)
class ProbeReport:
    trials: int
    steps: int
    delta: float
    per_trial: np.ndarray
    max_displacement: float
    locked_consistent: bool


def _nonadjacent_pairs(bars) -> np.ndarray:
    pairs = []
    for a in range(len(bars)):
        for b in range(a + 1, len(bars)):
            if not (set(bars[a]) & set(bars[b])):
                pairs.append((a, b))
    return np.array(pairs, dtype=int).reshape(-1, 2)


def _pair_separations(pos: np.ndarray, bars, pairs: np.ndarray) -> np.ndarray:
    """Distances between the listed bar pairs, vectorized closest-point
    computation; 0 means crossing or touching."""
    if len(pairs) == 0:
        return np.array([np.inf])
    idx = np.asarray(bars, dtype=int)
    a1 = pos[idx[pairs[:, 0], 0]]
    a2 = pos[idx[pairs[:, 0], 1]]
    b1 = pos[idx[pairs[:, 1], 0]]
    b2 = pos[idx[pairs[:, 1], 1]]
    d1 = a2 - a1
    d2 = b2 - b1
    r = a1 - b1
    aa = np.einsum("ij,ij->i", d1, d1)
    ee = np.einsum("ij,ij->i", d2, d2)
    ff = np.einsum("ij,ij->i", d2, r)
    cc = np.einsum("ij,ij->i", d1, r)
    bb = np.einsum("ij,ij->i", d1, d2)
    denom = aa * ee - bb * bb
    s = np.where(np.abs(denom) > 1e-14 * np.maximum(aa * ee, 1e-30),
                 (bb * ff - cc * ee) / np.where(denom == 0, 1.0, denom), 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = np.where(ee > 0, (bb * s + ff) / np.where(ee == 0, 1.0, ee), 0.0)
    t_cl = np.clip(t, 0.0, 1.0)
    s = np.where(t != t_cl, np.clip((bb * t_cl - cc) /
                                    np.where(aa == 0, 1.0, aa), 0.0, 1.0), s)
    pa = a1 + s[:, None] * d1
    pb = b1 + t_cl[:, None] * d2
    return np.hypot(*(pa - pb).T)


def perturb_linkage(l: SelfTouchingLinkage, spec, seed: int = 0,
                    max_attempts: int = 2000) -> SelfTouchingLinkage:
    """Reposition every vertex within delta so the scene becomes strictly
    non-self-touching: wedged vertices move into their admissible cones (at a
    random angle, so collocated host bars are cleared too), hosts back off,
    vertices collocated with others but pushed by neither rule get a random
    kick, everything else jitters.  Rejection-sampled until every contact gap
    and every nonadjacent bar separation clears a floor.  Connections and
    pins are dropped; bar rest lengths are re-measured."""
    delta = spec.delta if isinstance(spec, PerturbationSpec) else float(spec)
    if delta <= 0:
        raise PreconditionError("perturbation delta must be positive")
    rng = np.random.default_rng(seed)
    pairs = _nonadjacent_pairs(l.bars)
    floor = delta / 40.0
    wedge_normals: dict = {}
    host_normals: dict = {}
    for c in l.connections:
        wedge_normals.setdefault(c.wedged, []).append(c.normal(l.vertices))
        host_normals.setdefault(c.host, []).append(c.normal(l.vertices))
    pushed = set(wedge_normals) | set(host_normals)
    dists = np.hypot(*(l.vertices[:, None, :] - l.vertices[None, :, :]).T)
    kicked = [v for v in range(l.n) if v not in pushed
              and np.any(dists[v][np.arange(l.n) != v] < floor)]
    for _ in range(max_attempts):
        pos = l.vertices + rng.uniform(-delta / 20, delta / 20,
                                       size=l.vertices.shape)
        ok = True
        for v, normals in wedge_normals.items():
            d = rot(rng.uniform(-0.7, 0.7)) @ unit(np.sum(normals, axis=0))
            # stay strictly inside the admissible cone
            if any(float(np.dot(d, nv)) < 0.15 for nv in normals):
                ok = False
                break
            pos[v] = pos[v] + (delta / 3.0) * d
        if not ok:
            continue
        for v, normals in host_normals.items():
            pos[v] = pos[v] - (delta / 6.0) * unit(np.sum(normals, axis=0))
        for v in kicked:
            ang = rng.uniform(0.0, 2.0 * math.pi)
            pos[v] = pos[v] + rng.uniform(delta / 8, delta / 4) * \
                np.array([math.cos(ang), math.sin(ang)])
        if np.max(np.hypot(*(pos - l.vertices).T)) > delta:
            continue
        gaps_ok = all(
            float(np.dot(pos[c.wedged] - pos[c.host], c.normal(l.vertices)))
            >= floor for c in l.connections)
        if gaps_ok and _pair_separations(pos, l.bars, pairs).min() >= floor:
            return SelfTouchingLinkage(vertices=pos, bars=l.bars)
    raise EngineError("could not find a non-self-touching perturbation")


def probe_locked(l: SelfTouchingLinkage, trials: int = 100,
                 delta: float = 1e-3, seed: int = 0, steps: int = 120,
                 pinned_bar: int = 0) -> ProbeReport:
    """Randomized evidence probe: constrained random walks try to move any
    vertex far from its start while bar lengths hold exactly and bars stay
    disjoint; one bar stays pinned to the plane.  Reports the largest
    displacement found.  NOT a proof in either direction."""
    if delta <= 0:
        raise PreconditionError("probe delta must be positive")
    if not (0 <= pinned_bar < len(l.bars)):
        raise PreconditionError("pinned bar index out of range")
    pairs = _nonadjacent_pairs(l.bars)
    start = l.vertices.copy()
    if _pair_separations(start, l.bars, pairs).min() <= 1e-12:
        raise PreconditionError(
            "probe needs a strictly non-self-touching scene")
    n = l.n
    pin_i, pin_j = l.bars[pinned_bar]
    pinned_coords = [2 * pin_i, 2 * pin_i + 1, 2 * pin_j, 2 * pin_j + 1]
    rest = np.asarray(l.rest_lengths)
    idx = np.asarray(l.bars, dtype=int)

    def jac(pos):
        rows = np.zeros((len(l.bars) + 4, 2 * n))
        d = pos[idx[:, 0]] - pos[idx[:, 1]]
        for k in range(len(l.bars)):
            i, j = idx[k]
            rows[k, 2 * i:2 * i + 2] = d[k]
            rows[k, 2 * j:2 * j + 2] = -d[k]
        for r, cidx in enumerate(pinned_coords):
            rows[len(l.bars) + r, cidx] = 1.0
        return rows

    def retract(pos):
        # restore bar lengths after a tangent step
        for _ in range(8):
            d = pos[idx[:, 0]] - pos[idx[:, 1]]
            cur = np.hypot(d[:, 0], d[:, 1])
            err = 0.5 * (cur ** 2 - rest ** 2)
            if np.abs(err).max() < 1e-14:
                break
            fix, *_ = np.linalg.lstsq(jac(pos),
                                      np.concatenate([-err, np.zeros(4)]),
                                      rcond=None)
            pos = pos + fix.reshape(n, 2)
        return pos

    per_trial = np.zeros(trials)
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        pos = start.copy()
        best = 0.0
        for _ in range(steps):
            drift = (pos - start).ravel()
            dn = float(np.linalg.norm(drift))
            direction = rng.standard_normal(2 * n)
            if dn > 1e-12:
                # bias outward so escapable scenes drift instead of dithering
                direction += 0.6 * drift / dn
            j = jac(pos)
            coef, *_ = np.linalg.lstsq(j, j @ direction, rcond=None)
            tangent = direction - coef
            tn = np.linalg.norm(tangent)
            if tn < 1e-12:
                continue
            sep = _pair_separations(pos, l.bars, pairs).min()
            h = min(delta, 0.45 * sep)
            cand = retract(pos + (h / tn) * tangent.reshape(n, 2))
            cand[[pin_i, pin_j]] = start[[pin_i, pin_j]]
            if _pair_separations(cand, l.bars, pairs).min() <= 1e-12:
                continue
            pos = cand
            best = max(best, float(np.hypot(*(pos - start).T).max()))
        per_trial[trial] = best
    max_disp = float(per_trial.max()) if trials else 0.0
    return ProbeReport(trials=trials, steps=steps, delta=delta,
                       per_trial=per_trial, max_displacement=max_disp,
                       locked_consistent=max_disp <= 10.0 * delta)


# ---------------------------------------------------------------------------
# the certified scene family


NINE_ROLES = {
    "right_anchor": 0,
    "bottom_wedge": 1,
    "bottom_host": 2,
    "left_wedge": 3,
    "left_host": 4,
    "top_host": 5,
    "top_wedge": 6,
    "outrigger": 7,
    "mast": 8,
}

SEVEN_ROLES = {
    "base_lo": 0,
    "mid_free": 1,
    "base_hi": 2,
    "right_lo": 3,
    "right_hi": 4,
    "fan_a": 5,
    "fan_b": 6,
    "fan_c": 7,
    "spine_lo": 8,
    "spine_hi": 9,
}


def nine_triangle_simplified(apex_deg: float = 60.0) -> SelfTouchingLinkage:
    """Collapsed nine-triangle chain after both simplification rules: a
    doubled two-bar arm pressed into a rigid anchor body at three wedged
    contacts.  Certifiable for apex angles below 90 degrees.

    The left arm appears twice: the wedge copy (indices 3, and 1 at the
    bottom) presses against the host copy (4, 2) from inside, and the host
    arm's far end (6) is wedged back against the anchor body at the top (5).
    The outrigger triangle (5, 7, 8) breaks the mirror symmetry on purpose;
    its placement angle tracks the apex so the top wedge stays inside its
    pocket for every supported angle.
    """
    if not (0.0 < apex_deg < 180.0):
        raise PreconditionError("apex angle must be in (0, 180) degrees")
    half = math.radians(apex_deg) / 2.0
    w, h = math.cos(half), math.sin(half)
    rho = math.radians(135.0 + apex_deg / 4.0)
    pos = np.array([
        [w, h],                                    # 0 right_anchor
        [0.0, 0.0],                                # 1 bottom_wedge
        [0.0, 0.0],                                # 2 bottom_host
        [-w, h],                                   # 3 left_wedge
        [-w, h],                                   # 4 left_host
        [0.0, 2 * h],                              # 5 top_host
        [0.0, 2 * h],                              # 6 top_wedge
        [math.cos(rho), 2 * h + math.sin(rho)],    # 7 outrigger
        [0.0, 2 * h + 0.8],                        # 8 mast
    ])
    bars = (
        (0, 1), (0, 2), (1, 5), (0, 5),            # anchor body + arm tie-down
        (5, 7), (5, 8), (7, 8), (0, 8),            # outrigger + mast closure
        (1, 3), (2, 4), (3, 5), (4, 6),            # the two collocated arms
    )
    conns = (
        Connection(wedged=1, host=2, brace=0, side=1),
        Connection(wedged=1, host=2, brace=4, side=-1),
        Connection(wedged=3, host=4, brace=2, side=1),
        Connection(wedged=3, host=4, brace=6, side=-1),
        Connection(wedged=6, host=5, brace=3, side=-1),
        Connection(wedged=6, host=5, brace=7, side=1),
    )
    return SelfTouchingLinkage(vertices=pos, bars=bars, connections=conns)


def nine_triangle_tight(apex_deg: float = 60.0) -> SelfTouchingLinkage:
    """Nine-triangle scene before simplification: the simplified core plus
    three doubled bars lying in the rule pockets (one rule-1 site between the
    arms, two rule-2 sites at the shared hinges)."""
    core = nine_triangle_simplified(apex_deg)
    pos = core.vertices
    extra = np.array([
        pos[3],  # 9: rule-1 copy of the left arm's upper bar, lower end
        pos[5],  # 10: rule-1 copy, upper end
        pos[7],  # 11: rule-2 copy of the outrigger bar's far end
        pos[3],  # 12: rule-2 copy of the left arm's lower bar, far end
    ])
    bars = core.bars + ((9, 10), (5, 11), (1, 12))
    return SelfTouchingLinkage(vertices=np.vstack([pos, extra]), bars=bars,
                               connections=core.connections)


def seven_triangle_simplified() -> SelfTouchingLinkage:
    """Collapsed seven-triangle chain: three fan apexes collocated at the
    midpoint of a two-bar chain, braced by a right-hand chain and a left
    spine.  Deliberately NOT infinitesimally rigid: the midpoint vertex keeps
    a first-order horizontal motion because no connection ties the fan to it;
    lockedness of this family rests on the convex-arm opening argument
    (cauchy_arm_check), not on a stress certificate.
    """
    s3 = math.sqrt(3.0) / 2.0
    pos = np.array([
        [0.0, 0.0],    # 0 base_lo
        [0.0, 1.0],    # 1 mid_free
        [0.0, 2.0],    # 2 base_hi
        [s3, 0.5],     # 3 right_lo
        [s3, 1.5],     # 4 right_hi
        [0.0, 1.0],    # 5 fan_a
        [0.0, 1.0],    # 6 fan_b
        [0.0, 1.0],    # 7 fan_c
        [-s3, 0.5],    # 8 spine_lo
        [-s3, 1.5],    # 9 spine_hi
    ])
    bars = (
        (0, 1), (1, 2),                    # left two-bar chain
        (0, 3), (3, 4), (4, 2),            # right chain (the opening arm)
        (0, 5), (3, 5),                    # fan legs
        (3, 6), (4, 6),
        (4, 7), (2, 7),
        (0, 8), (1, 8),                    # spine triangles
        (1, 9), (2, 9),
    )
    conns = (
        Connection(wedged=6, host=5, brace=3, side=1),
        Connection(wedged=7, host=6, brace=4, side=1),
    )
    return SelfTouchingLinkage(vertices=pos, bars=bars, connections=conns)


def seven_triangle_tight() -> SelfTouchingLinkage:
    """Seven-triangle scene before simplification: the simplified core plus
    a rule-1 doubled bar over the upper right edge and a rule-2 doubled bar
    sharing the top base vertex."""
    core = seven_triangle_simplified()
    pos = core.vertices
    extra = np.array([
        pos[4],  # 10: rule-1 copy of the upper right edge, lower end
        pos[2],  # 11: rule-1 copy, upper end
        pos[4],  # 12: rule-2 copy sharing base_hi, far end
    ])
    bars = core.bars + ((10, 11), (2, 12))
    return SelfTouchingLinkage(vertices=np.vstack([pos, extra]), bars=bars,
                               connections=core.connections)


def seven_triangle_arm() -> np.ndarray:
    """The braced right chain of the seven-triangle scene, as an open convex
    arc for cauchy_arm_check."""
    s3 = math.sqrt(3.0) / 2.0
    return np.array([[0.0, 0.0], [s3, 0.5], [s3, 1.5], [0.0, 2.0]])
