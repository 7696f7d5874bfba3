"""Dense active-set solver for min ||x||^2 under linear constraints.

Small problems only (a few dozen variables): the expansive-velocity step
needs the exact minimum-norm point of a polyhedron whose vertex count is
tiny, and generic QP packages are a heavy dependency for that.  The
objective is strictly convex, so the optimum is unique and the usual
primal active-set iteration terminates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EngineError


@dataclass(frozen=True)
class QPResult:
    x: np.ndarray
    active: tuple        # indices into the inequality rows
    n_iter: int
    objective: float


def _min_norm_subject_to(C: np.ndarray, d: np.ndarray) -> np.ndarray:
    if C.shape[0] == 0:
        return np.zeros(C.shape[1])
    return np.linalg.lstsq(C, d, rcond=None)[0]


def min_norm_qp(A_eq, b_eq, G, h, x0, feas_tol: float = 1e-8,
                opt_tol: float = 1e-10, max_iter: int = 0) -> QPResult:
    """minimize ||x||^2  s.t.  A_eq x = b_eq,  G x >= h, from feasible x0."""
    A_eq = np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.atleast_1d(np.asarray(b_eq, float))
    G = np.atleast_2d(np.asarray(G, float))
    h = np.atleast_1d(np.asarray(h, float))
    x = np.asarray(x0, float).copy()
    n = x.size
    if A_eq.size == 0:
        A_eq = np.zeros((0, n))
        b_eq = np.zeros(0)
    if G.size == 0:
        G = np.zeros((0, n))
        h = np.zeros(0)
    m = G.shape[0]
    if not max_iter:
        max_iter = 30 * (m + A_eq.shape[0] + 2)

    slack = G @ x - h if m else np.zeros(0)
    if (slack < -feas_tol).any() or \
            (A_eq.size and np.abs(A_eq @ x - b_eq).max() > feas_tol):
        raise EngineError("QP start point is infeasible")

    # start with no inequality rows: blocking steps admit rows one at a
    # time, so the working set stays independent even when x0 is a vertex
    # where many near-dependent rows are simultaneously tight
    work: set = set()
    seen = set()

    for it in range(1, max_iter + 1):
        rows = sorted(work)
        C = np.vstack([A_eq, G[rows]]) if rows else A_eq
        d = np.concatenate([b_eq, h[rows]]) if rows else b_eq
        x_new = _min_norm_subject_to(C, d)
        p = x_new - x

        if np.linalg.norm(p) <= opt_tol * max(1.0, np.linalg.norm(x)):
            if not rows:
                return QPResult(x, (), it, float(x @ x))
            # multipliers: x = A_eq^T nu + G_W^T lam
            M = np.vstack([A_eq, G[rows]]).T
            mult = np.linalg.lstsq(M, x, rcond=None)[0]
            lam = mult[A_eq.shape[0]:]
            worst = int(np.argmin(lam))
            if lam[worst] >= -opt_tol:
                return QPResult(x, tuple(rows), it, float(x @ x))
            key = frozenset(rows)
            if key in seen:
                # anti-cycling: drop the lowest-index negative multiplier
                neg = [k for k, lm in enumerate(lam) if lm < -opt_tol]
                worst = neg[0]
            seen.add(key)
            work.discard(rows[worst])
            continue

        # longest step keeping every inactive inequality satisfied
        alpha, blocker = 1.0, None
        for k in range(m):
            if k in work:
                continue
            gp = G[k] @ p
            if gp < -1e-13:
                # rows fp-slightly violated at x step with alpha 0
                ak = max((h[k] - G[k] @ x) / gp, 0.0)
                if ak < alpha:
                    alpha, blocker = ak, k
        x = x + alpha * p
        if blocker is not None:
            work.add(blocker)

    raise EngineError(f"QP did not converge in {max_iter} iterations")
