"""Chains: overlap validation, discrete expansion, four-disk rearrangement."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import (
    disks_intersection_margin,
    grid_disks_intersection_nonempty,
    shapely_overlap_area,
    shapely_sign,
)

from adornchain.adornment import (
    Adornment,
    ArcPath,
    isosceles_adornment,
    lens_of,
    max_slender,
)
from adornchain.chain import (
    AdornedChain,
    Configuration,
    OverlapReport,
    disks_common_intersection_empty,
    is_expansion,
    kirszbraun_preserves_empty,
    make_chain,
    validate,
    verify_symmetric_expansion,
)
from adornchain.errors import GeometryError, PreconditionError
from adornchain.geom import DEFAULT_TOL, Disk, Segment, rot, vec

# ---------------------------------------------------------------------------
# oracles first: the grid search must reproduce known emptiness facts before
# it referees anything


def test_grid_oracle_reproduces_disk_trivials():
    far = [Disk(vec(0, 0), 1.0), Disk(vec(3, 0), 1.0)]
    near = [Disk(vec(0, 0), 1.0), Disk(vec(1, 0), 1.0)]
    assert not grid_disks_intersection_nonempty(far)
    assert grid_disks_intersection_nonempty(near)
    assert disks_intersection_margin(far) < -2e-3
    assert disks_intersection_margin(near) > 2e-3


# ---------------------------------------------------------------------------
# adorner helpers used across the scenes


def crescent(L):
    return max_slender(vec(0, 0), vec(L, 0)).adornment()


def sym_lens_adorner(hfrac):
    def make(L):
        return lens_of(vec(0, 0), vec(L, 0), vec(L / 2, hfrac * L)).adornment()
    return make


def half_lens_adornment(L, side, hfrac=0.5):
    """One-sided lens: curved on `side`, flat on the other."""
    ln = lens_of(vec(0, 0), vec(L, 0), vec(L / 2, hfrac * L))
    base = Segment(vec(0, 0), vec(L, 0))
    flat = ArcPath([Segment(vec(0, 0), vec(L, 0))])
    curved = ArcPath(ln.side_prims(side))
    if side == 1:
        return Adornment(base, curved, flat)
    return Adornment(base, flat, curved)


def half_crescent_adorner(side):
    def make(L):
        ln = max_slender(vec(0, 0), vec(L, 0))
        base = Segment(vec(0, 0), vec(L, 0))
        flat = ArcPath([Segment(vec(0, 0), vec(L, 0))])
        curved = ArcPath(ln.side_prims(side))
        if side == 1:
            return Adornment(base, curved, flat)
        return Adornment(base, flat, curved)
    return make


# ---------------------------------------------------------------------------
# construction


class TestConstruction:
    def test_make_open_chain(self):
        chain, c = make_chain([(0, 0), (1, 0), (2, 1)], closed=False)
        assert chain.n_edges == 2 and not chain.closed
        assert chain.edges == ((0, 1), (1, 2))
        assert np.allclose(c.edge_lengths(chain), chain.rest_lengths())

    def test_make_closed_chain(self):
        chain, c = make_chain([(0, 0), (1, 0), (1, 1), (0, 1)], closed=True)
        assert chain.n_edges == 4
        assert chain.edges[-1] == (3, 0)
        assert validate(chain, c).clean

    def test_adjacency(self):
        chain, _ = make_chain([(0, 0), (1, 0), (2, 0), (3, 0)], closed=False)
        assert chain.adjacent(0, 1)
        assert not chain.adjacent(0, 2)
        closed, _ = make_chain([(0, 0), (1, 0), (1, 1)], closed=True)
        assert closed.adjacent(0, 2)

    def test_bad_edges_rejected(self):
        ad = crescent(1.0)
        with pytest.raises(GeometryError):
            AdornedChain(3, False, ((0, 1),), (ad,))
        with pytest.raises(GeometryError):
            AdornedChain(3, False, ((0, 1), (2, 1)), (ad, ad))
        with pytest.raises(GeometryError):
            AdornedChain(3, False, ((0, 1), (1, 2)), (ad,))

    def test_bad_positions_rejected(self):
        with pytest.raises(GeometryError):
            Configuration([(0, 0, 0), (1, 1, 1)])
        with pytest.raises(GeometryError):
            Configuration([(0, 0), (np.nan, 1)])


# ---------------------------------------------------------------------------
# validate


class TestValidate:
    def test_straight_chain_with_max_crescents_clean(self):
        pts = [(0, 0), (1, 0), (2, 0), (3, 0)]
        chain, c = make_chain(pts, closed=False, adorners=[crescent] * 3)
        regions = chain.edge_regions(c)
        for k1 in range(3):
            for k2 in range(k1 + 1, 3):
                assert shapely_sign(regions[k1], regions[k2]) != -1
        rep = validate(chain, c)
        assert rep.clean
        assert rep.pairs == () and rep.base_crossings == ()

    def test_straight_chain_alternating_half_crescents_clean(self):
        pts = [(0, 0), (1, 0), (2, 0), (3, 0)]
        adorners = [half_crescent_adorner(s) for s in (1, -1, 1)]
        chain, c = make_chain(pts, closed=False, adorners=adorners)
        regions = chain.edge_regions(c)
        for k1 in range(3):
            for k2 in range(k1 + 1, 3):
                assert shapely_sign(regions[k1], regions[k2]) != -1
        assert validate(chain, c).clean

    def test_crossing_bars_flagged(self):
        chain, c = make_chain([(0, 0), (2, 0), (2, 1), (0, -1)], closed=False)
        rep = validate(chain, c)
        assert not rep.clean
        assert (0, 2) in rep.base_crossings

    def test_folded_flat_collinear_overlap_flagged(self):
        chain, c = make_chain([(0, 0), (1, 0), (0.3, 0)], closed=False)
        rep = validate(chain, c)
        assert not rep.clean
        assert (0, 1) in rep.base_crossings

    def test_wrong_edge_length_flagged(self):
        chain, c = make_chain([(0, 0), (1, 0), (2, 0)], closed=False)
        c2 = Configuration([(0, 0), (1, 0), (2.5, 0)])
        rep = validate(chain, c2)
        assert not rep.clean
        assert rep.length_violations[0][0] == 1
        assert rep.length_violations[0][1] == pytest.approx(1.5)

    def test_nonadjacent_lens_overlap_reported(self):
        # third bar swings back over the first; fat lenses collide
        pts = [(0, 0), (2, 0), (2, 1), (0.3, 0.2)]
        chain, c = make_chain(pts, closed=False,
                              adorners=[sym_lens_adorner(0.35)] * 3)
        regs = chain.edge_regions(c)
        assert shapely_overlap_area(regs[0], regs[2]) > 1e-3
        rep = validate(chain, c)
        assert not rep.clean
        flagged = {(k1, k2) for k1, k2, _ in rep.pairs}
        assert (0, 2) in flagged
        depth = [d for k1, k2, d in rep.pairs if (k1, k2) == (0, 2)][0]
        assert depth > DEFAULT_TOL.eps_overlap

    def test_sharp_hinge_adjacent_overlap_reported(self):
        pts = [(0, 0), (2, 0), (0.3, 0.75)]
        chain, c = make_chain(pts, closed=False,
                              adorners=[sym_lens_adorner(0.4)] * 2)
        regs = chain.edge_regions(c)
        assert shapely_overlap_area(regs[0], regs[1]) > 1e-3
        rep = validate(chain, c)
        assert not rep.clean
        assert {(k1, k2) for k1, k2, _ in rep.pairs} == {(0, 1)}

    def test_vertex_count_mismatch_raises(self):
        chain, _ = make_chain([(0, 0), (1, 0), (2, 0)], closed=False)
        with pytest.raises(GeometryError):
            validate(chain, Configuration([(0, 0), (1, 0)]))

    @settings(max_examples=25, deadline=None)
    @given(theta=st.floats(-np.pi, np.pi),
           tx=st.floats(-5, 5), ty=st.floats(-5, 5))
    def test_validate_rigid_motion_invariant(self, theta, tx, ty):
        pts = np.array([(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.3, 0.2)])
        adorners = [sym_lens_adorner(0.35)] * 3
        chain, c = make_chain(pts, closed=False, adorners=adorners)
        rep0 = validate(chain, c)
        moved = pts @ rot(theta).T + np.array([tx, ty])
        chain2, c2 = make_chain(moved, closed=False, adorners=adorners)
        rep1 = validate(chain2, c2)
        assert rep0.clean == rep1.clean
        assert rep0.base_crossings == rep1.base_crossings
        assert [(k1, k2) for k1, k2, _ in rep0.pairs] == \
               [(k1, k2) for k1, k2, _ in rep1.pairs]
        for (_, _, d0), (_, _, d1) in zip(rep0.pairs, rep1.pairs):
            assert d0 == pytest.approx(d1, abs=1e-7)


# ---------------------------------------------------------------------------
# discrete expansion predicate


class TestIsExpansion:
    def test_identity(self):
        c = Configuration([(0, 0), (1, 0), (2, 0)])
        assert is_expansion(c, c).is_expansion

    def test_uniform_scale(self):
        p = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (-1.0, 0.5)])
        assert is_expansion(Configuration(p), Configuration(1.1 * p)).is_expansion
        assert not is_expansion(Configuration(p), Configuration(0.9 * p)).is_expansion

    def test_l_fold_shrinks_and_witness_rechecks(self):
        c0 = Configuration([(0, 0), (1, 0), (2, 0)])
        c1 = Configuration([(0, 0), (1, 0), (1, 1)])
        rep = is_expansion(c0, c1)
        assert not rep.is_expansion
        (i, j), old, new = rep.worst_pair
        assert (i, j) == (0, 2)
        assert old == pytest.approx(2.0)
        assert new == pytest.approx(np.sqrt(2.0))
        p0, p1 = c0.positions, c1.positions
        assert np.hypot(*(p0[j] - p0[i])) == pytest.approx(old)
        assert np.hypot(*(p1[j] - p1[i])) == pytest.approx(new)

    def test_reflexive_and_composes_on_random_triples(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            p0 = rng.uniform(-2, 2, (5, 2))
            c0 = Configuration(p0)
            assert is_expansion(c0, c0).is_expansion
            s1, s2 = 1 + rng.uniform(0, 0.5, 2)
            r1, r2 = rng.uniform(-np.pi, np.pi, 2)
            p1 = (s1 * p0) @ rot(r1).T + rng.uniform(-1, 1, 2)
            p2 = (s2 * p1) @ rot(r2).T + rng.uniform(-1, 1, 2)
            c1, c2 = Configuration(p1), Configuration(p2)
            assert is_expansion(c0, c1).is_expansion
            assert is_expansion(c1, c2).is_expansion
            assert is_expansion(c0, c2).is_expansion

    def test_mismatch_raises(self):
        with pytest.raises(GeometryError):
            is_expansion(Configuration([(0, 0), (1, 0)]),
                         Configuration([(0, 0), (1, 0), (2, 0)]))


# ---------------------------------------------------------------------------
# four-disk rearrangement predicate


class TestKirszbraun:
    def test_square_corner_disks_example(self):
        before = [Disk(vec(x, y), 1.0) for x, y in
                  [(0, 0), (10, 0), (10, 10), (0, 10)]]
        targets = [vec(x, y) for x, y in [(0, 0), (12, 0), (12, 12), (0, 12)]]
        assert disks_common_intersection_empty(before)
        assert not grid_disks_intersection_nonempty(before, res=1e-2)
        assert kirszbraun_preserves_empty(before, targets)

    def test_vacuous_when_intersection_nonempty(self):
        before = [Disk(vec(0, 0), 1.0), Disk(vec(0.5, 0), 1.0),
                  Disk(vec(0, 0.5), 1.0), Disk(vec(0.5, 0.5), 1.0)]
        assert not disks_common_intersection_empty(before)
        targets = [2 * d.center for d in before]
        assert kirszbraun_preserves_empty(before, targets)

    def test_shrinking_pair_raises(self):
        before = [Disk(vec(0, 0), 1.0), Disk(vec(4, 0), 1.0)]
        with pytest.raises(PreconditionError):
            kirszbraun_preserves_empty(before, [vec(0, 0), vec(3, 0)])

    def test_mismatched_targets_raise(self):
        with pytest.raises(GeometryError):
            kirszbraun_preserves_empty([Disk(vec(0, 0), 1.0)], [])

    def test_random_families_agree_with_grid_oracle(self):
        rng = np.random.default_rng(2026)
        done = empties = 0
        while done < 200:
            centers = rng.uniform(0, 2.2, (4, 2))
            radii = rng.uniform(0.4, 1.0, 4)
            before = [Disk(vec(*ct), r) for ct, r in zip(centers, radii)]
            if abs(disks_intersection_margin(before)) < 2e-3:
                continue
            s = 1.0 + rng.uniform(0, 0.35)
            ax = 1.0 + rng.uniform(0, 0.3)
            cen = centers.mean(axis=0)
            tgt = (centers - cen) * s
            tgt[:, 0] *= ax
            tgt = tgt + cen
            after = [Disk(vec(*ct), r) for ct, r in zip(tgt, radii)]
            if abs(disks_intersection_margin(after)) < 2e-3:
                continue
            for disks in (before, after):
                exact_empty = disks_common_intersection_empty(disks)
                assert exact_empty == (not grid_disks_intersection_nonempty(disks))
            assert kirszbraun_preserves_empty(
                before, [d.center for d in after])
            empties += disks_common_intersection_empty(before)
            done += 1
        # the sample must actually exercise the nontrivial branch
        assert empties >= 30


# ---------------------------------------------------------------------------
# theorem-level verifier


def zigzag_points(n_bars, amp_deg):
    headings = np.radians([amp_deg if k % 2 == 0 else -amp_deg
                           for k in range(n_bars)])
    pts = [np.zeros(2)]
    for h in headings:
        pts.append(pts[-1] + np.array([np.cos(h), np.sin(h)]))
    return np.array(pts)


class TestVerifySymmetricExpansion:
    def test_zigzag_straightening_is_clean(self):
        p_from = zigzag_points(4, 20.0)
        p_to = np.array([(float(k), 0.0) for k in range(5)])
        adorners = [sym_lens_adorner(0.3)] * 4
        chain, c_from = make_chain(p_from, closed=False, adorners=adorners)
        c_to = Configuration(p_to)
        regs = chain.edge_regions(c_to)
        for k1 in range(4):
            for k2 in range(k1 + 1, 4):
                assert shapely_sign(regs[k1], regs[k2]) != -1
        rep = verify_symmetric_expansion(chain, c_from, c_to)
        assert rep.clean
        assert rep.diagnostics == ()

    def test_identity_on_clean_scene_is_clean(self):
        pts = zigzag_points(3, 15.0)
        chain, c = make_chain(pts, closed=False,
                              adorners=[sym_lens_adorner(0.25)] * 3)
        assert verify_symmetric_expansion(chain, c, c).clean

    def test_rejects_non_slender_adornment(self):
        def sharp(L):
            return isosceles_adornment(vec(0, 0), vec(L, 0), np.radians(60.0),
                                       symmetric=True)
        chain, c = make_chain([(0, 0), (1, 0)], closed=False, adorners=[sharp])
        with pytest.raises(PreconditionError, match="slender"):
            verify_symmetric_expansion(chain, c, c)

    def test_rejects_non_symmetric_adornment(self):
        def lopsided(L):
            return half_lens_adornment(L, side=1, hfrac=0.3)
        chain, c = make_chain([(0, 0), (1, 0)], closed=False,
                              adorners=[lopsided])
        with pytest.raises(PreconditionError, match="symmetric"):
            verify_symmetric_expansion(chain, c, c)

    def test_rejects_unclean_start(self):
        pts = [(0, 0), (2, 0), (2, 1), (0, -1)]
        chain, c = make_chain(pts, closed=False,
                              adorners=[sym_lens_adorner(0.1)] * 3)
        with pytest.raises(PreconditionError, match="clean"):
            verify_symmetric_expansion(chain, c, c)

    def test_rejects_non_expansion(self):
        chain, c0 = make_chain([(0, 0), (1, 0), (2, 0)], closed=False,
                               adorners=[sym_lens_adorner(0.2)] * 2)
        c1 = Configuration([(0, 0), (1, 0), (1, 1)])
        with pytest.raises(PreconditionError, match="expansion"):
            verify_symmetric_expansion(chain, c0, c1)

    def test_report_type(self):
        chain, c = make_chain([(0, 0), (1, 0)], closed=False,
                              adorners=[sym_lens_adorner(0.2)])
        rep = verify_symmetric_expansion(chain, c, c)
        assert isinstance(rep, OverlapReport)
