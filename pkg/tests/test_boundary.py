import heapq
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from morselab.boundary import (
    boundary_proxy,
    capacity_dim_estimate,
    chain_visual_metric,
    cover_multiplicity_at_scale,
    epsilon_max,
    epsilon_prime,
    four_point_delta,
    gromov_products,
    product_comparison,
    quasi_symmetry_samples,
)
from morselab.cayley import build_ball, sphere
from morselab.errors import InputError
from morselab.morse import GaugeSchedule, GaugeTable, build_stratum
from morselab.presentations import GroupSpec


def brute_delta(P):
    """Four-point delta straight from the definition, on doubled products."""
    n = len(P)
    worst = 0
    for x, y, z in itertools.product(range(n), repeat=3):
        worst = max(worst, min(P[x][z], P[z][y]) - P[x][y])
    return Fraction(worst, 2)


def dijkstra_chains(rho):
    n = len(rho)
    out = np.zeros((n, n))
    for s in range(n):
        best = [math.inf] * n
        best[s] = 0.0
        heap = [(0.0, s)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > best[v]:
                continue
            for u in range(n):
                if u != v and d + rho[v][u] < best[u]:
                    best[u] = d + rho[v][u]
                    heapq.heappush(heap, (best[u], u))
        out[s] = best
    return out


class TestGromovProducts:
    @pytest.mark.parametrize("x,y,want", [("aa", "bb", 0), ("aab", "aaB", 2), ("aa", "aab", 2)])
    def test_tree(self, free_ball8, x, y, want):
        P = gromov_products(free_ball8, [free_ball8.vertex(x), free_ball8.vertex(y)])
        assert P.product(0, 1) == want

    def test_lattice(self, zz_ball8):
        P = gromov_products(zz_ball8, [zz_ball8.vertex("aa"), zz_ball8.vertex("bb")])
        assert P.product(0, 1) == 0

    def test_tree_matches_prefix_oracle(self, free_ball8):
        pts = sphere(free_ball8, 3)
        P = gromov_products(free_ball8, pts)
        for i, j in itertools.combinations(range(len(pts)), 2):
            u, v = free_ball8.label(pts[i]), free_ball8.label(pts[j])
            prefix = len(u) - (oracles.tree_distance(u, v) // 2)
            assert P.product(i, j) == prefix

    def test_half_integers(self, p3_ball8):
        pts = sphere(p3_ball8, 3)[:30] + sphere(p3_ball8, 2)[:10]
        P = gromov_products(p3_ball8, pts)
        assert P.doubled.dtype.kind == "i"
        assert np.array_equal(P.values * 2, P.doubled)


class TestFourPoint:
    def test_tree_sphere_is_zero(self, free2):
        ball = build_ball(free2, 5)
        assert four_point_delta(gromov_products(ball, sphere(ball, 5))) == 0

    def test_single_point(self, p3_ball4):
        assert four_point_delta(gromov_products(p3_ball4, [3])) == 0

    def test_matches_definition(self, p3_ball8):
        pts = sphere(p3_ball8, 4)[::9]
        P = gromov_products(p3_ball8, pts)
        assert four_point_delta(P) == brute_delta(P.doubled.tolist())

    def test_lattice_positive(self, zz_ball8):
        P = gromov_products(zz_ball8, sphere(zz_ball8, 4))
        got = four_point_delta(P)
        assert got == brute_delta(P.doubled.tolist()) and got > 0


class TestEpsilonMax:
    def test_zero(self):
        assert epsilon_max(0) == 1.0
        assert epsilon_max(0, default=0.25) == 0.25

    def test_calibrated(self):
        assert epsilon_max(math.log(math.sqrt(2)) / 2) == pytest.approx(1.0, abs=1e-9)

    def test_decreasing(self):
        vals = [epsilon_max(Fraction(k, 2)) for k in range(1, 20)]
        assert all(a > b > 0 for a, b in zip(vals, vals[1:]))

    def test_boundary_condition(self):
        for d in (Fraction(1, 2), 1, 3):
            assert epsilon_prime(d, epsilon_max(d)) == pytest.approx(math.sqrt(2) - 1, abs=1e-9)

    def test_negative(self):
        with pytest.raises(InputError):
            epsilon_max(-1)


class TestChainMetric:
    def test_two_points(self, p3_ball8):
        proxy = boundary_proxy(p3_ball8, sphere(p3_ball8, 4)[:2], 0.2)
        m = chain_visual_metric(proxy)
        assert m.d[0, 1] <= proxy.rho[0, 1] + 1e-9

    def test_tree_equals_rho(self, free2):
        ball = build_ball(free2, 6)
        proxy = boundary_proxy(ball, sphere(ball, 6), 0.3)
        m = chain_visual_metric(proxy)
        off = ~np.eye(len(proxy.points), dtype=bool)
        assert m.delta == 0 and m.eps_prime == 0 and m.ok
        assert np.abs(m.d - proxy.rho)[off].max() <= 1e-9

    def test_matches_dijkstra(self, p3_ball8):
        pts = sphere(p3_ball8, 4)[::5]
        delta = four_point_delta(gromov_products(p3_ball8, pts))
        proxy = boundary_proxy(p3_ball8, pts, 0.5 * epsilon_max(delta))
        m = chain_visual_metric(proxy)
        want = dijkstra_chains(proxy.rho.tolist())
        assert np.abs(m.d - want).max() <= 1e-9

    def test_bounds_at_ninety_percent(self, p3_ball8):
        pts = sphere(p3_ball8, 4)
        delta = four_point_delta(gromov_products(p3_ball8, pts))
        m = chain_visual_metric(boundary_proxy(p3_ball8, pts, 0.9 * epsilon_max(delta)))
        assert m.ok
        d = m.d
        n = len(pts)
        for i, j, k in itertools.product(range(0, n, 7), repeat=3):
            assert d[i, j] <= d[i, k] + d[k, j] + 1e-9

    def test_epsilon_too_large(self, zz_ball8):
        pts = sphere(zz_ball8, 4)
        delta = four_point_delta(gromov_products(zz_ball8, pts))
        with pytest.raises(InputError, match="epsilon_max"):
            chain_visual_metric(boundary_proxy(zz_ball8, pts, 2 * epsilon_max(delta)))

    def test_nonpositive_epsilon(self, zz_ball8):
        with pytest.raises(InputError):
            boundary_proxy(zz_ball8, [1, 2], 0.0)


class TestProductComparison:
    def test_same_stratum(self, free_ball8):
        st = build_stratum(free_ball8, GaugeTable.constant(GaugeSchedule(((1, 0),)), 0))
        rep = product_comparison(free_ball8, st, st)
        assert rep.equal and rep.max_difference == 0

    def test_edge_plus_vertex(self):
        spec = GroupSpec.raag(3, [("a", "b")])
        ball = build_ball(spec, 8)
        sched = GaugeSchedule(((1, 0),))
        small = build_stratum(ball, GaugeTable.constant(sched, 0))
        large = build_stratum(ball, GaugeTable.constant(sched, 2))
        assert len(small) < len(large)
        rep = product_comparison(ball, small, large, n30_large=5)
        assert rep.equal and rep.documented_bound == 160
        assert set(rep.common) == set(small.members)

    def test_not_nested(self, zz_ball8):
        with pytest.raises(InputError):
            product_comparison(zz_ball8, [1, 2, 3], [1, 2])


class TestQuasiSymmetry:
    def test_identity(self):
        rng = np.random.default_rng(0)
        pts = rng.random((6, 2))
        dA = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
        q = quasi_symmetry_samples(dA, dA)
        assert q.c == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(q.samples[:, 0], q.samples[:, 1])

    def test_square(self, free2):
        ball = build_ball(free2, 4)
        proxy = boundary_proxy(ball, sphere(ball, 4)[:20], 0.5)
        dA = chain_visual_metric(proxy).d
        q = quasi_symmetry_samples(dA, dA ** 2, exponent=2)
        assert q.c == pytest.approx(1.0, abs=1e-9)
        assert len(q.samples) == 20 * 19 * 18

    def test_duplicates_rejected(self):
        with pytest.raises(InputError):
            quasi_symmetry_samples(np.zeros((3, 3)), np.zeros((3, 3)))


def line_metric(n, spacing=1.0):
    x = np.arange(n) * spacing
    return np.abs(x[:, None] - x[None, :])


class TestCapacityDim:
    def test_separated(self):
        metric = 10 * (1 - np.eye(5))
        m, certs = capacity_dim_estimate(metric, [1.0, 5.0])
        assert m == 0 and all(len(c.cover) == 5 for c in certs)

    def test_tree_proxy(self, free2):
        ball = build_ball(free2, 6)
        proxy = boundary_proxy(ball, sphere(ball, 6), 0.5)
        d = chain_visual_metric(proxy).d
        scales = sorted({float(x) for x in np.unique(np.round(d, 12)) if x > 0})
        m, certs = capacity_dim_estimate(d, scales)
        assert m == 0
        assert all(c.verify(d) for c in certs)

    def test_collinear(self):
        metric = line_metric(5, 3.0)
        m, certs = capacity_dim_estimate(metric, [6.0])
        assert m == 1 and certs[0].verify(metric)

    def test_certificates_recompute(self, p3_ball8):
        pts = sphere(p3_ball8, 3)
        d = chain_visual_metric(boundary_proxy(p3_ball8, pts, 0.15)).d
        _, certs = capacity_dim_estimate(d, [0.2, 0.5, 1.0])
        for c in certs:
            assert c.verify(d) and c.mesh <= c.scale + 1e-9
        bad = certs[0]
        bad.multiplicity += 1
        assert not bad.verify(d)

    def test_empty(self):
        with pytest.raises(InputError):
            capacity_dim_estimate(np.zeros((0, 0)), [1.0])


class TestCoverMultiplicity:
    def test_single_point(self):
        assert cover_multiplicity_at_scale(np.zeros((1, 1)), 1.0, 10) == 0

    def test_segment(self):
        assert cover_multiplicity_at_scale(line_metric(40), 1.0, 10) == 1

    def test_square_patch(self):
        pts = np.array([(x, y) for x in range(30) for y in range(30)])
        linf = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2).astype(float)
        assert cover_multiplicity_at_scale(linf, 1.0, 10) == 3

    def test_empty(self):
        with pytest.raises(InputError):
            cover_multiplicity_at_scale(np.zeros((0, 0)), 1.0, 1.0)
