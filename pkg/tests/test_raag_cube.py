import io
import itertools
import json
from collections import Counter

import pytest

import oracles
from morselab.cayley import build_ball, geodesics_between
from morselab.errors import InputError
from morselab.morse import GaugeSchedule, GaugeTable, build_stratum
from morselab.presentations import GroupSpec
from morselab.raag_cube import (
    build_hyperplanes,
    contact_graph,
    distance3_check,
    embedding_report,
    export_contact_json,
    q_map,
    separated_chain,
    strongly_separated,
    wall_sequence,
)

P3_EDGES = {frozenset("ab"), frozenset("bc")}


def edge_key(walls, k):
    ball = walls.ball
    return ball.label(int(walls.src[k])), ball.spec.generators[int(walls.gen[k])]


def partition(walls):
    groups = {}
    for k, w in enumerate(walls.wall_of.tolist()):
        groups.setdefault(w, set()).add(edge_key(walls, k))
    return {frozenset(g) for g in groups.values()}


def oracle_crossings(gens, edges, radius):
    """Wall pairs crossing in some square, plus the walls, via the oracle."""
    classes, verts = oracles.raag_walls(gens, edges, radius)
    wall = {e: i for i, c in enumerate(classes) for e in c}
    cross = set()
    for v in verts:
        for s, t in itertools.combinations(gens, 2):
            if frozenset((s, t)) not in edges:
                continue
            vs, vt = (oracles.raag_canonical(v + x, edges) for x in (s, t))
            vst = oracles.raag_canonical(v + s + t, edges)
            if {vs, vt, vst} <= verts:
                cross.add(frozenset((wall[(v, s)], wall[(v, t)])))
    return classes, verts, wall, cross


@pytest.fixture(scope="module")
def p3_walls(p3_ball8):
    walls = build_hyperplanes(p3_ball8)
    return walls, contact_graph(walls)


@pytest.fixture(scope="module")
def p3_small(p3):
    walls = build_hyperplanes(build_ball(p3, 3))
    return walls, contact_graph(walls)


class TestWalls:
    def test_grid_rows(self, zz):
        walls = build_hyperplanes(build_ball(zz, 3))
        a_walls = [h for h in walls.walls if walls.type_name(h.id) == "a"]
        # an a-wall is the column of a-edges over one x-interval
        xs = Counter()
        for h in a_walls:
            starts = {oracles.exponent_vector(walls.ball.label(int(walls.src[k])), "ab")[0]
                      for k in h.edges}
            assert len(starts) == 1
            xs[starts.pop()] += 1
        assert sorted(xs) == [-3, -2, -1, 0, 1, 2] and set(xs.values()) == {1}

    def test_tree_edges_are_walls(self, free2):
        walls = build_hyperplanes(build_ball(free2, 4))
        assert len(walls) == len(walls.src)
        assert all(len(h.edges) == 1 for h in walls.walls)

    def test_p3_against_oracle(self, p3_small):
        walls, _ = p3_small
        classes, _ = oracles.raag_walls("abc", P3_EDGES, 3)
        assert partition(walls) == set(classes)

    def test_partition_and_labels(self, p3_walls):
        walls, _ = p3_walls
        seen = sorted(k for h in walls.walls for k in h.edges)
        assert seen == list(range(len(walls.src)))
        for h in walls.walls:
            assert {int(walls.gen[k]) for k in h.edges} == {h.gen}

    def test_interior_flag(self, p3_walls):
        walls, _ = p3_walls
        ball = walls.ball
        for h in walls.walls:
            touches = any(ball.dist[walls.src[k]] == ball.radius or ball.dist[walls.dst[k]] == ball.radius
                          for k in h.edges)
            assert h.interior == (not touches)

    def test_non_raag(self, surface_ball4):
        with pytest.raises(InputError):
            build_hyperplanes(surface_ball4)


class TestContact:
    def test_tree_shared_vertices(self, free2):
        walls = build_hyperplanes(build_ball(free2, 3))
        cg = contact_graph(walls)
        assert not cg.crossing
        for a, b in itertools.combinations(range(len(walls)), 2):
            ea, eb = walls.walls[a].edges[0], walls.walls[b].edges[0]
            share = bool({walls.src[ea], walls.dst[ea]} & {walls.src[eb], walls.dst[eb]})
            assert cg.contact(a, b) == share

    def test_grid_square_crosses(self, zz_ball8):
        walls = build_hyperplanes(zz_ball8)
        cg = contact_graph(walls)
        for row in walls.squares[:50]:
            ws = {int(walls.wall_of[k]) for k in row}
            assert len(ws) == 2
            a, b = sorted(ws)
            assert cg.crosses(a, b) and cg.contact(a, b)

    def test_p3_crossings_against_oracle(self, p3_small):
        walls, cg = p3_small
        classes, _, wall, cross = oracle_crossings("abc", P3_EDGES, 3)
        to_lib = {}
        for k in range(len(walls.src)):
            to_lib[wall[edge_key(walls, k)]] = int(walls.wall_of[k])
        want = {frozenset(to_lib[i] for i in pair) for pair in cross}
        got = {frozenset(p) for p in cg.crossing}
        assert got == want

    def test_crossing_within_contact(self, p3_walls):
        _, cg = p3_walls
        for a, b in cg.crossing:
            assert cg.contact(a, b)
        assert (cg.adjacency != cg.adjacency.T).nnz == 0
        assert cg.adjacency.diagonal().sum() == 0

    def test_json_export(self, p3_small):
        walls, cg = p3_small
        buf = io.StringIO()
        export_contact_json(walls, cg, buf)
        doc = json.loads(buf.getvalue())
        assert len(doc["walls"]) == len(walls)
        assert sum(e["crossing"] for e in doc["edges"]) == len(cg.crossing)


class TestStrongSeparation:
    def test_grid_parallel(self, zz_ball8):
        walls = build_hyperplanes(zz_ball8)
        cg = contact_graph(walls)
        ball = zz_ball8
        w1 = int(walls.wall_of[walls.edge_at(0, 0)])
        w2 = int(walls.wall_of[walls.edge_at(ball.vertex("a"), 0)])
        assert not strongly_separated(walls, cg, w1, w2)[0]

    def test_tree_always(self, free2):
        walls = build_hyperplanes(build_ball(free2, 4))
        cg = contact_graph(walls)
        for a, b in itertools.combinations(range(0, len(walls), 5), 2):
            assert strongly_separated(walls, cg, a, b)[0]

    def test_p3_far_pairs(self, p3_walls):
        walls, cg = p3_walls
        # every P3 wall reaches the sphere, so scan all of them (validity is
        # then False, but nothing inside the ball may contradict separation)
        assert not any(h.interior for h in walls.walls)
        ids = list(range(0, len(walls), 11))
        D = cg.distances_from(ids)
        checked = 0
        for i, a in enumerate(ids):
            for b in range(len(walls)):
                if D[i, b] >= 3:
                    assert strongly_separated(walls, cg, a, b) == (True, False)
                    checked += 1
        assert checked > 0

    def test_brute_force_definition(self, p3_small):
        walls, cg = p3_small
        crosses = {frozenset(p) for p in cg.crossing}
        n = len(walls)
        for a, b in itertools.combinations(range(n), 2):
            both = any(frozenset((a, c)) in crosses and frozenset((b, c)) in crosses for c in range(n))
            want = frozenset((a, b)) not in crosses and not both
            assert strongly_separated(walls, cg, a, b)[0] == want

    def test_same_wall(self, p3_small):
        walls, cg = p3_small
        with pytest.raises(InputError):
            strongly_separated(walls, cg, 0, 0)


class TestQMap:
    def test_grid(self, zz_ball8):
        walls = build_hyperplanes(zz_ball8)
        x = zz_ball8.vertex("aab")
        want = int(walls.wall_of[walls.edge_at(zz_ball8.vertex("aa"), 2)])
        assert q_map(zz_ball8, walls, x) == want

    def test_tree(self, free_ball8):
        walls = build_hyperplanes(free_ball8)
        want = int(walls.wall_of[walls.edge_at(free_ball8.vertex("a"), 2)])
        assert q_map(free_ball8, walls, free_ball8.vertex("ab")) == want

    def test_p3_shortlex_witness(self, p3_walls):
        walls, _ = p3_walls
        ball = walls.ball
        for x in range(1, ball.n_vertices, 97):
            if ball.dist[x] > 4:
                continue
            path = geodesics_between(ball, 0, x, 1).paths[0]
            assert q_map(ball, walls, x) == wall_sequence(walls, path)[-1]

    def test_base(self, p3_walls):
        walls, _ = p3_walls
        with pytest.raises(InputError):
            q_map(walls.ball, walls, 0)


class TestEmbedding:
    def test_tree(self, free_ball8):
        walls = build_hyperplanes(free_ball8)
        cg = contact_graph(walls)
        st = build_stratum(free_ball8, GaugeTable.constant(GaugeSchedule(((1, 0),)), 0))
        rep = embedding_report(free_ball8, st, walls, cg)
        assert rep.upper_ok and rep.connected
        assert rep.lower_holds == len(rep.pairs)
        for x, y, d, dcg in rep.pairs:
            if x == y:
                assert d == dcg == 0

    def test_grid_thin(self, zz_ball8):
        walls = build_hyperplanes(zz_ball8)
        cg = contact_graph(walls)
        sched = GaugeSchedule(((1, 0),))
        st = build_stratum(zz_ball8, GaugeTable.constant(sched, 0))
        rep = embedding_report(zz_ball8, st, walls, cg)
        # only axis geodesics have gauge 0: the cross of 1 + 4 * 4 vertices
        assert len(st) == 17 and rep.upper_ok
        assert rep.pairs

    def test_greedy_chain(self, free_ball8):
        walls = build_hyperplanes(free_ball8)
        cg = contact_graph(walls)
        seq = wall_sequence(walls, geodesics_between(free_ball8, 0, free_ball8.vertex("abab")).paths[0])
        assert separated_chain(walls, cg, seq) == [0, 1, 2, 3]


class TestDistance3:
    def test_tree(self, free_ball8):
        walls = build_hyperplanes(free_ball8)
        rep = distance3_check(walls, contact_graph(walls))
        assert rep.ok and rep.walls_checked > 0

    def test_p3_all_walls(self, p3_walls):
        walls, cg = p3_walls
        rep = distance3_check(walls, cg, interior_only=False)
        assert rep.ok and rep.walls_checked == len(walls)

    def test_path_graph_four(self):
        spec = GroupSpec.raag(4, [("a", "b"), ("b", "c"), ("c", "d")])
        walls = build_hyperplanes(build_ball(spec, 5))
        assert distance3_check(walls, contact_graph(walls), interior_only=False).ok
