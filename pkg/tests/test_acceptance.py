"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL ...`` line (shown even without
``-s``) and then asserts what it printed. Radii and bounds are the desk-scale
values the criteria name; the heavier ones take a minute or two.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

import oracles
from morselab.boundary import (
    boundary_proxy,
    chain_visual_metric,
    epsilon_max,
    four_point_delta,
    gromov_products,
)
from morselab.cayley import build_ball, geodesics_between, sphere, word_path
from morselab.cli import main
from morselab.labelled import LabelledGraph
from morselab.morse import GaugeSchedule, GaugeTable, build_stratum, empirical_gauge, slim_defect
from morselab.presentations import GroupSpec, load_spec
from morselab.raag_cube import build_hyperplanes, contact_graph, distance3_check, embedding_report
from morselab.smallcanc import check_c_prime, truncation_embedding_check

R = 8
ONLY_10 = GaugeSchedule(((1, 0),))
WITH_30 = GaugeSchedule(((1, 0), (3, 0)))


@pytest.fixture
def say(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


# nested gauges, chosen so the three strata grow strictly on Z^2 and P3
def nested_bounds(schedule):
    return [
        GaugeTable.from_function(schedule, lambda K, C: K * C / 2),
        GaugeTable.from_function(schedule, lambda K, C: Fraction(3) * (K - 1) / 2 + K * C / 2),
        GaugeTable.from_function(schedule, lambda K, C: 2 * (K - 1) + K * C / 2 + 1),
        GaugeTable.covering(schedule, R),
    ]


@pytest.fixture(scope="module")
def p3_stratum(p3_ball8):
    return build_stratum(p3_ball8, nested_bounds(WITH_30)[2], WITH_30)


def test_criterion_1_tree_exactness(free_ball8, say):
    t = time.perf_counter()
    ball = free_ball8
    deltas = {r: four_point_delta(gromov_products(ball, sphere(ball, r))) for r in (2, 4, 6)}
    worst = 0
    for v in range(ball.n_vertices):
        gamma = word_path(ball, 0, ball.words[v])
        worst = max(worst, empirical_gauge(ball, gamma, ONLY_10, clip=True)[(1, 0)])
    elapsed = time.perf_counter() - t
    ok = all(d == 0 for d in deltas.values()) and worst == 0 and elapsed < 60
    say(1, ok, f"delta on spheres {dict((r, str(d)) for r, d in deltas.items())}, "
               f"max N(1,0) over {ball.n_vertices} geodesics = {worst}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_stratum_monotonicity(free_ball8, zz_ball8, p3_ball8, say):
    schedule = GaugeSchedule.default()
    lines, ok = [], True
    for name, ball in (("free", free_ball8), ("zz", zz_ball8), ("p3", p3_ball8)):
        strata = [set(build_stratum(ball, b, schedule).members) for b in nested_bounds(schedule)]
        nested = all(a <= b for a, b in zip(strata, strata[1:]))
        trusted = set(np.flatnonzero(ball.dist <= R // 2).tolist())
        full = strata[-1] == trusted
        ok &= nested and full
        lines.append(f"{name} {[len(s) for s in strata]} nested={nested} cover=all:{full}")
    say(2, ok, "; ".join(lines))
    assert ok


def corner_gauges(zz):
    out = {}
    for r in (4, 6, 8):
        ball = build_ball(zz, r)
        m = r // 2
        corner = ball.vertex("a" * m + "b" * m)
        geos = geodesics_between(ball, 0, corner, cap=10**6)
        assert geos.exact
        out[r] = min(empirical_gauge(ball, p, ONLY_10)[(1, 0)] for p in geos.paths)
    return out


def test_criterion_3_non_morse_detection(zz, say):
    got = corner_gauges(zz)
    want = {r: oracles.corner_gauge(r // 2) for r in got}
    above = all(got[r] >= r / 4 for r in got)
    strict = got[4] < got[6] < got[8]
    say(3, got == want and above and strict,
        f"min-geodesic corner N(1,0) {got} (oracle {want}); >= R/4: {above}; "
        f"strictly increasing: {strict} (the staircase keeps it at ceil(R/4))")
    assert got == want and above


@pytest.mark.xfail(strict=True, reason="the lattice minimum is ceil(R/4): R=6 and R=8 both give 2")
def test_criterion_3_strict_increase(zz):
    got = corner_gauges(zz)
    assert got[4] < got[6] < got[8]


def test_criterion_4_slimness(p3_ball8, p3_stratum, say):
    members = sorted(p3_stratum.members)
    bound = 4 * p3_stratum.bound[(3, 0)]
    worst, violations, pairs = 0, 0, 0
    for i, x in enumerate(members):
        for y in members[i:]:
            rep = slim_defect(p3_ball8, p3_stratum, x, y)
            worst = max(worst, rep.defect)
            violations += rep.defect > bound
            pairs += 1
    say(4, violations == 0, f"{pairs} member pairs, max slim defect {worst} <= {bound}, "
                            f"violations {violations}")
    assert violations == 0


def test_criterion_5_hyperbolicity(p3_ball8, p3_stratum, say):
    members = sorted(p3_stratum.members)
    delta = four_point_delta(gromov_products(p3_ball8, members))
    bound = 8 * p3_stratum.bound[(3, 0)]
    say(5, delta <= bound, f"delta over {len(members)} members = {delta} <= {bound}")
    assert delta <= bound


def test_criterion_6_visual_metric(free2, p3_ball8, p3_stratum, say):
    tree = build_ball(free2, 6)
    proxy = boundary_proxy(tree, sphere(tree, 6), 0.3)
    m_tree = chain_visual_metric(proxy)
    off = ~np.eye(len(proxy.points), dtype=bool)
    tree_gap = float(np.abs(m_tree.d - proxy.rho)[off].max())

    pts = [v for v in sorted(p3_stratum.members) if p3_ball8.dist[v] == p3_stratum.membership_radius]
    delta = four_point_delta(gromov_products(p3_ball8, pts))
    eps = 0.9 * epsilon_max(delta)
    m_p3 = chain_visual_metric(boundary_proxy(p3_ball8, pts, eps))
    ok = m_tree.delta == 0 and tree_gap <= 1e-9 and m_p3.ok
    say(6, ok, f"tree: {len(proxy.points)} points, max |d - rho| = {tree_gap:.2e}; "
               f"P3: {len(pts)} points, delta {delta}, eps {eps:.4f}, "
               f"worst lower {m_p3.worst_lower:.2e}, worst upper {m_p3.worst_upper:.2e}")
    assert ok


def test_criterion_7_contact_graph(say):
    families = {
        "noedge": GroupSpec.raag(2, []),
        "edge": GroupSpec.raag(2, [("a", "b")]),
        "p3": GroupSpec.raag(3, [("a", "b"), ("b", "c")]),
    }
    lines, ok = [], True
    for name, spec in families.items():
        ball = build_ball(spec, R)
        walls = build_hyperplanes(ball)
        cg = contact_graph(walls)
        st = build_stratum(ball, GaugeTable.covering(ONLY_10, R), ONLY_10)
        rep = embedding_report(ball, st, walls, cg)
        inner = distance3_check(walls, cg, interior_only=True)
        every = distance3_check(walls, cg, interior_only=False)
        ok &= rep.upper_ok and inner.ok and every.ok
        lines.append(f"{name}: lipschitz {len(rep.pairs) - rep.upper_violations}/{len(rep.pairs)}, "
                     f"distance-3 interior {inner.walls_checked} walls ok={inner.ok}, "
                     f"all {every.walls_checked} ok={every.ok}")
    say(7, ok, "; ".join(lines))
    assert ok


def test_criterion_8_c_prime(data_dir, say):
    t = time.perf_counter()
    surface = load_spec(data_dir / "surface2.grp")
    good = check_c_prime(LabelledGraph.from_relators(surface.relators), 1 / 6)
    t_good = time.perf_counter() - t
    t = time.perf_counter()
    a2b2 = load_spec(data_dir / "a2b2.grp")
    bad = check_c_prime(LabelledGraph.from_relators(a2b2.relators), 1 / 6)
    t_bad = time.perf_counter() - t
    oracle_piece = oracles.cycle_pieces(["abABcdCD"])
    witness = a2b2.format(bad.witness.piece) if bad.witness else None
    ok = (good.passed and good.max_piece == oracle_piece == 1 and not bad.passed
          and witness == "a" and t_good < 5 and t_bad < 5)
    say(8, ok, f"surface pass={good.passed} max piece {good.max_piece} (oracle {oracle_piece}) "
               f"{t_good:.3f}s; a2b2 pass={bad.passed} witness {witness!r} {t_bad:.3f}s")
    assert ok


def test_criterion_9_truncation(data_dir, say):
    # Gamma = 8-cycle over a, b, c plus 9-cycle d^9; threshold 8 keeps the first.
    # Radius 6 is the smallest where d^9 shortens a projected pair.
    spec = load_spec(data_dir / "twocycles.grp")
    rep, ball, _, _ = truncation_embedding_check(spec, 8, 6, GaugeTable.covering(WITH_30, 6), WITH_30)
    ok = rep.ok and rep.isometric_on_witnesses and rep.witness_pairs > 0
    say(9, ok, f"kept {[ball.spec.generators[g] for g in rep.kept_alphabet]}, "
               f"{rep.quotient_pairs} projected pairs, {rep.monotone_violations} violations, "
               f"{rep.strict_pairs} strictly shortened; {rep.witness_pairs} witness pairs, "
               f"{len(rep.witness_mismatches)} mismatches")
    assert ok


DETERMINISM_RUNS = [
    ["stratum", "--input", "zz.grp", "--radius", "8", "--bound", "1"],
    ["hyperbolicity", "--input", "p3.grp", "--radius", "6", "--schedule", "1,0;3,0"],
    ["boundary", "--input", "p3.grp", "--radius", "6", "--schedule", "1,0;3,0"],
    ["raag", "--input", "p3.grp", "--radius", "6", "--schedule", "1,0"],
    ["smallcanc", "--input", "twocycles.grp", "--radius", "4", "--threshold", "8",
     "--schedule", "1,0"],
]


def test_criterion_10_determinism(tmp_path, data_dir, say):
    same = {}
    for argv in DETERMINISM_RUNS:
        argv = [str(data_dir / a) if a.endswith(".grp") else a for a in argv]
        blobs = []
        for k in range(2):
            out = tmp_path / f"{argv[0]}{k}"
            assert main(argv + ["--out", str(out)]) == 0
            blobs.append((out / f"{argv[0]}.json").read_bytes())
        same[argv[0]] = blobs[0] == blobs[1]
    ok = all(same.values())
    say(10, ok, f"byte-identical JSON: {same}")
    assert ok
