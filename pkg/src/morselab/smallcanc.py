"""Pieces, graphical C'(lambda) certification, girth, and the Gamma_N truncation."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from morselab.errors import InputError
from morselab.labelled import Cycle, LabelledGraph
from morselab.words import Word, invert

__all__ = [
    "LabelledGraph",
    "PieceReport",
    "enumerate_pieces",
    "check_c_prime",
    "girth_and_diameter",
    "select_gamma_n",
    "detour_probe",
    "find_walks",
    "count_walks",
]

Walk = tuple[int, tuple[tuple[int, bool], ...]]  # start vertex, edge steps


def _letter_moves(graph: LabelledGraph) -> dict[int, list[tuple[int, int, int]]]:
    """letter code -> [(from, to, edge)] for every way of reading that letter."""
    moves: dict[int, list[tuple[int, int, int]]] = {}
    for k, (s, d, g) in enumerate(graph.edges):
        moves.setdefault(2 * g, []).append((s, d, k))
        moves.setdefault(2 * g + 1, []).append((d, s, k))
    return moves


def count_walks(graph: LabelledGraph, word: Word) -> int:
    """Number of label-preserving maps of a path reading ``word`` into the graph."""
    moves = _letter_moves(graph)
    counts = np.ones(graph.n_vertices, dtype=np.int64)
    for c in word:
        nxt = np.zeros_like(counts)
        for s, d, _ in moves.get(c, ()):
            nxt[d] += counts[s]
        counts = nxt
    return int(counts.sum())


def find_walks(graph: LabelledGraph, word: Word, limit: int = 2) -> list[Walk]:
    """Up to ``limit`` explicit walks reading ``word``, in vertex/edge order."""
    moves = _letter_moves(graph)
    by_source: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for c, lst in moves.items():
        for s, d, k in lst:
            by_source.setdefault((c, s), []).append((d, k))
    out: list[Walk] = []
    steps: list[tuple[int, bool]] = []

    def go(v: int, i: int) -> None:
        if len(out) >= limit:
            return
        if i == len(word):
            out.append((start, tuple(steps)))
            return
        c = word[i]
        for d, k in by_source.get((c, v), ()):
            steps.append((k, not c & 1))
            go(d, i + 1)
            steps.pop()

    for start in range(graph.n_vertices):
        go(start, 0)
    return out


@dataclass
class CyclePieces:
    cycle: Cycle
    length: int
    max_piece: int
    piece: Word          # a longest piece lying on the cycle
    position: int        # where it starts along the cycle


@dataclass
class PieceReport:
    component_max: list[int]
    component_growing: list[bool]
    cycles: list[CyclePieces]
    cycles_complete: bool
    lam: float | None = None
    passed: bool | None = None
    witness: CyclePieces | None = None
    witness_walks: list[Walk] = field(default_factory=list)

    @property
    def max_piece(self) -> int:
        return max(self.component_max, default=0)

    def to_json(self, names: Sequence[str]) -> dict:
        from morselab.words import format_word

        out = {
            "component_max_piece": self.component_max,
            "component_growing": self.component_growing,
            "cycles_complete": self.cycles_complete,
            "cycles": [{"length": c.length, "max_piece": c.max_piece,
                        "piece": format_word(c.piece, names), "position": c.position}
                       for c in self.cycles],
        }
        if self.lam is not None:
            out["lambda"] = self.lam
            out["pass"] = self.passed
        if self.witness is not None:
            out["witness"] = {
                "piece": format_word(self.witness.piece, names),
                "cycle_length": self.witness.length,
                "walks": [{"start": s, "edges": [[k, f] for k, f in steps]}
                          for s, steps in self.witness_walks],
            }
        return out


def _component_of(graph: LabelledGraph) -> list[int]:
    comp = [-1] * graph.n_vertices
    for cid, part_start in enumerate(_component_starts(graph)):
        stack = [part_start]
        comp[part_start] = cid
        while stack:
            v = stack.pop()
            for _, w, _ in graph.incidence[v]:
                if comp[w] < 0:
                    comp[w] = cid
                    stack.append(w)
    return comp


def _component_starts(graph: LabelledGraph) -> list[int]:
    seen = [False] * graph.n_vertices
    starts = []
    for s in range(graph.n_vertices):
        if seen[s]:
            continue
        starts.append(s)
        stack = [s]
        seen[s] = True
        while stack:
            v = stack.pop()
            for _, w, _ in graph.incidence[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return starts


def _max_piece_from(graph: LabelledGraph, starts: Sequence[int], cap: int) -> tuple[int, bool]:
    """Longest piece with a location starting in ``starts``, via paired walks.

    A state is (end of walk 1, end of walk 2, walks differ, last letter);
    the last letter keeps the common word freely reduced.
    """
    moves = _letter_moves(graph)
    by_source: dict[int, list[tuple[int, int, int]]] = {}
    for c, lst in moves.items():
        for s, d, k in lst:
            by_source.setdefault(s, []).append((c, d, k))
    states = {(a, b, a != b, -1) for a in starts for b in range(graph.n_vertices)}
    best = 0
    for depth in range(1, cap + 1):
        nxt = set()
        for a, b, split, last in states:
            for c, da, ka in by_source.get(a, ()):
                if c == last ^ 1:
                    continue
                for c2, db, kb in by_source.get(b, ()):
                    if c2 == c:
                        nxt.add((da, db, split or ka != kb, c))
        states = nxt
        if not states:
            return best, False
        if any(state[2] for state in states):
            best = depth
    return best, best == cap


def enumerate_pieces(graph: LabelledGraph, length_cap: int = 64,
                     cycle_cap: int = 100_000) -> PieceReport:
    """Pieces of every simple cycle and the longest piece per component.

    Occurrences are counted as distinct label-preserving walks, so two
    readings of the same word at different places are different locations.
    """
    if length_cap < 1:
        raise InputError("length cap must be at least 1")
    comps = _component_of(graph)
    n_comp = max(comps, default=-1) + 1
    comp_max, comp_growing = [], []
    for cid in range(n_comp):
        starts = [v for v in range(graph.n_vertices) if comps[v] == cid]
        best, growing = _max_piece_from(graph, starts, length_cap)
        comp_max.append(best)
        comp_growing.append(growing)

    moves = _letter_moves(graph)
    cycles = graph.simple_cycles(count_cap=cycle_cap)
    results = []
    for cyc in cycles:
        label = graph.cycle_label(cyc)
        L = len(label)
        best, best_word, best_pos = 0, b"", 0
        for i in range(L):
            counts = np.ones(graph.n_vertices, dtype=np.int64)
            for ell in range(1, L + 1):
                c = label[(i + ell - 1) % L]
                nxt = np.zeros_like(counts)
                for s, d, _ in moves.get(c, ()):
                    nxt[d] += counts[s]
                counts = nxt
                if counts.sum() >= 2 and ell > best:
                    best = ell
                    best_word = bytes(label[(i + t) % L] for t in range(ell))
                    best_pos = i
        results.append(CyclePieces(cyc, L, best, best_word, best_pos))
    return PieceReport(comp_max, comp_growing, results, True)


def check_c_prime(graph: LabelledGraph, lam: float, cycle_cap: int = 100_000,
                  report: PieceReport | None = None) -> PieceReport:
    """Pass iff every piece on every simple cycle C has |p| < lam * |C|."""
    if not lam > 0:
        raise InputError("lambda must be positive")
    report = report or enumerate_pieces(graph, cycle_cap=cycle_cap)
    report.lam = lam
    report.passed = True
    for cp in report.cycles:
        if cp.max_piece >= lam * cp.length:
            report.passed = False
            report.witness = cp
            report.witness_walks = find_walks(graph, cp.piece, limit=2)
            break
    return report


def girth_and_diameter(graph: LabelledGraph) -> list[tuple[float, int]]:
    """(girth, diameter) per connected component; girth is inf for forests."""
    out = []
    for part in graph.components():
        out.append((_girth(part), _diameter(part)))
    return out


def _bfs(graph: LabelledGraph, sources: Sequence[int]) -> list[int]:
    dist = [-1] * graph.n_vertices
    q = deque(sources)
    for s in sources:
        dist[s] = 0
    while q:
        v = q.popleft()
        for _, w, _ in graph.incidence[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def _girth(graph: LabelledGraph) -> float:
    best = math.inf
    for k, (s, d, _) in enumerate(graph.edges):
        if s == d:
            return 1
    for root in range(graph.n_vertices):
        dist = [-1] * graph.n_vertices
        via = [-1] * graph.n_vertices
        dist[root] = 0
        q = deque([root])
        while q:
            v = q.popleft()
            for k, w, _ in graph.incidence[v]:
                if k == via[v]:
                    continue
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    via[w] = k
                    q.append(w)
                else:
                    best = min(best, dist[v] + dist[w] + 1)
    return best


def _diameter(graph: LabelledGraph) -> int:
    best = 0
    for v in range(graph.n_vertices):
        best = max(best, max(_bfs(graph, [v])))
    return best


def select_gamma_n(graph: LabelledGraph, g_threshold: float) -> LabelledGraph:
    """Disjoint union of the components of girth at most ``g_threshold``."""
    keep = [part for part in graph.components() if _girth(part) <= g_threshold]
    return LabelledGraph.disjoint_union(keep)


@dataclass
class DetourReport:
    geodesic_ok: bool
    long_enough: bool
    segments: int | None      # geodesic pieces needed for the rest of the cycle
    girth: float
    diameter: int
    threshold: float          # girth / 12
    escape: int               # best distance from gamma_1 reached
    path: list[int]
    escaped: bool


def detour_probe(graph: LabelledGraph, cycle: Sequence[int], start: int, length: int,
                 kappa: int = 5) -> DetourReport:
    """Look for a path between the ends of a cycle side that leaves its g/12-neighbourhood.

    ``cycle`` lists the vertices of a simple cycle in order; the side
    ``gamma_1`` runs from ``cycle[start]`` for ``length`` steps. Candidate
    paths have length at most ``kappa * diam``.
    """
    n = len(cycle)
    if not 0 < length < n:
        raise InputError("side length must be between 1 and the cycle length - 1")
    side = [cycle[(start + i) % n] for i in range(length + 1)]
    rest = [cycle[(start + length + i) % n] for i in range(n - length + 1)]
    a, b = side[0], side[-1]
    da = _bfs(graph, [a])
    db = _bfs(graph, [b])
    girth = _girth(graph)
    diam = max(da) if da else 0
    diam = max(diam, _diameter(graph))
    geodesic_ok = da[b] == length
    long_enough = 6 * length >= n

    segments = 0
    i = 0
    while i < len(rest) - 1:
        di = _bfs(graph, [rest[i]])
        j = i + 1
        while j + 1 < len(rest) and di[rest[j + 1]] == j + 1 - i:
            j += 1
        segments += 1
        i = j
    to_side = _bfs(graph, side)
    budget = kappa * diam
    best, best_v = -1, a
    for v in range(graph.n_vertices):
        if da[v] >= 0 and db[v] >= 0 and da[v] + db[v] <= budget and to_side[v] > best:
            best, best_v = to_side[v], v
    path = _geodesic(graph, a, best_v)[:-1] + _geodesic(graph, best_v, b)
    threshold = girth / 12
    return DetourReport(geodesic_ok, long_enough, segments if segments + 1 <= 6 else None,
                        girth, diam, threshold, best, path, best >= threshold)


def _geodesic(graph: LabelledGraph, a: int, b: int) -> list[int]:
    dist = _bfs(graph, [b])
    path = [a]
    while path[-1] != b:
        v = path[-1]
        path.append(next(w for _, w, _ in graph.incidence[v] if dist[w] == dist[v] - 1))
    return path


def piece_inverse_symmetric(graph: LabelledGraph, word: Word) -> bool:
    """p is a piece iff p^-1 is: walks reading p reversed read p^-1."""
    return (count_walks(graph, word) >= 2) == (count_walks(graph, invert(word)) >= 2)


@dataclass
class TruncationReport:
    kept_components: int
    kept_alphabet: list[int]
    members: int
    quotient_pairs: int          # trusted pairs of the Gamma_N ball projected to G(Gamma)
    monotone_violations: int     # projected pairs with d_Gamma > d_Gamma_N
    witness_pairs: int           # member pairs whose witnesses use only kept letters
    witness_mismatches: list[tuple[int, int, int, int]] = field(default_factory=list)
    strict_pairs: int = 0        # projected pairs the quotient strictly shortens

    @property
    def ok(self) -> bool:
        return self.monotone_violations == 0

    @property
    def isometric_on_witnesses(self) -> bool:
        return not self.witness_mismatches

    def to_json(self, ball) -> dict:
        return {
            "kept_components": self.kept_components,
            "kept_alphabet": [ball.spec.generators[g] for g in self.kept_alphabet],
            "members": self.members,
            "quotient_pairs": self.quotient_pairs,
            "monotone_violations": self.monotone_violations,
            "strict_pairs": self.strict_pairs,
            "witness_pairs": self.witness_pairs,
            "witness_mismatches": [
                {"x": ball.label(x), "y": ball.label(y), "d": d, "d_truncated": dn,
                 "note": "gauge underestimation suspected"}
                for x, y, d, dn in self.witness_mismatches],
        }


def truncation_embedding_check(spec, g_threshold: float, radius: int, bound, schedule=None,
                               budget: int | None = None):
    """Compare G(Gamma) with G(Gamma_N), Gamma_N the components of girth <= threshold.

    G(Gamma) is a quotient of G(Gamma_N), so projecting trusted pairs of the
    Gamma_N ball can only shorten distances; that is checked on every pair.
    On stratum members whose witness words use only letters of the kept
    components, distances should agree; disagreements are listed rather
    than raised, since empirical strata can be larger than true ones.

    Returns ``(report, ball, ball_n, stratum)``.
    """
    from morselab.cayley import build_ball, path_word
    from morselab.morse import DEFAULT_BUDGET, build_stratum
    from morselab.presentations import GroupSpec

    if spec.family != "graphical-sc":
        raise InputError("truncation check needs a graphical small-cancellation spec")
    kept = [part for part in spec.graph.components() if _girth(part) <= g_threshold]
    gamma_n = LabelledGraph.disjoint_union(kept)
    spec_n = GroupSpec.graphical_sc(spec.generators, gamma_n, spec.lam, spec.cycle_cap)
    ball = build_ball(spec, radius)
    ball_n = build_ball(spec_n, radius)
    stratum = build_stratum(ball, bound, schedule, budget=budget or DEFAULT_BUDGET)

    half = radius // 2
    near = [v for v in range(ball_n.n_vertices) if ball_n.dist[v] <= half]
    image = {v: ball.locate(ball_n.words[v]) for v in near}
    pairs = violations = strict = 0
    for i, u in enumerate(near):
        for v in near[i:]:
            pairs += 1
            d, dn = ball.d(image[u], image[v]), ball_n.d(u, v)
            violations += d > dn
            strict += d < dn

    alphabet = sorted(gamma_n.labels)
    letters = {2 * g for g in alphabet} | {2 * g + 1 for g in alphabet}
    lifted = {}
    for x, m in stratum.members.items():
        word = path_word(ball, m.witness)
        if set(word) <= letters:
            lifted[x] = ball_n.locate(word)
    mismatches = []
    xs = sorted(lifted)
    count = 0
    for i, x in enumerate(xs):
        for y in xs[i:]:
            count += 1
            d, dn = ball.d(x, y), ball_n.d(lifted[x], lifted[y])
            if d != dn:
                mismatches.append((x, y, d, dn))
    report = TruncationReport(len(kept), alphabet, len(stratum.members), pairs, violations,
                              count, mismatches, strict)
    return report, ball, ball_n, stratum
