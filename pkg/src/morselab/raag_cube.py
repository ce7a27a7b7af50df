"""Walls (hyperplanes) of RAAG Cayley balls, the contact graph and the map q.

The Cayley graph of a right-angled Artin group is the 1-skeleton of the
universal cover of its Salvetti complex. Squares are the 4-cycles
v, vs, vst, vt with s and t commuting; a wall is the class of edges
generated by "opposite sides of a square". Everything here is restricted
to the ball, so walls carry an ``interior`` flag: an interior wall has no
dual edge touching the outer sphere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from morselab.cayley import BallGraph
from morselab.errors import InputError
from morselab.presentations import CANONICAL_FAMILIES


@dataclass(frozen=True)
class Hyperplane:
    id: int
    edges: tuple[int, ...]
    gen: int
    interior: bool


@dataclass
class WallSet:
    """Edges of the ball and their wall classes.

    Edge ``k`` joins ``src[k]`` to ``dst[k] = src[k] * gen[k]``, oriented
    along the positive generator.
    """

    ball: BallGraph
    src: np.ndarray
    dst: np.ndarray
    gen: np.ndarray
    wall_of: np.ndarray
    walls: list[Hyperplane]
    squares: np.ndarray          # rows (edge s at v, edge t at v, edge s at vt, edge t at vs)
    edge_index: dict[tuple[int, int], int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.walls)

    def edge_at(self, v: int, letter: int) -> int:
        """Edge id read from vertex ``v`` along letter code ``letter``."""
        if letter & 1:
            u = int(self.ball.nbr[v, letter])
            return self.edge_index[(u, letter >> 1)]
        return self.edge_index[(v, letter >> 1)]

    def type_name(self, wall: int) -> str:
        return self.ball.spec.generators[self.walls[wall].gen]


def build_hyperplanes(ball: BallGraph) -> WallSet:
    """Union-find over opposite square edges, done as connected components."""
    spec = ball.spec
    if spec.family not in CANONICAL_FAMILIES:
        raise InputError(f"walls need a right-angled Artin family, got {spec.family!r}")
    nbr = ball.nbr
    rank = spec.rank
    src_l, gen_l, dst_l = [], [], []
    for g in range(rank):
        col = nbr[:, 2 * g]
        vs = np.flatnonzero(col >= 0)
        src_l.append(vs)
        gen_l.append(np.full(len(vs), g))
        dst_l.append(col[vs])
    src = np.concatenate(src_l) if src_l else np.zeros(0, dtype=np.int64)
    gen = np.concatenate(gen_l) if gen_l else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(dst_l) if dst_l else np.zeros(0, dtype=np.int64)
    order = np.lexsort((gen, src))
    src, gen, dst = src[order], gen[order], dst[order]
    E = len(src)
    edge_id = np.full((ball.n_vertices, max(rank, 1)), -1, dtype=np.int64)
    edge_id[src, gen] = np.arange(E)

    squares = []
    for s in range(rank):
        for t in range(s + 1, rank):
            if not spec.commutes(s, t):
                continue
            v = np.arange(ball.n_vertices)
            vs = nbr[:, 2 * s]
            vt = nbr[:, 2 * t]
            ok = (vs >= 0) & (vt >= 0)
            v, vs, vt = v[ok], vs[ok], vt[ok]
            vst = nbr[vs, 2 * t]
            ok = vst >= 0
            v, vs, vt = v[ok], vs[ok], vt[ok]
            squares.append(np.column_stack([edge_id[v, s], edge_id[v, t],
                                            edge_id[vt, s], edge_id[vs, t]]))
    squares_arr = np.vstack(squares) if squares else np.zeros((0, 4), dtype=np.int64)

    a = np.concatenate([squares_arr[:, 0], squares_arr[:, 1]])
    b = np.concatenate([squares_arr[:, 2], squares_arr[:, 3]])
    graph = coo_matrix((np.ones(len(a)), (a, b)), shape=(E, E))
    _, labels = connected_components(graph, directed=False)
    # Renumber walls by their smallest edge id.
    first = {}
    for k, lab in enumerate(labels.tolist()):
        first.setdefault(lab, len(first))
    wall_of = np.array([first[lab] for lab in labels.tolist()], dtype=np.int64)

    on_sphere = ball.dist == ball.radius
    touches = on_sphere[src] | on_sphere[dst]
    members: list[list[int]] = [[] for _ in range(len(first))]
    for k, w in enumerate(wall_of.tolist()):
        members[w].append(k)
    walls = []
    for w, edges in enumerate(members):
        walls.append(Hyperplane(w, tuple(edges), int(gen[edges[0]]),
                                not bool(touches[edges].any())))
    index = {(int(s_), int(g_)): k for k, (s_, g_) in enumerate(zip(src.tolist(), gen.tolist()))}
    return WallSet(ball, src, dst, gen, wall_of, walls, squares_arr, index)


@dataclass
class ContactGraph:
    n_walls: int
    adjacency: csr_matrix                 # symmetric 0/1, contact pairs
    crossing: set[tuple[int, int]]        # (a, b) with a < b
    crossers: list[frozenset[int]]        # walls crossing each wall

    def contact(self, a: int, b: int) -> bool:
        return a != b and bool(self.adjacency[a, b])

    def crosses(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.crossing

    def edges(self) -> list[tuple[int, int, bool]]:
        coo = self.adjacency.tocoo()
        pairs = sorted((int(i), int(j)) for i, j in zip(coo.row, coo.col) if i < j)
        return [(i, j, (i, j) in self.crossing) for i, j in pairs]

    def distances_from(self, sources: Sequence[int]) -> np.ndarray:
        """Contact-graph BFS distances (inf when disconnected), one row per source."""
        if not len(sources):
            return np.zeros((0, self.n_walls))
        return shortest_path(self.adjacency, unweighted=True, directed=False,
                             indices=list(sources))


def contact_graph(walls: WallSet) -> ContactGraph:
    """Walls are in contact when they cross or have dual edges sharing a vertex."""
    n = len(walls)
    sq = walls.squares
    w = walls.wall_of
    cross_a = w[sq[:, 0]] if len(sq) else np.zeros(0, dtype=np.int64)
    cross_b = w[sq[:, 1]] if len(sq) else np.zeros(0, dtype=np.int64)
    crossing = {(min(a, b), max(a, b)) for a, b in zip(cross_a.tolist(), cross_b.tolist())}

    rows, cols = [cross_a, cross_b], [cross_b, cross_a]
    ball = walls.ball
    incident: list[list[int]] = [[] for _ in range(ball.n_vertices)]
    for k, (s, d) in enumerate(zip(walls.src.tolist(), walls.dst.tolist())):
        incident[s].append(int(w[k]))
        incident[d].append(int(w[k]))
    ra, rb = [], []
    for ws in incident:
        ws = sorted(set(ws))
        for i in range(len(ws)):
            for j in range(i + 1, len(ws)):
                ra.append(ws[i])
                rb.append(ws[j])
    rows += [np.array(ra, dtype=np.int64), np.array(rb, dtype=np.int64)]
    cols += [np.array(rb, dtype=np.int64), np.array(ra, dtype=np.int64)]
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    adj = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n)).tocsr()
    adj.data[:] = 1
    adj.setdiag(0)
    adj.eliminate_zeros()
    crossers: list[set[int]] = [set() for _ in range(n)]
    for a, b in crossing:
        crossers[a].add(b)
        crossers[b].add(a)
    return ContactGraph(n, adj, crossing, [frozenset(s) for s in crossers])


def strongly_separated(walls: WallSet, contact: ContactGraph, h1: int, h2: int) -> tuple[bool, bool]:
    """(no crossing and no wall crossing both, both walls interior)."""
    if h1 == h2:
        raise InputError("strong separation needs two distinct walls")
    sep = not contact.crosses(h1, h2) and not (contact.crossers[h1] & contact.crossers[h2])
    valid = walls.walls[h1].interior and walls.walls[h2].interior
    return sep, valid


def q_map(ball: BallGraph, walls: WallSet, x: int) -> int:
    """Wall dual to the last edge of the ShortLex-first geodesic from e to x."""
    if x == ball.base:
        raise InputError("q is undefined at the base vertex")
    word = ball.words[x]
    prev = ball.vertex(word[:-1])
    return int(walls.wall_of[walls.edge_at(prev, word[-1])])


def wall_sequence(walls: WallSet, path: Sequence[int]) -> list[int]:
    """Walls crossed by consecutive edges of a vertex path."""
    ball = walls.ball
    out = []
    for a, b in zip(path, path[1:]):
        letter = int(np.flatnonzero(ball.nbr[a] == b)[0])
        out.append(int(walls.wall_of[walls.edge_at(a, letter)]))
    return out


def separated_chain(walls: WallSet, contact: ContactGraph, seq: Sequence[int]) -> list[int]:
    """Positions of the greedy chain F_1, F_2, ...: each the next wall strongly separated from the last."""
    if not seq:
        return []
    chosen = [0]
    for k in range(1, len(seq)):
        last = seq[chosen[-1]]
        if seq[k] != last and strongly_separated(walls, contact, last, seq[k])[0]:
            chosen.append(k)
    return chosen


@dataclass
class QMapReport:
    assignments: dict[int, int]
    pairs: list[tuple[int, int, int, float]]     # (x, y, d(x,y), d_CG(q x, q y))
    upper_violations: int
    observed_r: int
    lower_holds: int
    connected: bool

    @property
    def upper_ok(self) -> bool:
        return self.upper_violations == 0

    def to_json(self, ball: BallGraph) -> dict:
        return {
            "assignments": {ball.label(x): h for x, h in sorted(self.assignments.items())},
            "pairs": [{"x": ball.label(x), "y": ball.label(y), "d": d,
                       "d_cg": None if math.isinf(dcg) else int(dcg)}
                      for x, y, d, dcg in self.pairs],
            "upper_violations": self.upper_violations,
            "observed_r": self.observed_r,
            "lower_bound_holds": self.lower_holds,
            "pairs_checked": len(self.pairs),
            "contact_graph_connected": self.connected,
        }


def embedding_report(ball: BallGraph, stratum, walls: WallSet, contact: ContactGraph) -> QMapReport:
    """Check d_CG(q x, q y) <= d(x, y) on all trusted member pairs, measure r,
    and count pairs meeting d_CG >= d / (2 r) - 1."""
    members = [v for v in sorted(stratum.members) if v != ball.base]
    q = {x: q_map(ball, walls, x) for x in members}
    gaps = []
    for x in members:
        seq = wall_sequence(walls, stratum.members[x].witness)
        pos = separated_chain(walls, contact, seq)
        gaps.extend(b - a for a, b in zip(pos, pos[1:]))
    r = max(gaps) if gaps else max((int(ball.dist[x]) for x in members), default=1)
    r = max(r, 1)

    sources = sorted(set(q.values()))
    row_of = {h: i for i, h in enumerate(sources)}
    D = contact.distances_from(sources) if sources else np.zeros((0, 0))
    pairs = []
    violations = 0
    lower = 0
    connected = True
    for i, x in enumerate(members):
        for y in members[i:]:
            if not ball.trusted(x, y):
                continue
            d = ball.d(x, y)
            dcg = float(D[row_of[q[x]], q[y]])
            if math.isinf(dcg):
                connected = False
            if dcg > d:
                violations += 1
            if dcg >= d / (2 * r) - 1:
                lower += 1
            pairs.append((x, y, d, dcg))
    return QMapReport(q, pairs, violations, r, lower, connected)


@dataclass
class Distance3Check:
    walls_checked: int
    violations: list[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def distance3_check(walls: WallSet, contact: ContactGraph,
                    interior_only: bool = True) -> Distance3Check:
    """Wall pairs at contact distance >= 3 are strongly separated.

    A pair fails strong separation exactly when the walls cross or share a
    crossing wall, so it suffices that every such partner of a wall lies
    within contact distance 2 of it. By default only interior walls are
    checked, since truncation can hide crossings of the others.
    """
    interior = [h.id for h in walls.walls if h.interior or not interior_only]
    violations = []
    adj = contact.adjacency
    for h in interior:
        near = set(adj.indices[adj.indptr[h]:adj.indptr[h + 1]].tolist())
        two = set(near)
        for k in near:
            two.update(adj.indices[adj.indptr[k]:adj.indptr[k + 1]].tolist())
        blockers = set(contact.crossers[h])
        for k in contact.crossers[h]:
            blockers |= contact.crossers[k]
        blockers.discard(h)
        for g in sorted(blockers - two):
            if walls.walls[g].interior or not interior_only:
                violations.append((h, g))
    return Distance3Check(len(interior), violations)


def contact_json(walls: WallSet, contact: ContactGraph) -> dict:
    return {
        "walls": [{"id": h.id, "type": walls.type_name(h.id), "interior": h.interior}
                  for h in walls.walls],
        "edges": [{"a": a, "b": b, "crossing": c} for a, b, c in contact.edges()],
    }


def export_contact_json(walls: WallSet, contact: ContactGraph, out: IO[str]) -> None:
    json.dump(contact_json(walls, contact), out, sort_keys=True)
