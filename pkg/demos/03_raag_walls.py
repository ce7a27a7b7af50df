"""Walls of a right-angled Artin group and the contact graph they span.

Each generator edge belongs to a wall: the class of edges that face each
other across commuting squares. Two walls are in contact when they cross
or touch at a vertex. The map sending a vertex to the wall of the last
letter of its normal form never stretches distances, and far apart walls
in the contact graph are strongly separated.
"""

from collections import Counter

from morselab import GaugeSchedule, GaugeTable, GroupSpec, build_ball, build_stratum
from morselab.raag_cube import build_hyperplanes, contact_graph, distance3_check, embedding_report

ONLY_10 = GaugeSchedule(((1, 0),))
GRAPHS = {
    "no edges (free group)": (2, []),
    "one edge (Z^2)": (2, [("a", "b")]),
    "path a-b-c": (3, [("a", "b"), ("b", "c")]),
}


def survey(name, rank, edges, radius=6):
    ball = build_ball(GroupSpec.raag(rank, edges), radius)
    walls = build_hyperplanes(ball)
    cg = contact_graph(walls)
    kinds = Counter(walls.type_name(h.id) for h in walls.walls)
    interior = sum(h.interior for h in walls.walls)
    st = build_stratum(ball, GaugeTable.covering(ONLY_10, radius), ONLY_10)
    rep = embedding_report(ball, st, walls, cg)
    far = distance3_check(walls, cg, interior_only=False)
    print(f"{name}: {ball.n_vertices} vertices, {len(walls)} walls {dict(sorted(kinds.items()))}, "
          f"{interior} interior")
    print(f"  contact edges {len(cg.edges())}, of which crossings {len(cg.crossing)}")
    print(f"  q never stretches: {rep.upper_ok} on {len(rep.pairs)} pairs")
    print(f"  distance >= 3 implies strongly separated: {far.ok} over {far.walls_checked} walls")


if __name__ == "__main__":
    for name, (rank, edges) in GRAPHS.items():
        survey(name, rank, edges)
