"""Certifying small cancellation, then cutting a graphical presentation down.

A piece is a word that reads along the relator graph in two different
ways. The surface relator abABcdCD has no piece longer than one letter,
so it clears C'(1/6); a^2 b^2 shares the letter a with itself at two
places and fails. For a graphical presentation we then keep only the
cycles of girth at most 8 and check that the quotient by the rest never
lengthens a distance.
"""

from pathlib import Path

from morselab import GaugeSchedule, GaugeTable, LabelledGraph, load_spec
from morselab.smallcanc import check_c_prime, girth_and_diameter, truncation_embedding_check

DATA = Path(__file__).resolve().parent.parent / "data"


def certify(name):
    spec = load_spec(DATA / name)
    rep = check_c_prime(LabelledGraph.from_relators(spec.relators), 1 / 6)
    verdict = "passes" if rep.passed else f"fails on piece {spec.format(rep.witness.piece)!r}"
    print(f"  {name}: longest piece {max(rep.component_max)}, C'(1/6) {verdict}")


def truncate():
    spec = load_spec(DATA / "twocycles.grp")
    print(f"  components (girth, diameter): {sorted(girth_and_diameter(spec.graph))}")
    schedule = GaugeSchedule(((1, 0),))
    rep, ball, _, _ = truncation_embedding_check(spec, 8, 4, GaugeTable.covering(schedule, 4), schedule)
    kept = [ball.spec.generators[g] for g in rep.kept_alphabet]
    print(f"  threshold 8 keeps letters {kept}")
    print(f"  {rep.quotient_pairs} projected pairs, {rep.monotone_violations} lengthened, "
          f"{rep.witness_pairs} witness pairs with {len(rep.witness_mismatches)} mismatches")


if __name__ == "__main__":
    print("Pieces")
    for name in ("surface2.grp", "a2b2.grp"):
        certify(name)
    print("Truncation")
    truncate()
