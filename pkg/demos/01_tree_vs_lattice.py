"""Why a tree is Morse everywhere and a flat plane is not.

In the free group every geodesic is the unique path between its ends, so
no quasi-geodesic can wander away from it. In Z^2 the diagonal direction
leaves room for a whole box of geodesics, and the best of them still
lets (1,0)-quasi-geodesics reach the far corner of the box.
"""

from morselab import GaugeSchedule, GaugeTable, GroupSpec, build_ball, build_stratum, empirical_gauge
from morselab.cayley import geodesics_between, word_path

ONLY_10 = GaugeSchedule(((1, 0),))


def tree():
    ball = build_ball(GroupSpec.free(2), 6)
    for word in ("aaa", "abAb", "abab"):
        gamma = word_path(ball, 0, ball.spec.word(word))
        print(f"  free group, geodesic to {word:5s}: N(1,0) = {empirical_gauge(ball, gamma, ONLY_10)[(1, 0)]}")


def lattice():
    zz = GroupSpec.free_abelian(2)
    for radius in (4, 6, 8, 10):
        ball = build_ball(zz, radius)
        m = radius // 2
        corner = ball.vertex("a" * m + "b" * m)
        geos = geodesics_between(ball, 0, corner, cap=10**6)
        best = min(empirical_gauge(ball, p, ONLY_10)[(1, 0)] for p in geos.paths)
        print(f"  Z^2, corner a^{m} b^{m}: {len(geos.paths):3d} geodesics, best N(1,0) = {best}")


def strata():
    zz = build_ball(GroupSpec.free_abelian(2), 8)
    for bound in (0, 1):
        st = build_stratum(zz, GaugeTable.constant(ONLY_10, bound), ONLY_10)
        trusted = int((zz.dist <= st.membership_radius).sum())
        print(f"  Z^2 stratum with N(1,0) <= {bound}: {len(st)} of {trusted} vertices")


if __name__ == "__main__":
    print("Geodesics in a tree")
    tree()
    print("The diagonal of the plane")
    lattice()
    print("Strata")
    strata()
