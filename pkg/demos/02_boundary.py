"""From Gromov products to a metric on a finite piece of the boundary.

Points on a sphere stand in for boundary points. Their Gromov products
give rho = exp(-eps (x|y)); taking the cheapest chain between two points
turns rho into a genuine metric, which stays within a factor of rho as
long as eps is small compared to the measured delta.
"""

import numpy as np

from morselab import GaugeSchedule, GaugeTable, GroupSpec, build_ball, build_stratum, sphere
from morselab.boundary import (
    boundary_proxy,
    capacity_dim_estimate,
    chain_visual_metric,
    epsilon_max,
    four_point_delta,
    gromov_products,
)


def show(name, ball, points, frac=0.9):
    products = gromov_products(ball, points)
    delta = four_point_delta(products)
    eps = frac * epsilon_max(delta)
    metric = chain_visual_metric(boundary_proxy(ball, points, eps))
    off = ~np.eye(len(points), dtype=bool)
    ratio = (metric.d[off] / metric.d[off].max()).min() if len(points) > 1 else 1.0
    # probe at the three smallest distances that actually occur
    scales = np.unique(np.round(metric.d[off], 9))[:3].tolist() or [1.0]
    dim, _ = capacity_dim_estimate(metric.d, scales)
    print(f"{name}: {len(points)} points, delta {delta}, eps {eps:.3f}")
    print(f"  chain metric within bounds: {metric.ok} (smallest relative distance {ratio:.3f})")
    print(f"  capacity dimension estimate at scales {[round(x, 3) for x in scales]}: {dim}")


if __name__ == "__main__":
    tree = build_ball(GroupSpec.free(2), 5)
    show("free group, sphere of radius 5", tree, sphere(tree, 5))

    p3 = build_ball(GroupSpec.raag(3, [("a", "b"), ("b", "c")]), 6)
    schedule = GaugeSchedule(((1, 0), (3, 0)))
    stratum = build_stratum(p3, GaugeTable.from_function(schedule, lambda K, C: 2 * (K - 1) + 1), schedule)
    rim = [v for v in stratum.vertices if p3.dist[v] == stratum.membership_radius]
    show("Raag(a-b-c), stratum points on the sphere of radius 3", p3, rim)
