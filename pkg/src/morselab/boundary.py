"""Gromov products, four-point hyperbolicity, visual metrics on sphere proxies,
quasi-symmetry ratios and cover-based dimension probes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import floyd_warshall

from morselab.cayley import BallGraph, distance_matrix
from morselab.errors import InputError

TOL = 1e-9
DEFAULT_EPSILON_AT_ZERO = 1.0


@dataclass(frozen=True)
class ProductMatrix:
    """Gromov products (x.y)_base among ``points``, stored doubled as integers.

    ``doubled[i, j] = d(b, x_i) + d(b, x_j) - d(x_i, x_j)`` is exact; the
    half-integer products are ``doubled / 2``.
    """

    points: tuple[int, ...]
    base: int
    doubled: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.doubled / 2.0

    def product(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.doubled[i, j]), 2)

    def restrict(self, keep: Sequence[int]) -> "ProductMatrix":
        """Sub-matrix on the given vertices (which must be among ``points``)."""
        pos = {p: k for k, p in enumerate(self.points)}
        idx = [pos[p] for p in keep]
        return ProductMatrix(tuple(keep), self.base, self.doubled[np.ix_(idx, idx)])


def gromov_products(ball: BallGraph, points: Sequence[int], base: int | None = None) -> ProductMatrix:
    base = ball.base if base is None else base
    pts = list(points)
    D = distance_matrix(ball, [base] + pts)
    to_base = D[0, 1:]
    doubled = to_base[:, None] + to_base[None, :] - D[1:, 1:]
    return ProductMatrix(tuple(pts), base, doubled)


def four_point_delta(products: ProductMatrix) -> Fraction:
    """Least delta >= 0 with (x.y) >= min((x.z), (z.y)) - delta over all triples."""
    P = products.doubled
    worst = 0
    for z in range(P.shape[0]):
        gap = np.minimum(P[:, z][:, None], P[z, :][None, :]) - P
        worst = max(worst, int(gap.max()))
    return Fraction(worst, 2)


def epsilon_max(delta, default: float = DEFAULT_EPSILON_AT_ZERO) -> float:
    """Largest eps with exp(2 delta eps) - 1 <= sqrt(2) - 1, i.e. ln(sqrt 2) / (2 delta)."""
    delta = float(delta)
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if delta == 0:
        return default
    return math.log(math.sqrt(2)) / (2 * delta)


def epsilon_prime(delta, eps: float) -> float:
    return math.exp(2 * float(delta) * eps) - 1


@dataclass(frozen=True)
class BoundaryProxy:
    """A finite stand-in for the boundary: sphere points with rho = exp(-eps (x.y))."""

    products: ProductMatrix
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise InputError("epsilon must be positive")

    @property
    def points(self) -> tuple[int, ...]:
        return self.products.points

    @property
    def rho(self) -> np.ndarray:
        return np.exp(-self.eps * self.products.values)


def boundary_proxy(ball: BallGraph, points: Sequence[int], eps: float,
                   base: int | None = None) -> BoundaryProxy:
    return BoundaryProxy(gromov_products(ball, points, base), eps)


@dataclass
class ChainMetric:
    d: np.ndarray
    delta: Fraction
    eps: float
    eps_prime: float
    lower_ok: bool       # (1 - 2 eps') rho <= d off the diagonal
    upper_ok: bool       # d <= rho
    worst_lower: float   # largest (1 - 2 eps') rho - d
    worst_upper: float   # largest d - rho

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def chain_visual_metric(proxy: BoundaryProxy, delta=None, tol: float = TOL) -> ChainMetric:
    """Infimum over finite chains of summed rho, with both comparison bounds checked.

    ``delta`` defaults to the four-point delta of the proxy's own products.
    Raises InputError when eps exceeds epsilon_max(delta).
    """
    delta = four_point_delta(proxy.products) if delta is None else Fraction(delta)
    limit = epsilon_max(delta)
    if proxy.eps > limit + tol:
        raise InputError(f"epsilon {proxy.eps} exceeds epsilon_max = {limit!r} for delta = {delta}")
    rho = proxy.rho
    n = rho.shape[0]
    weights = rho.copy()
    np.fill_diagonal(weights, 0.0)
    d = floyd_warshall(weights, directed=False) if n else weights
    eps_p = epsilon_prime(delta, proxy.eps)
    off = ~np.eye(n, dtype=bool)
    low = ((1 - 2 * eps_p) * rho - d)[off]
    high = (d - rho)[off]
    worst_low = float(low.max()) if low.size else 0.0
    worst_high = float(high.max()) if high.size else 0.0
    return ChainMetric(d, delta, proxy.eps, eps_p, worst_low <= tol, worst_high <= tol,
                       worst_low, worst_high)


@dataclass
class ProductComparison:
    common: tuple[int, ...]
    equal: bool
    max_difference: Fraction
    documented_bound: int | None   # 32 * N'(3,0) for the larger stratum


def product_comparison(ball: BallGraph, small, large, pairs: Sequence[tuple[int, int]] | None = None,
                       n30_large: int | None = None) -> ProductComparison:
    """Products restricted from the larger stratum agree with those of the smaller.

    ``small`` and ``large`` are member collections (or StratumReports) on
    the same ball; products are ambient, so the check is exact equality.
    """
    small_set = set(small.members if hasattr(small, "members") else small)
    large_set = set(large.members if hasattr(large, "members") else large)
    if not small_set <= large_set:
        raise InputError("strata are not nested")
    if n30_large is None and hasattr(large, "bound"):
        n30_large = large.bound.values.get((Fraction(3), Fraction(0)))
    common = tuple(sorted(small_set))
    if pairs is not None:
        common = tuple(sorted({v for pair in pairs for v in pair} & small_set))
    ps = gromov_products(ball, common)
    pl = gromov_products(ball, sorted(large_set)).restrict(common)
    diff = np.abs(ps.doubled - pl.doubled)
    worst = Fraction(int(diff.max()), 2) if diff.size else Fraction(0)
    bound = None if n30_large is None else 32 * n30_large
    return ProductComparison(common, worst == 0, worst, bound)


@dataclass
class QuasiSymmetrySamples:
    samples: np.ndarray      # rows (ratio in, ratio out)
    exponent: float
    c: float                 # least c with out <= c * in ** exponent


def quasi_symmetry_samples(dA: np.ndarray, dB: np.ndarray, exponent: float = 1.0) -> QuasiSymmetrySamples:
    """Distance ratios d(x,y)/d(x,z) before and after, over all distinct triples."""
    dA = np.asarray(dA, dtype=float)
    dB = np.asarray(dB, dtype=float)
    if dA.shape != dB.shape or dA.ndim != 2 or dA.shape[0] != dA.shape[1]:
        raise InputError("metric matrices must be square and of equal shape")
    n = dA.shape[0]
    off = ~np.eye(n, dtype=bool)
    if (dA[off] <= 0).any() or (dB[off] <= 0).any():
        raise InputError("zero distance between distinct points")
    rows = []
    for x in range(n):
        others = np.flatnonzero(np.arange(n) != x)
        a, b = dA[x, others], dB[x, others]
        rin = a[:, None] / a[None, :]
        rout = b[:, None] / b[None, :]
        mask = ~np.eye(len(others), dtype=bool)
        rows.append(np.column_stack([rin[mask], rout[mask]]))
    samples = np.vstack(rows) if rows else np.zeros((0, 2))
    c = float((samples[:, 1] / samples[:, 0] ** exponent).max()) if len(samples) else 1.0
    return QuasiSymmetrySamples(samples, exponent, c)


# ------------------------------------------------------------ covers


@dataclass
class CoverCertificate:
    scale: float
    cover: list[list[int]]
    multiplicity: int
    lebesgue: float          # math.inf when some member is the whole set
    mesh: float              # largest member diameter

    @property
    def delta(self) -> float:
        return self.lebesgue / self.scale if self.scale > 0 else math.inf

    def verify(self, metric: np.ndarray, tol: float = TOL) -> bool:
        """Recompute multiplicity, Lebesgue number and mesh from the cover."""
        n = metric.shape[0]
        covered = sorted({p for member in self.cover for p in member})
        if covered != list(range(n)):
            return False
        mult, leb, mesh = _cover_stats(metric, self.cover)
        return (mult == self.multiplicity and mesh <= self.scale + tol
                and abs(mesh - self.mesh) <= tol
                and (leb == self.lebesgue or abs(leb - self.lebesgue) <= tol))

    def to_json(self) -> dict:
        return {
            "scale": self.scale,
            "cover": self.cover,
            "multiplicity": self.multiplicity,
            "lebesgue": None if math.isinf(self.lebesgue) else self.lebesgue,
            "delta": None if math.isinf(self.delta) else self.delta,
            "mesh": self.mesh,
        }


def _as_metric(metric) -> np.ndarray:
    metric = np.asarray(metric, dtype=float)
    if metric.size == 0:
        raise InputError("empty point set")
    if metric.ndim != 2 or metric.shape[0] != metric.shape[1]:
        raise InputError("metric must be a square matrix")
    if np.abs(np.diag(metric)).max() > TOL:
        raise InputError("metric has a nonzero diagonal")
    return metric


def _cover_stats(metric: np.ndarray, cover: list[list[int]]) -> tuple[int, float, float]:
    n = metric.shape[0]
    member = np.zeros((len(cover), n), dtype=bool)
    for k, part in enumerate(cover):
        member[k, part] = True
    mult = int(member.sum(axis=0).max()) if n else 0
    mesh = max((float(metric[np.ix_(p, p)].max()) for p in cover), default=0.0)
    leb = math.inf
    for x in range(n):
        best = 0.0
        for k in np.flatnonzero(member[:, x]):
            outside = ~member[k]
            reach = float(metric[x, outside].min()) if outside.any() else math.inf
            best = max(best, reach)
        leb = min(leb, best)
    return mult, leb, mesh


def _net_cover(metric: np.ndarray, scale: float) -> list[list[int]]:
    """Closed balls of radius scale/2 around a greedy scale/2-separated net."""
    n = metric.shape[0]
    half = scale / 2
    net: list[int] = []
    for x in range(n):
        if all(metric[x, y] > half + TOL for y in net):
            net.append(x)
    cover = []
    seen = set()
    for c in net:
        part = tuple(np.flatnonzero(metric[c] <= half + TOL).tolist())
        if part not in seen:
            seen.add(part)
            cover.append(list(part))
    return cover


def capacity_dim_estimate(metric: np.ndarray, scales: Sequence[float]) -> tuple[int, list[CoverCertificate]]:
    """Upper-bound heuristic: max over scales of (cover multiplicity - 1).

    Each scale r gets a cover by closed r/2-balls around a greedy
    r/2-separated net, so members have diameter <= r and every point is
    covered.
    """
    metric = _as_metric(metric)
    if not len(scales):
        raise InputError("at least one scale is required")
    certs = []
    for r in scales:
        if not r > 0:
            raise InputError("scales must be positive")
        cover = _net_cover(metric, float(r))
        mult, leb, mesh = _cover_stats(metric, cover)
        certs.append(CoverCertificate(float(r), cover, mult, leb, mesh))
    return max(c.multiplicity for c in certs) - 1, certs


def greedy_bounded_cover(metric: np.ndarray, mesh: float) -> list[list[int]]:
    """Seeds in index order; each takes the still-uncovered points closer than ``mesh``."""
    n = metric.shape[0]
    free = np.ones(n, dtype=bool)
    cover = []
    for seed in range(n):
        if not free[seed]:
            continue
        part = np.flatnonzero(free & (metric[seed] < mesh))
        free[part] = False
        cover.append(part.tolist())
    return cover


def cover_multiplicity_at_scale(metric: np.ndarray, R_scale: float, mesh: float) -> int:
    """Largest number of cover members meeting a closed R_scale-ball, minus one."""
    metric = _as_metric(metric)
    cover = greedy_bounded_cover(metric, mesh)
    owner = np.empty(metric.shape[0], dtype=int)
    for k, part in enumerate(cover):
        owner[part] = k
    worst = 0
    for x in range(metric.shape[0]):
        near = metric[x] <= R_scale + TOL
        worst = max(worst, len(np.unique(owner[near])))
    return worst - 1
