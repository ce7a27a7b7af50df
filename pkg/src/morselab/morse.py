"""Discrete quasi-geodesics, empirical Morse gauges and the strata X^(N)_e.

A discrete (K, C)-quasi-geodesic is an edge path v_0, ..., v_L with
``K * (d(v_i, v_j) + C) >= j - i`` for all i < j. Unit-speed edge paths make
the upper bound automatic, so this lower bound is the whole condition (and
with i = 0, j = L it caps the length at ``floor(K * (d + C))``).

Every gauge computed here is a maximum over the paths actually enumerated,
hence a lower bound on any true Morse gauge of the geodesic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from morselab.cayley import BallGraph, geodesics_between, path_word
from morselab.errors import GuardError, InputError, UntrustedPairError

Pair = tuple[Fraction, Fraction]

DEFAULT_PAIRS = ((1, 0), (2, 0), (3, 0), (1, 2), (2, 2), (3, 2))
DEFAULT_BUDGET = 200_000
DEFAULT_GEODESIC_CAP = 1000


def _pair(kc) -> Pair:
    K, C = kc
    return Fraction(K), Fraction(C)


def pair_key(kc) -> str:
    """Text key for a (K, C) pair, e.g. ``"3,0"`` or ``"3/2,1"``."""
    K, C = _pair(kc)
    return f"{K},{C}"


@dataclass(frozen=True)
class GaugeSchedule:
    """The finite list of (K, C) arguments at which gauges are evaluated."""

    pairs: tuple[Pair, ...]

    def __post_init__(self):
        norm = []
        for kc in self.pairs:
            K, C = _pair(kc)
            if K < 1 or C < 0:
                raise InputError(f"schedule pair ({K},{C}) needs K >= 1 and C >= 0")
            norm.append((K, C))
        if not norm:
            raise InputError("gauge schedule is empty")
        object.__setattr__(self, "pairs", tuple(dict.fromkeys(norm)))

    @classmethod
    def default(cls) -> "GaugeSchedule":
        return cls(DEFAULT_PAIRS)

    @classmethod
    def parse(cls, text: str) -> "GaugeSchedule":
        """``"1,0;3,0;3/2,2"`` (semicolons or whitespace between pairs)."""
        pairs = []
        for item in text.replace(";", " ").split():
            try:
                k, c = item.split(",")
                pairs.append((Fraction(k), Fraction(c)))
            except ValueError as exc:
                raise InputError(f"bad schedule entry {item!r}; expected K,C") from exc
        return cls(tuple(pairs))

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, kc) -> bool:
        return _pair(kc) in self.pairs

    def to_text(self) -> str:
        return ";".join(pair_key(p) for p in self.pairs)


@dataclass
class GaugeTable:
    """N-hat(K, C) over a schedule, with per-pair truncation flags.

    ``partial`` marks a table whose computation stopped as soon as some
    value exceeded a comparison bound; its values are then lower bounds.
    """

    schedule: GaugeSchedule
    values: dict[Pair, int]
    truncated: dict[Pair, bool] = field(default_factory=dict)
    partial: bool = False

    def __post_init__(self):
        self.values = {_pair(k): v for k, v in self.values.items()}
        self.truncated = {_pair(k): v for k, v in self.truncated.items()}
        missing = [p for p in self.schedule if p not in self.values]
        if missing and not self.partial:
            raise InputError(f"gauge table lacks schedule pairs {missing}")

    @classmethod
    def constant(cls, schedule: GaugeSchedule, value: int) -> "GaugeTable":
        return cls(schedule, {p: int(value) for p in schedule})

    @classmethod
    def from_function(cls, schedule: GaugeSchedule,
                      fn: Callable[[Fraction, Fraction], float]) -> "GaugeTable":
        """Tabulate ``floor(fn(K, C))``; gauges are integers on a graph."""
        return cls(schedule, {p: math.floor(fn(*p)) for p in schedule})

    @classmethod
    def covering(cls, schedule: GaugeSchedule, radius: int) -> "GaugeTable":
        """N(K, C) = K*R + C, under which every geodesic of length <= R is Morse."""
        return cls.from_function(schedule, lambda K, C: K * radius + C)

    def __getitem__(self, kc) -> int:
        return self.values[_pair(kc)]

    def __le__(self, other: "GaugeTable") -> bool:
        return all(p in other.values and self.values[p] <= other.values[p]
                   for p in self.schedule)

    def within(self, bound: "GaugeTable") -> bool:
        return not self.partial and self <= bound

    @property
    def any_truncated(self) -> bool:
        return any(self.truncated.values())

    def to_json(self) -> dict:
        return {pair_key(p): self.values[p] for p in self.schedule if p in self.values}


def as_bound(bound, schedule: GaugeSchedule | None) -> GaugeTable:
    """Accept a GaugeTable or a constant integer."""
    if isinstance(bound, GaugeTable):
        return bound
    return GaugeTable.constant(schedule or GaugeSchedule.default(), int(bound))


# ------------------------------------------------------------ path search


def max_length(K, C, d: int) -> int:
    return math.floor(Fraction(K) * (d + Fraction(C)))


def _needs(K: Fraction, C: Fraction, upto: int) -> list[int]:
    """needs[g]: the least distance two path vertices g steps apart may have."""
    return [max(0, math.ceil(Fraction(g) / K - C)) for g in range(upto + 1)]


class _Search:
    """Depth-first search over (K, C) paths from ``a`` to ``b``.

    ``visit(path)`` runs on every path ending at ``b`` and returns False to
    stop; ``prune(path, remaining)`` may cut a branch and ``order`` may
    reorder the admissible next vertices. Paths may pass through ``b`` and
    carry on when the slack allows it.
    """

    def __init__(self, ball: BallGraph, K, C, budget: int):
        if budget < 1:
            raise InputError("search budget must be positive")
        self.ball = ball
        self.K, self.C = Fraction(K), Fraction(C)
        self.budget = budget
        self.nodes = 0
        self.exhausted = False
        self.unknown = False

    def run(self, a: int, b: int, Lmax: int, visit, prune=None, order=None) -> None:
        needs = _needs(self.K, self.C, Lmax)
        free = max(g for g in range(Lmax + 1) if needs[g] == 0)
        nbr = self.ball.adjacency
        d = self.ball.d
        to_b: dict[int, int | None] = {}
        path = [a]

        def admissible(v: int, i: int, rem: int) -> list[int]:
            steps = []
            for u in nbr[v]:
                if u < 0:
                    continue
                dub = to_b.get(u, -1)
                if dub == -1:
                    dub = to_b[u] = d(u, b)
                if dub is None:
                    self.unknown = True
                    continue
                if dub > rem:
                    continue
                for j in range(0, i + 1 - free):
                    duj = d(path[j], u)
                    if duj is None:
                        self.unknown = True
                        break
                    if duj < needs[i + 1 - j]:
                        break
                else:
                    steps.append(u)
            return steps

        def go() -> bool:
            v = path[-1]
            i = len(path) - 1
            if v == b and not visit(path):
                return False
            if i == Lmax:
                return True
            rem = Lmax - i - 1
            steps = admissible(v, i, rem)
            if order is not None:
                steps = order(steps)
            for u in steps:
                self.nodes += 1
                if self.nodes > self.budget:
                    self.exhausted = True
                    return False
                path.append(u)
                keep = prune is None or not prune(path, rem)
                if keep and not go():
                    path.pop()
                    return False
                path.pop()
            return True

        go()


class QuasiGeodesics(NamedTuple):
    paths: list[list[int]]
    exact: bool         # False when the node budget ran out
    max_length: int
    clipped: bool       # True when max_length was cut to keep paths in the ball


def _length_limit(ball: BallGraph, x: int, y: int, K, C, clip: bool) -> tuple[int, bool]:
    d = ball.d(x, y)
    if d is None:
        raise UntrustedPairError("endpoint distance exceeds the ball radius")
    L = max_length(K, C, d)
    room = 2 * ball.radius - int(ball.dist[x]) - int(ball.dist[y])
    if L <= room:
        return L, False
    if not clip:
        raise GuardError(
            f"|x|+|y|+K(d+C) = {L + 2 * ball.radius - room} exceeds 2R = {2 * ball.radius}")
    return max(room, d), True


def enumerate_quasigeodesics(ball: BallGraph, x: int, y: int, K, C,
                             budget: int = DEFAULT_BUDGET, clip: bool = False) -> QuasiGeodesics:
    """All discrete (K, C)-quasi-geodesic vertex paths from x to y.

    Paths come out in depth-first order over letters. The guard
    |x| + |y| + K(d + C) <= 2R keeps every path vertex inside the ball;
    ``clip=True`` shortens the length limit instead of raising and sets
    ``clipped``.
    """
    Lmax, clipped = _length_limit(ball, x, y, K, C, clip)
    found: list[list[int]] = []
    search = _Search(ball, K, C, budget)
    search.run(x, y, Lmax, lambda p: found.append(list(p)) or True)
    return QuasiGeodesics(found, not (search.exhausted or search.unknown), Lmax, clipped)


def is_quasigeodesic(ball: BallGraph, path: Sequence[int], K, C) -> bool:
    """Check the discrete (K, C) condition on every pair of path vertices."""
    K, C = Fraction(K), Fraction(C)
    for i in range(len(path)):
        for j in range(i + 1, len(path)):
            dij = ball.d(path[i], path[j])
            if dij is None:
                raise UntrustedPairError("path vertices too far apart for the ball")
            if K * (dij + C) < j - i:
                return False
    return True


# ------------------------------------------------------------ gauges


class _PathDistance:
    """Cached distance from ball vertices to a fixed vertex set."""

    def __init__(self, ball: BallGraph, targets: Iterable[int]):
        self.ball = ball
        self.targets = list(dict.fromkeys(targets))
        self.cache: dict[int, int] = {}

    def __call__(self, v: int) -> int:
        got = self.cache.get(v)
        if got is None:
            best = None
            for t in self.targets:
                dt = self.ball.d(v, t)
                if dt is not None and (best is None or dt < best):
                    best = dt
                    if best == 0:
                        break
            if best is None:
                raise UntrustedPairError("point too far from the path for the ball")
            got = self.cache[v] = best
        return got


def _max_escape(ball: BallGraph, to_gamma: _PathDistance, a: int, b: int, K, C,
                Lmax: int, budget: int, best: int, stop_above: int | None) -> tuple[int, bool]:
    """Largest distance from gamma reached by a (K, C) path a -> b, if above ``best``.

    Branch and bound: a vertex s steps ahead of u is within dist(u)+s of
    gamma and within ``remaining - s`` of b (which lies on gamma), so no
    completion of the branch gets further than (dist(u) + remaining) // 2.
    """
    state = {"best": best}
    peak = [to_gamma(a)]    # running maxima of the distance along the current path

    def visit(path) -> bool:
        if peak[len(path) - 1] > state["best"]:
            state["best"] = peak[len(path) - 1]
        return stop_above is None or state["best"] <= stop_above

    def prune(path, rem) -> bool:
        here = to_gamma(path[-1])
        cur = max(peak[len(path) - 2], here)
        del peak[len(path) - 1:]
        peak.append(cur)
        return max(cur, (here + rem) // 2) <= state["best"]

    def order(steps):
        return sorted(steps, key=to_gamma, reverse=True)

    if (to_gamma(a) + Lmax) // 2 <= best:
        return best, False
    search = _Search(ball, K, C, budget)
    search.run(a, b, Lmax, visit, prune, order)
    return state["best"], search.exhausted or search.unknown


def empirical_gauge(ball: BallGraph, gamma: Sequence[int], schedule: GaugeSchedule | None = None,
                    budget: int = DEFAULT_BUDGET, clip: bool = False,
                    stop_above: GaugeTable | None = None) -> GaugeTable:
    """N-hat(K, C): how far (K, C)-quasi-geodesics with endpoints on ``gamma`` stray from it.

    ``gamma`` is a vertex path. Every pair of its vertices (including a
    vertex with itself, for closed paths when C > 0) is probed. With
    ``stop_above`` the computation returns as soon as some value exceeds
    that bound, flagged ``partial``.
    """
    schedule = schedule or GaugeSchedule.default()
    to_gamma = _PathDistance(ball, gamma)
    pairs = [(i, j) for i in range(len(gamma)) for j in range(i, len(gamma))]
    pairs.sort(key=lambda ij: ij[0] - ij[1])
    values: dict[Pair, int] = {}
    truncated: dict[Pair, bool] = {}
    for kc in schedule:
        K, C = kc
        limit = None if stop_above is None else stop_above[kc]
        best, flag = 0, False
        for i, j in pairs:
            a, b = gamma[i], gamma[j]
            Lmax, clipped = _length_limit(ball, a, b, K, C, clip)
            best, cut = _max_escape(ball, to_gamma, a, b, K, C, Lmax, budget, best, limit)
            flag = flag or clipped or cut
            if limit is not None and best > limit:
                values[kc] = best
                truncated[kc] = flag
                return GaugeTable(schedule, values, truncated, partial=True)
        values[kc] = best
        truncated[kc] = flag
    return GaugeTable(schedule, values, truncated)


# ------------------------------------------------------------ strata


@dataclass
class StratumMember:
    vertex: int
    witness: list[int]
    gauge: GaugeTable
    truncated: bool


@dataclass
class StratumReport:
    """Members of the empirical stratum inside the membership radius R // 2."""

    ball: BallGraph
    bound: GaugeTable
    schedule: GaugeSchedule
    members: dict[int, StratumMember]
    candidates: list[int]
    rejected_truncated: list[int]

    @property
    def membership_radius(self) -> int:
        return self.ball.radius // 2

    @property
    def vertices(self) -> list[int]:
        return sorted(self.members)

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self) -> dict:
        ball = self.ball
        return {
            "bound": self.bound.to_json(),
            "schedule": self.schedule.to_text(),
            "radius": ball.radius,
            "membership_radius": self.membership_radius,
            "candidates": len(self.candidates),
            "members": [
                {
                    "word": ball.label(m.vertex),
                    "dist": int(ball.dist[m.vertex]),
                    "witness": ball.spec.format(path_word(ball, m.witness)),
                    "gauge": m.gauge.to_json(),
                    "truncated": m.truncated,
                }
                for m in (self.members[v] for v in self.vertices)
            ],
            "rejected_with_truncation": [ball.label(v) for v in self.rejected_truncated],
        }


def build_stratum(ball: BallGraph, bound, schedule: GaugeSchedule | None = None,
                  geodesic_cap: int = DEFAULT_GEODESIC_CAP,
                  budget: int = DEFAULT_BUDGET) -> StratumReport:
    """Vertices x with |x| <= R/2 having a geodesic [e, x] whose empirical gauge is <= bound.

    Geodesics are tried in ShortLex order of their labels; the first that
    passes is the witness. Quasi-geodesic probes are clipped to stay in the
    ball, which only shrinks the enumerated family (gauges stay lower bounds).
    """
    bound = as_bound(bound, schedule)
    schedule = schedule or bound.schedule
    missing = [p for p in schedule if p not in bound.values]
    if missing:
        raise InputError(f"bound undefined at {[pair_key(p) for p in missing]}")
    limit = ball.radius // 2
    candidates = [v for v in range(ball.n_vertices) if ball.dist[v] <= limit]
    members: dict[int, StratumMember] = {}
    rejected: list[int] = []
    for v in candidates:
        geos = geodesics_between(ball, ball.base, v, geodesic_cap)
        flagged = not geos.exact
        for path in geos.paths:
            key = (tuple(path), schedule.pairs, budget)
            table = ball._gauge_cache.get(key)
            if table is None:
                table = empirical_gauge(ball, path, schedule, budget, clip=True, stop_above=bound)
                if not table.partial:
                    # complete tables do not depend on the bound, so later strata reuse them
                    ball._gauge_cache[key] = table
            flagged = flagged or table.any_truncated
            if table.within(bound):
                members[v] = StratumMember(v, path, table, flagged)
                break
        else:
            if flagged:
                rejected.append(v)
    return StratumReport(ball, bound, schedule, members, candidates, rejected)


# ------------------------------------------------------------ lemma probes


class SlimReport(NamedTuple):
    defect: int
    bound: int | None       # 4 * N(3,0) when (3,0) is scheduled
    side: list[int]         # the x -> y geodesic achieving the defect
    exact: bool             # False if the x -> y geodesics were capped

    @property
    def ok(self) -> bool:
        return self.bound is None or self.defect <= self.bound


def _require_member(stratum: StratumReport, v: int) -> StratumMember:
    if v not in stratum.members:
        raise InputError(f"vertex {stratum.ball.label(v)!r} is not a stratum member")
    return stratum.members[v]


def _side_gap(ball: BallGraph, side: Sequence[int], others: Sequence[int]) -> int:
    near = _PathDistance(ball, others)
    return max(near(p) for p in side)


def slim_defect(ball: BallGraph, stratum: StratumReport, x: int, y: int,
                geodesic_cap: int = DEFAULT_GEODESIC_CAP) -> SlimReport:
    """Least D such that the triangle (witness e->x, witness e->y, [x, y]) is D-slim,
    minimised over the geodesics [x, y]."""
    gx = _require_member(stratum, x).witness
    gy = _require_member(stratum, y).witness
    n30 = stratum.bound.values.get((Fraction(3), Fraction(0)))
    bound = None if n30 is None else 4 * n30
    if x == y:
        return SlimReport(0, bound, [x], True)
    if not ball.trusted(x, y):
        raise UntrustedPairError("triangle does not fit the trusted radius")
    geos = geodesics_between(ball, x, y, geodesic_cap)
    best, best_side = None, None
    for side in geos.paths:
        D = max(_side_gap(ball, gx, gy + side),
                _side_gap(ball, gy, gx + side),
                _side_gap(ball, side, gx + gy))
        if best is None or D < best:
            best, best_side = D, side
            if D == 0:
                break
    return SlimReport(best, bound, best_side, geos.exact)


@dataclass
class ConcatReport:
    z: int
    first_ok: bool               # x1 -> z -> e is a (3,0)-quasi-geodesic
    second_ok: bool              # x2 -> z -> e likewise
    z_offsets: tuple[int, int]   # d(z, l1), d(z, l2)
    n30: int
    hypothesis: bool             # divergence hypothesis satisfiable in the ball
    t0: int | None = None
    long_path: list[int] | None = None
    long_ok: bool | None = None  # P is a (1, 12 N(3,0))-quasi-geodesic

    @property
    def ok(self) -> bool:
        return self.first_ok and self.second_ok and self.long_ok is not False


def concat_qg_check(ball: BallGraph, l1: Sequence[int], l2: Sequence[int], n30: int) -> ConcatReport:
    """Probe the two concatenation lemmas for geodesics l1, l2 issuing from e.

    First: with z a point of a geodesic [x1, x2] closest to e, the paths
    x_i -> z -> e are (3,0)-quasi-geodesics. Second: if d(l1(t), l2(t)) > 4N
    from some t0 on with d(l1(t0), l2(t0)) <= 6N, the path l1 backwards to
    l1(t0), a geodesic across, then l2 forwards is a (1, 12N)-quasi-geodesic.
    """
    l1, l2 = list(l1), list(l2)
    if l1[0] != ball.base or l2[0] != ball.base:
        raise InputError("both geodesics must start at the base vertex")
    x1, x2 = l1[-1], l2[-1]
    if not ball.trusted(x1, x2):
        raise UntrustedPairError("geodesic endpoints are not a trusted pair")
    across = geodesics_between(ball, x1, x2, 1).paths[0]
    k = min(range(len(across)), key=lambda i: (int(ball.dist[across[i]]), i))
    z = across[k]
    back = geodesics_between(ball, z, ball.base, 1).paths[0]
    phi1 = across[:k + 1] + back[1:]
    phi2 = across[::-1][:len(across) - k] + back[1:]
    offsets = (_PathDistance(ball, l1)(z), _PathDistance(ball, l2)(z))
    report = ConcatReport(z, is_quasigeodesic(ball, phi1, 3, 0),
                          is_quasigeodesic(ball, phi2, 3, 0), offsets, n30, False)

    T = min(len(l1), len(l2))
    gaps = [ball.d(l1[t], l2[t]) for t in range(T)]
    tail = T
    while tail > 0 and gaps[tail - 1] > 4 * n30:
        tail -= 1
    t0 = next((t for t in range(tail, T) if gaps[t] <= 6 * n30), None)
    if t0 is None:
        return report
    report.hypothesis = True
    report.t0 = t0
    bridge = geodesics_between(ball, l1[t0], l2[t0], 1).paths[0]
    P = l1[t0:][::-1] + bridge[1:] + l2[t0 + 1:]
    report.long_path = P
    report.long_ok = is_quasigeodesic(ball, P, 1, 12 * n30)
    return report


class TransferReport(NamedTuple):
    gauge: GaugeTable        # pointwise max over the geodesics [a, b]
    geodesics: int
    exact: bool


def transfer_gauge(ball: BallGraph, stratum: StratumReport, a: int, b: int,
                   geodesic_cap: int = 100, budget: int = DEFAULT_BUDGET) -> TransferReport:
    """Measured N' for geodesics between two members (no formula is asserted)."""
    _require_member(stratum, a)
    _require_member(stratum, b)
    if not ball.trusted(a, b):
        raise UntrustedPairError("members are not a trusted pair")
    geos = geodesics_between(ball, a, b, geodesic_cap)
    schedule = stratum.schedule
    values = {p: 0 for p in schedule}
    truncated = {p: False for p in schedule}
    for path in geos.paths:
        table = empirical_gauge(ball, path, schedule, budget, clip=True)
        for p in schedule:
            values[p] = max(values[p], table.values[p])
            truncated[p] = truncated[p] or table.truncated[p]
    exact = geos.exact and not any(truncated.values())
    return TransferReport(GaugeTable(schedule, values, truncated), len(geos.paths), exact)
