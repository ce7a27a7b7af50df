"""Radius-R Cayley balls, exact distances and geodesic enumeration."""

from __future__ import annotations

import json
from array import array
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, NamedTuple

import numpy as np

from morselab.errors import CapExceededError, UntrustedPairError
from morselab.presentations import CanonicalSolver, GroupSpec, solver_for
from morselab.words import Word, invert

DEFAULT_VERTEX_CAP = 5_000_000


@dataclass(eq=False)
class BallGraph:
    """The ball B(e, R) of a Cayley graph.

    Vertex ids follow ShortLex order of their normal forms, so vertex 0 is
    the identity and ``words[v]`` is the ShortLex-least geodesic word for v.
    ``nbr[v, c]`` is the vertex ``v * c`` for letter code ``c``, or -1 when
    that element lies outside the ball.
    """

    spec: GroupSpec
    radius: int
    words: list[Word]
    dist: np.ndarray
    nbr: np.ndarray
    index: dict[Word, int]
    buckets: dict[tuple, list[int]] | None = None
    _dcache: dict = field(default_factory=dict, repr=False)
    _gauge_cache: dict = field(default_factory=dict, repr=False)

    base = 0

    @property
    def n_vertices(self) -> int:
        return len(self.words)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """``nbr`` as nested lists, for tight Python loops."""
        return self.nbr.tolist()

    @property
    def solver(self):
        return solver_for(self.spec)

    @property
    def exact_metric(self) -> bool:
        """True when word lengths are exact for every element, not only inside the ball."""
        return self.solver.geodesic

    def label(self, v: int) -> str:
        return self.spec.format(self.words[v])

    def vertex(self, word: Word | str) -> int:
        """Vertex id of a word (text or letter codes); KeyError if outside the ball."""
        w = self.spec.word(word) if isinstance(word, str) else word
        v = self.locate(w)
        if v is None:
            raise KeyError(f"{self.spec.format(w)!r} is outside the radius-{self.radius} ball")
        return v

    def locate(self, word: Word) -> int | None:
        solver = self.solver
        if isinstance(solver, CanonicalSolver):
            return self.index.get(solver.normal_form(word))
        v = 0
        for c in word:
            v = int(self.nbr[v, c])
            if v < 0:
                break
        else:
            return v
        w = solver.reduce(word)
        if w in self.index:
            return self.index[w]
        # both sides are Dehn-reduced: vertex words are geodesic, w is a reduct
        for u in self.buckets.get(solver.bucket(w), ()):
            if solver.equal(self.words[u], w, reduced=True):
                return u
        return None

    def word_length(self, word: Word) -> int | None:
        """Exact word length, or None when it exceeds what the ball certifies."""
        solver = self.solver
        if isinstance(solver, CanonicalSolver):
            return len(solver.normal_form(word))
        v = self.locate(word)
        return None if v is None else int(self.dist[v])

    def d(self, x: int, y: int) -> int | None:
        """Group distance between vertices; None means larger than the radius
        (only possible for small-cancellation families)."""
        if x == y:
            return 0
        key = (x, y) if x < y else (y, x)
        cache = self._dcache
        if key not in cache:
            cache[key] = self.word_length(invert(self.words[x]) + self.words[y])
        return cache[key]

    def trusted(self, x: int, y: int) -> bool:
        return int(self.dist[x]) + int(self.dist[y]) <= self.radius


def _grow(arr: array, width: int) -> None:
    arr.extend([-1] * width)


def build_ball(spec: GroupSpec, radius: int, vertex_cap: int = DEFAULT_VERTEX_CAP) -> BallGraph:
    """Breadth-first construction of B(e, radius) in ShortLex order."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    solver = solver_for(spec)
    width = 2 * spec.rank
    words: list[Word] = [b""]
    index: dict[Word, int] = {b"": 0}
    dist = array("i", [0])
    nbr = array("i")
    _grow(nbr, width)
    canonical = isinstance(solver, CanonicalSolver)
    buckets: dict[tuple, list[int]] | None = None if canonical else {solver.bucket(b""): [0]}

    frontier = [0]
    for r in range(radius + 1):
        new: list[int] = []
        for v in frontier:
            w = words[v]
            row = v * width
            for c in range(width):
                if nbr[row + c] >= 0:
                    continue
                if canonical:
                    cand = solver.multiply(w, c)
                    u = index.get(cand)
                else:
                    cand = w[:-1] if w and w[-1] == c ^ 1 else w + bytes((c,))
                    u = index.get(cand)
                    if u is None:
                        # words[t] are geodesic, hence Dehn-reduced; so is cand
                        # unless a relator-half ends at the new letter.
                        red = solver.is_reduced_suffix(cand)
                        key = solver.bucket(cand if red else solver.reduce(cand))
                        for t in buckets.get(key, ()):
                            if dist[t] >= r and solver.equal(words[t], cand, red):
                                u = t
                                break
                if u is None:
                    if r == radius:
                        continue
                    u = len(words)
                    if u >= vertex_cap:
                        raise CapExceededError(
                            f"vertex cap hit: ball of radius {radius} exceeds {vertex_cap} vertices")
                    words.append(cand)
                    index[cand] = u
                    dist.append(r + 1)
                    _grow(nbr, width)
                    if buckets is not None:
                        buckets.setdefault(key, []).append(u)
                    new.append(u)
                nbr[row + c] = u
                nbr[u * width + (c ^ 1)] = v
        frontier = new

    return BallGraph(
        spec=spec,
        radius=radius,
        words=words,
        dist=np.frombuffer(dist, dtype=np.int32).copy(),
        nbr=np.frombuffer(nbr, dtype=np.int32).reshape(-1, width).copy(),
        index=index,
        buckets=buckets,
    )


def distance(ball: BallGraph, x: int, y: int) -> int:
    """Exact word-metric distance.

    Small-cancellation balls only answer trusted pairs (|x| + |y| <= R);
    families with geodesic normal forms answer every pair.
    """
    if not ball.exact_metric and not ball.trusted(x, y):
        raise UntrustedPairError(
            f"|x|+|y| = {ball.dist[x] + ball.dist[y]} exceeds radius {ball.radius}")
    d = ball.d(x, y)
    if d is None:
        raise UntrustedPairError("distance exceeds the ball radius")
    return d


class GeodesicSet(NamedTuple):
    paths: list[list[int]]
    exact: bool


def geodesics_between(ball: BallGraph, x: int, y: int, cap: int = 1000) -> GeodesicSet:
    """Geodesic vertex paths from x to y in ShortLex order of their labels.

    ``exact`` is False when the enumeration stopped at ``cap`` paths.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if not ball.trusted(x, y):
        raise UntrustedPairError(
            f"|x|+|y| = {ball.dist[x] + ball.dist[y]} exceeds radius {ball.radius}")
    to_y: dict[int, int] = {}

    def dy(v: int) -> int:
        if v not in to_y:
            to_y[v] = ball.d(v, y)
        return to_y[v]

    paths: list[list[int]] = []
    path = [x]
    nbr = ball.nbr
    truncated = False

    def walk(v: int, remaining: int) -> bool:
        nonlocal truncated
        if remaining == 0:
            if len(paths) >= cap:
                truncated = True
                return False
            paths.append(list(path))
            return True
        for c in range(nbr.shape[1]):
            u = int(nbr[v, c])
            if u >= 0 and dy(u) == remaining - 1:
                path.append(u)
                ok = walk(u, remaining - 1)
                path.pop()
                if not ok:
                    return False
        return True

    walk(x, dy(x))
    return GeodesicSet(paths, not truncated)


def path_word(ball: BallGraph, path: list[int]) -> Word:
    """Letter sequence read along a vertex path."""
    out = bytearray()
    for a, b in zip(path, path[1:]):
        row = ball.nbr[a]
        hits = np.flatnonzero(row == b)
        if len(hits) == 0:
            raise ValueError(f"vertices {a} and {b} are not adjacent")
        out.append(int(hits[0]))
    return bytes(out)


def word_path(ball: BallGraph, start: int, word: Word) -> list[int]:
    """Vertex path from ``start`` reading ``word``; KeyError if it leaves the ball."""
    path = [start]
    for c in word:
        v = int(ball.nbr[path[-1], c])
        if v < 0:
            raise KeyError("path leaves the ball")
        path.append(v)
    return path


def sphere(ball: BallGraph, r: int) -> list[int]:
    if not 0 <= r <= ball.radius:
        raise ValueError(f"sphere radius {r} outside [0, {ball.radius}]")
    return np.flatnonzero(ball.dist == r).tolist()


def export_jsonl(ball: BallGraph, out: IO[str]) -> None:
    """One JSON object per vertex: {id, word, dist, neighbors: [{id, label}]}."""
    letters = [ball.spec.format(bytes((c,))) for c in range(ball.nbr.shape[1])]
    for v in range(ball.n_vertices):
        nbrs = [{"id": int(u), "label": letters[c]}
                for c, u in enumerate(ball.nbr[v]) if u >= 0]
        out.write(json.dumps({"id": v, "word": ball.label(v), "dist": int(ball.dist[v]),
                              "neighbors": nbrs}) + "\n")


def distance_matrix(ball: BallGraph, points: list[int]) -> np.ndarray:
    """Exact pairwise distances among ``points`` (trusted pairs only for
    small-cancellation balls). Bypasses the per-ball cache."""
    n = len(points)
    out = np.zeros((n, n), dtype=np.int64)
    words = [ball.words[p] for p in points]
    inverses = [invert(w) for w in words]
    for i in range(n):
        for j in range(i + 1, n):
            if not ball.exact_metric and not ball.trusted(points[i], points[j]):
                raise UntrustedPairError(
                    f"{ball.label(points[i])!r} and {ball.label(points[j])!r} are not a trusted pair")
            d = ball.word_length(inverses[i] + words[j])
            if d is None:
                raise UntrustedPairError("distance exceeds the ball radius")
            out[i, j] = out[j, i] = d
    return out
