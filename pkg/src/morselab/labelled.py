"""Finite directed edge-labelled graphs and their simple cycles."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from morselab.errors import CapExceededError, SpecSyntaxError, UnknownGeneratorError
from morselab.words import Word

# A cycle is a closed walk given as (edge index, traversed along orientation).
Cycle = tuple[tuple[int, bool], ...]


@dataclass(frozen=True)
class LabelledGraph:
    """Vertices are ``0..n_vertices-1``; ``edges[k] = (src, dst, gen)``.

    Traversing edge ``k`` from ``src`` to ``dst`` reads generator ``gen``,
    the other way round reads its inverse.
    """

    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]
    names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for src, dst, _ in self.edges:
            if not (0 <= src < self.n_vertices and 0 <= dst < self.n_vertices):
                raise ValueError(f"edge endpoint out of range: {src}->{dst}")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[object, object, int]]) -> "LabelledGraph":
        """Build from ``(u, v, gen)`` triples with arbitrary hashable vertex names."""
        ids: dict[object, int] = {}
        out = []
        for u, v, g in edges:
            for x in (u, v):
                if x not in ids:
                    ids[x] = len(ids)
            out.append((ids[u], ids[v], int(g)))
        return cls(len(ids), tuple(out), tuple(str(x) for x in ids))

    @classmethod
    def from_relators(cls, relators: Sequence[Word]) -> "LabelledGraph":
        """One disjoint cycle graph per relator."""
        edges = []
        offset = 0
        for rel in relators:
            n = len(rel)
            for i, c in enumerate(rel):
                a, b = offset + i, offset + (i + 1) % n
                edges.append((b, a, c >> 1) if c & 1 else (a, b, c >> 1))
            offset += n
        return cls(offset, tuple(edges), tuple(str(i) for i in range(offset)))

    @classmethod
    def parse(cls, text: str, generators: Sequence[str], first_line: int = 1) -> "LabelledGraph":
        """Parse lines ``u v label +|-``; ``-`` means the label reads v -> u."""
        lookup = {name: i for i, name in enumerate(generators)}
        triples = []
        for lineno, raw in enumerate(text.splitlines(), start=first_line):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (3, 4):
                raise SpecSyntaxError("graph edge needs 'src dst label [+|-]'", lineno, 1)
            u, v, label = parts[:3]
            direction = parts[3] if len(parts) == 4 else "+"
            if direction not in "+-" or len(direction) != 1:
                raise SpecSyntaxError(f"edge direction must be + or -, got {direction!r}",
                                      lineno, raw.find(direction) + 1)
            if label not in lookup:
                raise UnknownGeneratorError(f"unknown generator {label!r} (line {lineno})")
            triples.append((u, v, lookup[label]) if direction == "+" else (v, u, lookup[label]))
        return cls.from_edges(triples)

    def to_text(self, generators: Sequence[str]) -> str:
        names = self.names or tuple(str(i) for i in range(self.n_vertices))
        return "".join(f"{names[s]} {names[d]} {generators[g]} +\n" for s, d, g in self.edges)

    @property
    def labels(self) -> set[int]:
        return {g for _, _, g in self.edges}

    @cached_property
    def incidence(self) -> tuple[tuple[tuple[int, int, bool], ...], ...]:
        """Per vertex: (edge index, other endpoint, forward) for every incident edge.

        Loops are listed once, as forward.
        """
        inc: list[list[tuple[int, int, bool]]] = [[] for _ in range(self.n_vertices)]
        for k, (s, d, _) in enumerate(self.edges):
            inc[s].append((k, d, True))
            if s != d:
                inc[d].append((k, s, False))
        return tuple(tuple(x) for x in inc)

    def letter(self, edge: int, forward: bool) -> int:
        return 2 * self.edges[edge][2] + (not forward)

    def components(self) -> list["LabelledGraph"]:
        """Connected components as separate graphs, ordered by smallest vertex."""
        comp = [-1] * self.n_vertices
        order = []
        for start in range(self.n_vertices):
            if comp[start] >= 0:
                continue
            cid = len(order)
            comp[start] = cid
            members = [start]
            stack = [start]
            while stack:
                v = stack.pop()
                for _, w, _ in self.incidence[v]:
                    if comp[w] < 0:
                        comp[w] = cid
                        members.append(w)
                        stack.append(w)
            order.append(sorted(members))
        result = []
        for members in order:
            local = {v: i for i, v in enumerate(members)}
            edges = tuple((local[s], local[d], g) for s, d, g in self.edges if s in local)
            names = tuple(self.names[v] for v in members) if self.names else ()
            result.append(LabelledGraph(len(members), edges, names))
        return result

    @staticmethod
    def disjoint_union(parts: Sequence["LabelledGraph"]) -> "LabelledGraph":
        edges = []
        names = []
        offset = 0
        for k, part in enumerate(parts):
            edges.extend((s + offset, d + offset, g) for s, d, g in part.edges)
            part_names = part.names or tuple(str(i) for i in range(part.n_vertices))
            names.extend(f"{k}:{n}" for n in part_names)
            offset += part.n_vertices
        return LabelledGraph(offset, tuple(edges), tuple(names))

    def walk_vertices(self, start: int, walk: Sequence[tuple[int, bool]]) -> list[int]:
        verts = [start]
        for k, fwd in walk:
            s, d, _ = self.edges[k]
            if verts[-1] != (s if fwd else d):
                raise ValueError("walk is not contiguous")
            verts.append(d if fwd else s)
        return verts

    def cycle_start(self, cycle: Cycle) -> int:
        k, fwd = cycle[0]
        s, d, _ = self.edges[k]
        return s if fwd else d

    def cycle_vertices(self, cycle: Cycle) -> list[int]:
        """Vertices of a cycle, without repeating the start at the end."""
        return self.walk_vertices(self.cycle_start(cycle), cycle)[:-1]

    def cycle_label(self, cycle: Cycle) -> Word:
        return bytes(self.letter(k, fwd) for k, fwd in cycle)

    def simple_cycles(self, length_cap: int | None = None,
                      count_cap: int = 100_000) -> list[Cycle]:
        """All simple cycles, each once, rooted at its smallest vertex.

        Raises ``CapExceededError`` past ``count_cap`` cycles.
        """
        cap = length_cap if length_cap is not None else max(self.n_vertices, 1)
        found: list[Cycle] = []
        inc = self.incidence
        for s in range(self.n_vertices):
            on_path = {s}
            path: list[tuple[int, bool]] = []

            def extend(v: int) -> None:
                for k, w, fwd in inc[v]:
                    if any(k == e for e, _ in path):
                        continue
                    if w == s:
                        if not path or path[0][0] < k:
                            found.append(tuple(path) + ((k, fwd),))
                            if len(found) > count_cap:
                                raise CapExceededError(
                                    f"more than {count_cap} simple cycles")
                    elif w > s and w not in on_path and len(path) + 1 < cap:
                        on_path.add(w)
                        path.append((k, fwd))
                        extend(w)
                        path.pop()
                        on_path.discard(w)

            extend(s)
        return found
