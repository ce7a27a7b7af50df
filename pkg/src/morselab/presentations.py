"""Group specifications, the ``.grp`` format and per-family word problems."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import sympy
from sympy.matrices.normalforms import smith_normal_decomp

from morselab.errors import (
    InputError,
    SpecSyntaxError,
    UnknownGeneratorError,
    UnsupportedFamilyError,
)
from morselab.labelled import LabelledGraph
from morselab.words import (
    EMPTY,
    Word,
    cyclic_permutations,
    cyclic_reduce,
    exponent_sums,
    format_word,
    free_reduce,
    invert,
    parse_word,
)

FAMILIES = ("free", "free-abelian", "raag", "classical-sc", "graphical-sc")
CANONICAL_FAMILIES = ("free", "free-abelian", "raag")


@dataclass(frozen=True)
class GroupSpec:
    family: str
    generators: tuple[str, ...]
    edges: frozenset[frozenset[int]] = frozenset()
    relators: tuple[Word, ...] = ()
    graph: LabelledGraph | None = None
    lam: float | None = None
    cycle_cap: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnsupportedFamilyError(f"unknown family {self.family!r}")
        if len(set(self.generators)) != len(self.generators):
            raise InputError("duplicate generator names")
        if self.lam is not None and not 0 < self.lam < 1:
            raise InputError(f"lambda must lie in (0,1), got {self.lam}")

    @property
    def rank(self) -> int:
        return len(self.generators)

    @classmethod
    def free(cls, generators: int | Sequence[str]) -> "GroupSpec":
        return cls("free", _names(generators))

    @classmethod
    def free_abelian(cls, generators: int | Sequence[str]) -> "GroupSpec":
        return cls("free-abelian", _names(generators))

    @classmethod
    def raag(cls, generators: int | Sequence[str], edges) -> "GroupSpec":
        """``edges`` are pairs of generator names or indices."""
        names = _names(generators)
        lookup = {n: i for i, n in enumerate(names)}
        pairs = set()
        for u, v in edges:
            i = lookup[u] if isinstance(u, str) else int(u)
            j = lookup[v] if isinstance(v, str) else int(v)
            if i == j:
                raise InputError(f"self-loop on generator {names[i]!r}")
            pairs.add(frozenset((i, j)))
        return cls("raag", names, edges=frozenset(pairs))

    @classmethod
    def classical_sc(cls, generators: int | Sequence[str], relators, lam: float | None = None) -> "GroupSpec":
        names = _names(generators)
        rels = []
        for r in relators:
            w = parse_word(r, names) if isinstance(r, str) else bytes(r)
            w = cyclic_reduce(w)
            if not w:
                raise InputError("relator is trivial after cyclic reduction")
            if w not in rels:
                rels.append(w)
        return cls("classical-sc", names, relators=tuple(rels), lam=lam)

    @classmethod
    def graphical_sc(cls, generators: int | Sequence[str], graph: LabelledGraph,
                     lam: float | None = None, cycle_cap: int | None = None) -> "GroupSpec":
        names = _names(generators)
        if any(g >= len(names) for g in graph.labels):
            raise UnknownGeneratorError("graph label outside generator list")
        return cls("graphical-sc", names, graph=graph, lam=lam, cycle_cap=cycle_cap)

    def commutes(self, i: int, j: int) -> bool:
        if i == j or self.family == "free-abelian":
            return True
        return self.family == "raag" and frozenset((i, j)) in self.edges

    def relator_words(self) -> tuple[Word, ...]:
        """Cyclically reduced defining relators (cycle labels for graphical input)."""
        if self.family == "classical-sc":
            return self.relators
        if self.family == "graphical-sc":
            return _graph_relators(self.graph, self.cycle_cap)
        if self.family in ("raag", "free-abelian"):
            out = []
            for i in range(self.rank):
                for j in range(i + 1, self.rank):
                    if self.commutes(i, j):
                        out.append(bytes((2 * i, 2 * j, 2 * i + 1, 2 * j + 1)))
            return tuple(out)
        return ()

    def word(self, text: str) -> Word:
        return parse_word(text, self.generators)

    def format(self, word: Word) -> str:
        return format_word(word, self.generators)

    def describe(self) -> dict:
        out: dict = {"family": self.family, "generators": list(self.generators)}
        if self.family == "raag":
            out["edges"] = sorted(
                "-".join(self.generators[i] for i in sorted(e)) for e in self.edges)
        if self.family in ("classical-sc", "graphical-sc"):
            out["relators"] = [self.format(r) for r in self.relator_words()]
        if self.lam is not None:
            out["lambda"] = self.lam
        return out


def _names(generators: int | Sequence[str]) -> tuple[str, ...]:
    if isinstance(generators, int):
        return tuple("abcdefghijklmnopqrstuvwxyz"[:generators])
    return tuple(generators)


def _graph_relators(graph: LabelledGraph, cycle_cap: int | None) -> tuple[Word, ...]:
    if cycle_cap is None:
        from morselab.smallcanc import girth_and_diameter

        girths = [g for g, _ in girth_and_diameter(graph) if g != float("inf")]
        cycle_cap = 2 * max(girths) if girths else 1
    rels = []
    for cyc in graph.simple_cycles(length_cap=cycle_cap):
        w = cyclic_reduce(graph.cycle_label(cyc))
        if w and w not in rels:
            rels.append(w)
    return tuple(rels)


# ---------------------------------------------------------------- parsing

_KEY = re.compile(r"^([A-Za-z_-]+)\s*:(.*)$")


def parse_spec(text: str, base_dir: Path | None = None) -> GroupSpec:
    """Parse the ``.grp`` text format.

    ``family:`` and ``generators:`` come first; then ``edges: a-b b-c`` for
    raag, ``relators:`` for classical-sc, ``graph:`` for graphical-sc (edge
    lines follow, or a file path is given inline) and optionally ``lambda:``.
    """
    fields: dict[str, tuple[str, int]] = {}
    graph_lines: list[str] = []
    graph_first = 0
    in_graph = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _KEY.match(line.strip())
        if m and not (in_graph and not m.group(1).lower() in _KEYS):
            key = m.group(1).lower()
            if key not in _KEYS:
                raise SpecSyntaxError(f"unknown key {key!r}", lineno, 1)
            if key in fields:
                raise SpecSyntaxError(f"duplicate key {key!r}", lineno, 1)
            fields[key] = (m.group(2).strip(), lineno)
            in_graph = key == "graph" and not m.group(2).strip()
            if in_graph:
                graph_first = lineno + 1
            continue
        if in_graph:
            graph_lines.append(line)
            continue
        raise SpecSyntaxError(f"expected 'key: value', got {line.strip()!r}", lineno,
                              len(raw) - len(raw.lstrip()) + 1)

    if "family" not in fields:
        raise SpecSyntaxError("missing 'family:' line", 1, 1)
    family, fline = fields["family"]
    family = family.lower()
    if family not in FAMILIES:
        raise SpecSyntaxError(f"unknown family {family!r}", fline, text.splitlines()[fline - 1].find(":") + 2)
    if "generators" not in fields:
        raise SpecSyntaxError("missing 'generators:' line", fline, 1)
    names = tuple(fields["generators"][0].split())
    if not names:
        raise SpecSyntaxError("no generators declared", fields["generators"][1], 1)

    lam = None
    if "lambda" in fields:
        value, lline = fields["lambda"]
        try:
            lam = float(Fraction(value))
        except (ValueError, ZeroDivisionError):
            raise SpecSyntaxError(f"bad lambda {value!r}", lline, 1) from None
        if not 0 < lam < 1:
            raise InputError(f"lambda must lie in (0,1), got {value} (line {lline})")

    if family in ("free", "free-abelian"):
        return GroupSpec(family, names, lam=lam)
    if family == "raag":
        value, eline = fields.get("edges", ("", 0))
        pairs = []
        for token in value.split():
            parts = token.split("-")
            if len(parts) != 2:
                raise SpecSyntaxError(f"edge must look like u-v, got {token!r}", eline, 1)
            for p in parts:
                if p not in names:
                    raise UnknownGeneratorError(f"unknown generator {p!r} in edge (line {eline})")
            pairs.append(tuple(parts))
        spec = GroupSpec.raag(names, pairs)
        return GroupSpec("raag", names, edges=spec.edges, lam=lam)
    if family == "classical-sc":
        if "relators" not in fields:
            raise SpecSyntaxError("classical-sc needs a 'relators:' line", fline, 1)
        value, rline = fields["relators"]
        chunks = value.split(",") if "," in value else value.split()
        rels = [parse_word(c, names, line=rline) for c in chunks if c.strip()]
        return GroupSpec.classical_sc(names, rels, lam)
    # graphical-sc
    if "graph" not in fields:
        raise SpecSyntaxError("graphical-sc needs a 'graph:' section", fline, 1)
    value, gline = fields["graph"]
    if value:
        path = Path(value)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        graph = LabelledGraph.parse(path.read_text(), names)
    else:
        graph = LabelledGraph.parse("\n".join(graph_lines), names, first_line=graph_first)
    return GroupSpec.graphical_sc(names, graph, lam)


_KEYS = {"family", "generators", "edges", "relators", "graph", "lambda"}


def load_spec(path: str | Path) -> GroupSpec:
    path = Path(path)
    return parse_spec(path.read_text(), base_dir=path.parent)


def format_spec(spec: GroupSpec) -> str:
    lines = [f"family: {spec.family}", "generators: " + " ".join(spec.generators)]
    if spec.family == "raag":
        lines.append("edges: " + " ".join(
            "-".join(spec.generators[i] for i in sorted(e)) for e in sorted(spec.edges, key=sorted)))
    if spec.family == "classical-sc":
        sep = " " if all(len(n) == 1 for n in spec.generators) else ", "
        lines.append("relators: " + sep.join(spec.format(r) for r in spec.relators))
    if spec.family == "graphical-sc":
        lines.append("graph:")
        lines.append(spec.graph.to_text(spec.generators).rstrip("\n"))
    if spec.lam is not None:
        lines.append(f"lambda: {spec.lam}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------- word problems


class CanonicalSolver:
    """Word problem for free, free abelian and right-angled Artin groups.

    Normal forms are the ShortLex-least geodesic words, so ``len(nf)`` is the
    exact word length of the element.
    """

    geodesic = True

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        n = spec.rank
        self.comm = [[spec.commutes(i, j) for j in range(n)] for i in range(n)]
        self.family = spec.family

    def normal_form(self, word: Word) -> Word:
        w = free_reduce(word)
        if self.family == "free":
            return w
        if self.family == "free-abelian":
            return _abelian_nf(w)
        return self._raag_nf(w)

    def multiply(self, nf: Word, c: int) -> Word:
        """Normal form of ``nf * c`` for ``nf`` already normal."""
        if self.family == "free":
            return nf[:-1] if nf and nf[-1] == c ^ 1 else nf + bytes((c,))
        if self.family == "free-abelian":
            i = nf.find(bytes((c ^ 1,)))
            if i >= 0:
                return nf[:i] + nf[i + 1:]
            k = len(nf)
            while k > 0 and nf[k - 1] > c:
                k -= 1
            return nf[:k] + bytes((c,)) + nf[k:]
        comm = self.comm[c >> 1]
        last_block = -1
        for j in range(len(nf) - 1, -1, -1):
            d = nf[j]
            if d == c ^ 1:
                return self._raag_nf(nf[:j] + nf[j + 1:])
            if not comm[d >> 1]:
                last_block = j
                break
        k = last_block + 1
        while k < len(nf) and nf[k] <= c:
            k += 1
        return nf[:k] + bytes((c,)) + nf[k:]

    def _raag_nf(self, word: Word) -> Word:
        comm = self.comm
        letters = list(word)
        changed = True
        while changed:
            changed = False
            for i, c in enumerate(letters):
                row = comm[c >> 1]
                for j in range(i + 1, len(letters)):
                    d = letters[j]
                    if d == c ^ 1:
                        del letters[j]
                        del letters[i]
                        changed = True
                        break
                    if not row[d >> 1]:
                        break
                if changed:
                    break
        out = []
        while letters:
            best = -1
            for j, c in enumerate(letters):
                if best >= 0 and c >= letters[best]:
                    continue
                row = comm[c >> 1]
                if all(row[d >> 1] for d in letters[:j]):
                    best = j
            out.append(letters.pop(best))
        return bytes(out)


def _abelian_nf(word: Word) -> Word:
    counts: dict[int, int] = {}
    for c in word:
        counts[c >> 1] = counts.get(c >> 1, 0) + (-1 if c & 1 else 1)
    letters = []
    for g, e in counts.items():
        letters.extend([2 * g + (e < 0)] * abs(e))
    return bytes(sorted(letters))


class DehnSolver:
    """Dehn's algorithm over the symmetrised relator set.

    Complete for C'(1/6) presentations; for others a nonempty reduct does
    not prove nontriviality.
    """

    geodesic = False

    def __init__(self, spec: GroupSpec):
        self.spec = spec
        table: dict[Word, Word] = {}
        for rel in spec.relator_words():
            for variant in cyclic_permutations(rel) + cyclic_permutations(invert(rel)):
                m = len(variant)
                for k in range(m // 2 + 1, m + 1):
                    sub, repl = variant[:k], invert(variant[k:])
                    if sub not in table or len(repl) < len(table[sub]) or (
                            len(repl) == len(table[sub]) and repl < table[sub]):
                        table[sub] = repl
        self.table = table
        lengths = {len(s) for s in table}
        self.lengths = sorted(lengths, reverse=True)
        # two-letter windows inside keys; a key across a join contains the join's window
        self._joins = {(k[i], k[i + 1]) for k in table for i in range(len(k) - 1)}
        self._factor, abel = _free_factors(spec)
        # per letter code: its contribution to its own factor's coordinates
        self._step = [tuple((1 - 2 * (c & 1)) * row[c >> 1] for row, _ in abel[self._factor[c >> 1]])
                      for c in range(2 * spec.rank)]
        self._mods = [[mod for _, mod in coords] for coords in abel]
        self.c6 = _passes_c6(spec)
        rel_lengths = [len(r) for r in spec.relator_words()] or [0]
        # A nonempty word that reduces to the empty word contains a table key.
        # Under C'(1/6) Greendlinger raises this to a whole relator.
        shortest_key = min(self.lengths, default=1)
        self.min_trivial = min(rel_lengths) if self.c6 else shortest_key

    def reduce(self, word: Word) -> Word:
        """Leftmost-longest Dehn reduction to a fixpoint."""
        w = free_reduce(word)
        table, lengths = self.table, self.lengths
        while True:
            hit = False
            for i in range(len(w)):
                for k in lengths:
                    if i + k <= len(w):
                        repl = table.get(w[i:i + k])
                        if repl is not None:
                            w = free_reduce(w[:i] + repl + w[i + k:])
                            hit = True
                            break
                if hit:
                    break
            if not hit:
                return w

    def is_trivial(self, word: Word) -> bool:
        return not self.reduce(word)

    def is_reduced_suffix(self, word: Word) -> bool:
        """True if no relator-half ends at the last letter (enough when the
        rest of ``word`` is already Dehn-reduced)."""
        n = len(word)
        return not any(k <= n and word[n - k:] in self.table for k in self.lengths)

    def equal(self, u: Word, v: Word, reduced: bool = False) -> bool:
        """Do ``u`` and ``v`` represent the same element?

        With ``reduced=True`` the caller promises both words are Dehn-reduced.
        Then so is each half of u^-1 v after stripping the common prefix and
        suffix, and reduction can only start on a key that crosses the join.
        If none does, the word is already irreducible and nonempty.
        """
        k, n = 0, min(len(u), len(v))
        while k < n and u[k] == v[k]:
            k += 1
        u, v = u[k:], v[k:]
        k, n = 0, min(len(u), len(v))
        while k < n and u[-1 - k] == v[-1 - k]:
            k += 1
        if k:
            u, v = u[:-k], v[:-k]
        if not u and not v:
            return True
        if len(u) + len(v) < self.min_trivial:
            return False
        if reduced:
            if not u or not v or (u[0] ^ 1, v[0]) not in self._joins:
                return False
            z = invert(u) + v
            if not self._crosses_junction(z, len(u)):
                return False
            return not self.reduce(z)
        return not self.reduce(invert(u) + v)

    def _crosses_junction(self, z: Word, cut: int) -> bool:
        n = len(z)
        table = self.table
        for k in self.lengths:
            for i in range(max(0, cut - k + 1), min(cut, n - k + 1)):
                if z[i:i + k] in table:
                    return True
        return False

    def bucket(self, word: Word) -> tuple:
        """Invariant of the element of a Dehn-reduced ``word``.

        Generators split into free factors (connected through shared
        relators). A reduced word cuts into syllables over one factor each,
        and each syllable is nontrivial there, so the sequence of
        (factor, abelianised syllable) is the free-product normal form seen
        through abelianisations.
        """
        factor, step, mods = self._factor, self._step, self._mods
        out = []
        i, n = 0, len(word)
        while i < n:
            f = factor[word[i] >> 1]
            acc = [0] * len(mods[f])
            while i < n and factor[word[i] >> 1] == f:
                for k, a in enumerate(step[word[i]]):
                    acc[k] += a
                i += 1
            out.append((f, tuple(y % m if m else y for y, m in zip(acc, mods[f]))))
        return tuple(out)


def _free_factors(spec: GroupSpec) -> tuple[list[int], list[list[tuple[tuple[int, ...], int]]]]:
    """Generator -> factor id, and per-factor abelianisation coordinates."""
    n = spec.rank
    rels = spec.relator_words()
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in rels:
        gens = {c >> 1 for c in r}
        first = find(min(gens))
        for g in gens:
            parent[find(g)] = first
    roots = sorted({find(g) for g in range(n)})
    factor = [roots.index(find(g)) for g in range(n)]
    abel = []
    for f in range(len(roots)):
        mine = [r for r in rels if factor[r[0] >> 1] == f]
        gens = [g for g in range(n) if factor[g] == f]
        abel.append([(row, mod) for row, mod in _abelian_invariants(n, mine)
                     if any(row[g] for g in gens)])
    return factor, abel


def _abelian_invariants(n: int, rels) -> list[tuple[tuple[int, ...], int]]:
    """Coordinates of the abelianisation as (functional, modulus) pairs.

    Modulus 0 marks a free coordinate. Two words have equal coordinates
    exactly when their exponent sums differ by a combination of relators.
    """
    if not rels:
        return [(tuple(int(i == j) for j in range(n)), 0) for i in range(n)]
    m = sympy.Matrix([list(exponent_sums(r, n)) for r in rels])
    diag, _, v = smith_normal_decomp(m)
    out = []
    for i in range(n):
        d = abs(int(diag[i, i])) if i < diag.rows else 0
        if d != 1:
            out.append((tuple(int(v[j, i]) for j in range(n)), d))
    return out


def _passes_c6(spec: GroupSpec) -> bool:
    from morselab.smallcanc import check_c_prime

    graph = spec.graph if spec.family == "graphical-sc" else LabelledGraph.from_relators(spec.relators)
    try:
        return bool(check_c_prime(graph, 1 / 6).passed)
    except Exception:
        return False


@lru_cache(maxsize=64)
def solver_for(spec: GroupSpec):
    if spec.family in CANONICAL_FAMILIES:
        return CanonicalSolver(spec)
    return DehnSolver(spec)


# -------------------------------------------------------------- public ops


def normal_form(spec: GroupSpec, word: Word) -> Word:
    """Canonical representative: the ShortLex-least geodesic word.

    Small-cancellation families Dehn-reduce first, then look the element up
    in a Cayley ball of radius equal to the reduced length.
    """
    solver = solver_for(spec)
    if isinstance(solver, CanonicalSolver):
        return solver.normal_form(word)
    reduced = solver.reduce(word)
    if not reduced:
        return EMPTY
    from morselab.cayley import build_ball

    ball = build_ball(spec, len(reduced))
    v = ball.locate(reduced)
    return ball.words[v] if v is not None else reduced


def is_trivial(spec: GroupSpec, word: Word) -> bool:
    solver = solver_for(spec)
    if isinstance(solver, CanonicalSolver):
        return not solver.normal_form(word)
    return solver.is_trivial(word)
