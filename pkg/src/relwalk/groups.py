"""Exact algebra for free products of lattice-by-finite factors.

A group here is Gamma = Gamma_1 * ... * Gamma_m where each factor is a
direct product Z^k x F with F a finite group given by its multiplication
table.  Elements are stored in syllable normal form: an ordered tuple of
(factor, lattice vector, finite index) triples in which consecutive
syllables come from different factors and no syllable is trivial.  All
products, inverses and word lengths are exact integer computations, and
the word length is taken in the generating set consisting of the lattice
basis vectors (plus inverses) and the nontrivial finite elements, so a
syllable of lattice part z and finite index j costs ||z||_1 + [j != 0].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigError, ParseError

# A syllable is (factor index, lattice vector, finite element index).
# The finite index is 0-based internally; 0 is the identity of F.
Syllable = tuple[int, tuple[int, ...], int]

_SUPERSCRIPTS = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹⁻", "0123456789-")


def _desugar(text: str) -> str:
    """Rewrite unicode superscript exponents into caret notation."""
    out = []
    for ch in text:
        if ch in "⁰¹²³⁴⁵⁶⁷⁸⁹⁻":
            if not out or out[-1] not in "^0123456789-":
                out.append("^")
            out.append(ch.translate(_SUPERSCRIPTS))
        else:
            out.append(ch)
    return "".join(out)


@dataclass(frozen=True)
class FactorSpec:
    """One free factor Z^rank x F, with F given by a multiplication table.

    The table is 0-based and row/column 0 must be the identity.  Names
    are used for parsing and printing: lattice_names has one entry per
    lattice dimension, finite_names one entry per nontrivial element of F.
    """

    rank: int
    table: tuple[tuple[int, ...], ...]
    lattice_names: tuple[str, ...]
    finite_names: tuple[str, ...]

    def __post_init__(self):
        n = len(self.table)
        if n < 1:
            raise ConfigError("finite part needs at least the identity")
        for row in self.table:
            if len(row) != n or sorted(row) != list(range(n)):
                raise ConfigError("finite table rows must be permutations of 0..n-1")
        for j in range(n):
            if self.table[0][j] != j or self.table[j][0] != j:
                raise ConfigError("index 0 must act as the identity in the finite table")
        cols = list(zip(*self.table))
        for col in cols:
            if sorted(col) != list(range(n)):
                raise ConfigError("finite table columns must be permutations of 0..n-1")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                        raise ConfigError("finite table is not associative")
        if self.rank < 0:
            raise ConfigError("rank must be >= 0")
        if self.rank + (n - 1) < 1:
            raise ConfigError("factor must be nontrivial")
        if len(self.lattice_names) != self.rank:
            raise ConfigError("need one lattice generator name per rank dimension")
        if len(self.finite_names) != n - 1:
            raise ConfigError("need one name per nontrivial finite element")

    @property
    def finite_order(self) -> int:
        return len(self.table)

    def finite_mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def finite_inv(self, a: int) -> int:
        row = self.table[a]
        return row.index(0)

    def finite_pow(self, a: int, n: int) -> int:
        if n < 0:
            return self.finite_pow(self.finite_inv(a), -n)
        out = 0
        for _ in range(n):
            out = self.table[out][a]
        return out

    def syllable_length(self, z: tuple[int, ...], j: int) -> int:
        return sum(abs(c) for c in z) + (1 if j != 0 else 0)


class GroupElement:
    """Normal-form word in a free product; immutable and hashable."""

    __slots__ = ("group", "syllables", "_length", "_hash")

    def __init__(self, group: "FreeProductGroup", syllables: tuple[Syllable, ...]):
        self.group = group
        self.syllables = syllables
        self._length = -1
        self._hash = hash(syllables)

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    @property
    def syllable_count(self) -> int:
        return len(self.syllables)

    @property
    def word_length(self) -> int:
        if self._length < 0:
            total = 0
            for fac, z, j in self.syllables:
                total += self.group.factors[fac].syllable_length(z, j)
            self._length = total
        return self._length

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if self.group is not other.group:
            raise ValueError("elements from different groups")
        return self.group._from_concat(self.syllables, other.syllables)

    def inverse(self) -> "GroupElement":
        inv = []
        for fac, z, j in reversed(self.syllables):
            spec = self.group.factors[fac]
            inv.append((fac, tuple(-c for c in z), spec.finite_inv(j)))
        return GroupElement(self.group, tuple(inv))

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        out = self.group.identity
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def prefixes(self) -> list["GroupElement"]:
        """Syllable prefixes from the identity up to the element itself."""
        out = [self.group.identity]
        for i in range(1, len(self.syllables) + 1):
            out.append(GroupElement(self.group, self.syllables[:i]))
        return out

    def sort_key(self):
        return (self.word_length, self.syllables)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupElement)
            and self.group is other.group
            and self.syllables == other.syllables
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"<{self.group.format(self)}>"

    def __str__(self) -> str:
        return self.group.format(self)


class FreeProductGroup:
    """Free product of FactorSpec factors with a shared generator namespace."""

    def __init__(self, factors: Sequence[FactorSpec]):
        if not factors:
            raise ConfigError("need at least one factor")
        self.factors = tuple(factors)
        self.identity = GroupElement(self, ())
        self._catalog: dict[str, Syllable] = {}
        for i, spec in enumerate(self.factors):
            for d, name in enumerate(spec.lattice_names):
                z = tuple(1 if t == d else 0 for t in range(spec.rank))
                self._register(name, (i, z, 0))
            for j, name in enumerate(spec.finite_names, start=1):
                self._register(name, (i, (0,) * spec.rank, j))

    def _register(self, name: str, syl: Syllable):
        if not name or any(ch in name for ch in " \t*^()"):
            raise ConfigError(f"bad generator name {name!r}")
        if name == "e" or name in self._catalog:
            raise ConfigError(f"duplicate or reserved generator name {name!r}")
        self._catalog[name] = syl

    # -- construction ---------------------------------------------------

    def element(self, syllables: Iterable[Syllable]) -> GroupElement:
        """Build an element, re-normalizing whatever syllable list is given."""
        out = self.identity
        for fac, z, j in syllables:
            out = out * self.syllable(fac, z, j)
        return out

    def syllable(self, factor: int, z: Sequence[int], j: int = 0) -> GroupElement:
        spec = self.factors[factor]
        zt = tuple(int(c) for c in z)
        if len(zt) != spec.rank:
            raise ValueError("lattice vector has wrong dimension")
        if not 0 <= j < spec.finite_order:
            raise ValueError("finite index out of range")
        if j == 0 and not any(zt):
            return self.identity
        return GroupElement(self, ((factor, zt, j),))

    def generators(self) -> list[tuple[str, GroupElement]]:
        """Standard generating set, inverses included, in catalog order."""
        gens = []
        for name, (fac, z, j) in self._catalog.items():
            g = GroupElement(self, ((fac, z, j),))
            gens.append((name, g))
            ginv = g.inverse()
            if ginv != g:
                gens.append((name + "^-1", ginv))
        return gens

    def _from_concat(self, left: tuple[Syllable, ...], right: tuple[Syllable, ...]) -> GroupElement:
        out = list(left)
        for syl in right:
            if out and out[-1][0] == syl[0]:
                fac = syl[0]
                spec = self.factors[fac]
                _, z1, j1 = out.pop()
                _, z2, j2 = syl
                z = tuple(a + b for a, b in zip(z1, z2))
                j = spec.finite_mul(j1, j2)
                if j != 0 or any(z):
                    out.append((fac, z, j))
            else:
                out.append(syl)
        return GroupElement(self, tuple(out))

    # -- parsing and printing -------------------------------------------

    def word(self, text: str) -> GroupElement:
        """Parse a word like 'a^3*t*b^-2' (spaces also separate tokens)."""
        tokens = _desugar(text).replace("*", " ").split()
        out = self.identity
        for tok in tokens:
            if tok == "e":
                continue
            name, caret, exp_text = tok.partition("^")
            if name not in self._catalog:
                raise ParseError(f"unknown generator {name!r}")
            if caret and not exp_text:
                raise ParseError(f"bad exponent in token {tok!r}")
            try:
                exp = int(exp_text) if exp_text else 1
            except ValueError:
                raise ParseError(f"bad exponent in token {tok!r}") from None
            fac, z, j = self._catalog[name]
            spec = self.factors[fac]
            zs = tuple(c * exp for c in z)
            js = spec.finite_pow(j, exp)
            out = out * self.syllable(fac, zs, js)
        return out

    def format(self, g: GroupElement) -> str:
        if g.is_identity:
            return "e"
        parts = []
        for fac, z, j in g.syllables:
            spec = self.factors[fac]
            for d, c in enumerate(z):
                if c == 1:
                    parts.append(spec.lattice_names[d])
                elif c != 0:
                    parts.append(f"{spec.lattice_names[d]}^{c}")
            if j != 0:
                parts.append(spec.finite_names[j - 1])
        return "*".join(parts)


def normalize(group: FreeProductGroup, letters: Iterable[str] | str) -> GroupElement:
    """Normal form of a word given as a string or a list of generator letters."""
    if isinstance(letters, str):
        return group.word(letters)
    return group.word(" ".join(letters))


@dataclass(frozen=True)
class Coset:
    """Left coset g*P of one free factor P, keyed by its canonical representative.

    The representative is the unique shortest element of the coset: strip
    the trailing syllable when it lies in the coset's factor.
    """

    group: FreeProductGroup
    factor: int
    rep: GroupElement

    @staticmethod
    def of(g: GroupElement, factor: int) -> "Coset":
        syls = g.syllables
        if syls and syls[-1][0] == factor:
            syls = syls[:-1]
        return Coset(g.group, factor, GroupElement(g.group, syls))

    def contains(self, x: GroupElement) -> bool:
        return Coset.of(x, self.factor) == self

    def member(self, z: Sequence[int], j: int = 0) -> GroupElement:
        return self.rep * self.group.syllable(self.factor, z, j)

    def sort_key(self):
        return (self.factor, self.rep.sort_key())

    def __repr__(self) -> str:
        return f"Coset({self.group.format(self.rep)}*F{self.factor})"


def project_to_coset(g: GroupElement, c: Coset) -> tuple[set[GroupElement], GroupElement]:
    """Closest-point projection of g onto the coset, exact via normal forms.

    Writing y = rep^-1 * g, the distance from g to any coset member
    rep*p is l(p^-1) + |y| unless p cancels the leading syllable of y,
    so the projection is rep itself except when y starts with a syllable
    of the coset's factor, in which case that syllable is absorbed.  The
    projection set is a singleton here; it is returned as a set because
    coarser models can have ties.
    """
    y = c.rep.inverse() * g
    if y.syllables and y.syllables[0][0] == c.factor:
        fac, z, j = y.syllables[0]
        pi = c.rep * g.group.syllable(fac, z, j)
    else:
        pi = c.rep
    return {pi}, pi


def coset_distance(g: GroupElement, c: Coset) -> int:
    """Word distance from g to the coset."""
    _, pi = project_to_coset(g, c)
    return (pi.inverse() * g).word_length


def coset_lattice_part(c: Coset, member: GroupElement) -> tuple[int, ...]:
    """Lattice coordinates of a coset member relative to the representative."""
    p = c.rep.inverse() * member
    if p.is_identity:
        return (0,) * c.group.factors[c.factor].rank
    if p.syllable_count != 1 or p.syllables[0][0] != c.factor:
        raise ValueError("element does not belong to the coset")
    return p.syllables[0][1]
