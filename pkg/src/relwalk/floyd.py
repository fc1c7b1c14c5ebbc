"""Floyd metrics, word geodesics, transition points, and the coned-off graph."""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .balls import ball_elements
from .groups import Coset, FreeProductGroup, GroupElement, coset_distance


@dataclass(frozen=True)
class FloydFunction:
    """Geometric rescaling f(n) = ratio^n with ratio in (0,1)."""

    ratio: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("Floyd ratio must lie strictly between 0 and 1")

    def __call__(self, n: int) -> float:
        return self.ratio ** n

    @property
    def total(self) -> float:
        return 1.0 / (1.0 - self.ratio)


@dataclass(frozen=True)
class TransitionParams:
    """Neighborhood width and window length for transition-point detection."""

    epsilon: int
    window: int

    def __post_init__(self):
        if self.epsilon < 0 or self.window <= 0:
            raise ValueError("need epsilon >= 0 and window > 0")


def floyd_distance(f: FloydFunction, base: GroupElement, x: GroupElement,
                   z: GroupElement, radius: int) -> float:
    """Dijkstra over the radius-ball with edges rescaled by f(d(base, .)).

    An edge {g, h} weighs f(min(d(base,g), d(base,h))); paths are confined
    to the word-metric ball of the given radius around the identity, so
    the value is the Floyd distance of the ball-restricted graph (it upper
    bounds the group's Floyd distance and is exact on trees).
    """
    group = x.group
    if x.word_length > radius or z.word_length > radius:
        raise ValueError("endpoints must lie inside the search radius")
    if x == z:
        return 0.0
    gens = [g for _, g in group.generators()]
    binv = base.inverse()

    def level(g: GroupElement) -> int:
        return (binv * g).word_length

    dist = {x: 0.0}
    order = itertools.count()
    heap = [(0.0, next(order), x)]
    while heap:
        d, _, g = heapq.heappop(heap)
        if g == z:
            return d
        if d > dist.get(g, float("inf")):
            continue
        lg = level(g)
        for s in gens:
            h = g * s
            if h.word_length > radius:
                continue
            w = f(min(lg, level(h)))
            nd = d + w
            if nd < dist.get(h, float("inf")) - 1e-18:
                dist[h] = nd
                heapq.heappush(heap, (nd, next(order), h))
    return float("inf")


def word_geodesic(x: GroupElement, z: GroupElement) -> list[GroupElement]:
    """One shortest path x -> z, spelled syllable by syllable.

    The normal form of x^-1 z is expanded into unit generator steps
    (lattice coordinates in axis order, then the finite letter), which
    realizes the word metric exactly in these free products.
    """
    group = x.group
    path = [x]
    cur = x
    for (fac, zvec, j) in (x.inverse() * z).syllables:
        spec = group.factors[fac]
        for d, c in enumerate(zvec):
            step = [0] * spec.rank
            step[d] = 1 if c > 0 else -1
            for _ in range(abs(c)):
                cur = cur * group.syllable(fac, step)
                path.append(cur)
        if j != 0:
            cur = cur * group.syllable(fac, (0,) * spec.rank, j)
            path.append(cur)
    return path


def _candidate_cosets(path: Sequence[GroupElement], epsilon: int,
                      parabolic: Iterable[int]) -> list[Coset]:
    group = path[0].group
    shifts = ball_elements(group, epsilon)
    seen = {}
    for p in path:
        for h in shifts:
            q = p * h
            for fac in parabolic:
                c = Coset.of(q, fac)
                seen.setdefault(c.sort_key(), c)
    return [seen[k] for k in sorted(seen)]


def transition_points(path: Sequence[GroupElement], params: TransitionParams,
                      parabolic: Iterable[int]) -> list[int]:
    """Indices whose surrounding window sits in no coset's epsilon-hull.

    A point is deep when some parabolic coset's epsilon-neighborhood
    contains the whole window around it (the window is truncated at the
    path's ends); all other points are transition points.
    """
    parabolic = tuple(parabolic)
    n = len(path)
    if not parabolic:
        return list(range(n))
    cosets = _candidate_cosets(path, params.epsilon, parabolic)
    dists = [[coset_distance(p, c) for p in path] for c in cosets]
    out = []
    for i in range(n):
        lo = max(0, i - params.window)
        hi = min(n, i + params.window + 1)
        deep = any(max(row[lo:hi]) <= params.epsilon for row in dists)
        if not deep:
            out.append(i)
    return out


def floyd_transition_check(f: FloydFunction,
                           samples: Iterable[tuple[GroupElement, GroupElement, GroupElement]],
                           radius: int) -> float:
    """Min over samples (x, z, y) of the Floyd distance from basepoint y."""
    best = float("inf")
    for (x, z, y) in samples:
        best = min(best, floyd_distance(f, y, x, z, radius))
    return best


def coned_off_distance(x: GroupElement, z: GroupElement,
                       parabolic: Iterable[int]) -> int:
    """Graph distance after collapsing each parabolic coset through a cone.

    Every syllable of the normal form is crossed independently: a coned
    factor's syllable costs min(length, 2) (two edges through the cone
    vertex), any other syllable costs its word length.  This is exact
    because consecutive syllables meet in cut vertices.
    """
    parabolic = set(parabolic)
    group = x.group
    total = 0
    for (fac, zvec, j) in (x.inverse() * z).syllables:
        length = group.factors[fac].syllable_length(zvec, j)
        total += min(length, 2) if fac in parabolic else length
    return total


def relative_reparametrize(path: Sequence[GroupElement],
                           parabolic: Iterable[int]) -> list[GroupElement]:
    """Drop interior points of maximal subpaths inside one parabolic coset."""
    parabolic = tuple(parabolic)
    n = len(path)
    if n <= 2 or not parabolic:
        return list(path)
    keep = [True] * n
    i = 0
    while i < n - 1:
        extended = False
        for fac in parabolic:
            c = Coset.of(path[i], fac)
            j = i
            while j + 1 < n and c.contains(path[j + 1]):
                j += 1
            if j > i + 1:
                for m in range(i + 1, j):
                    keep[m] = False
                i = j
                extended = True
                break
        if not extended:
            i += 1
    return [p for p, k in zip(path, keep) if k]


def gromov_product_coned(x: GroupElement, z: GroupElement, base: GroupElement,
                         parabolic: Iterable[int]) -> float:
    """(x|z)_base in the coned-off metric."""
    parabolic = tuple(parabolic)
    dx = coned_off_distance(base, x, parabolic)
    dz = coned_off_distance(base, z, parabolic)
    dxz = coned_off_distance(x, z, parabolic)
    return float(Fraction(dx + dz - dxz, 2))
