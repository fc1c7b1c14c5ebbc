"""Boundary classification of sequences, Ancona ratios, and convergence experiments."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .balls import ball_elements
from .errors import BoundedSequenceError, ParseError
from .excursions import FreeProductEngine
from .groups import (Coset, FreeProductGroup, GroupElement, coset_lattice_part,
                     project_to_coset)
from .floyd import coned_off_distance, gromov_product_coned
from .lattice import LatticeChain
from .perron import (BoundaryPointU, level_set_point, limit_kernel_ratio,
                     minimize_lambda)

CONICAL = "Conical"
PARABOLIC = "Parabolic"
UNRESOLVED = "Unresolved"

_EXP_RE = re.compile(r"^(?P<a>[+-]?\d*)n(?P<b>[+-]\d+)?$")


def _linear_exponent(text: str) -> tuple[int, int]:
    """Parse 'n', '-2n+3', '4' ... into (a, b) for a*n + b."""
    text = text.strip()
    m = _EXP_RE.match(text)
    if m:
        a_raw = m.group("a")
        a = {"": 1, "+": 1, "-": -1}.get(a_raw)
        if a is None:
            a = int(a_raw)
        b = int(m.group("b") or 0)
        return a, b
    try:
        return 0, int(text)
    except ValueError:
        raise ParseError(f"cannot parse exponent {text!r}; expected a*n+b or an integer")


def _tokenize(template: str) -> list[tuple[str, tuple[int, int]]]:
    tokens = []
    i = 0
    s = template
    while i < len(s):
        ch = s[i]
        if ch in " \t*":
            i += 1
            continue
        if ch == "(":
            depth = 1
            j = i + 1
            while j < len(s) and depth:
                depth += {"(": 1, ")": -1}.get(s[j], 0)
                j += 1
            if depth:
                raise ParseError(f"unbalanced parentheses in {template!r}")
            atom = s[i + 1:j - 1]
            i = j
        else:
            j = i
            while j < len(s) and s[j] not in " \t*^":
                j += 1
            atom = s[i:j]
            i = j
        exp = (0, 1)
        if i < len(s) and s[i] == "^":
            j = i + 1
            while j < len(s) and s[j] not in " \t*":
                j += 1
            exp = _linear_exponent(s[i + 1:j])
            i = j
        if not atom:
            raise ParseError(f"empty atom in template {template!r}")
        tokens.append((atom, exp))
    return tokens


@dataclass(frozen=True)
class SequenceSpec:
    """Parametric word family n -> g_n from templates with linear exponents.

    A single template like 'a^n*b^n' is evaluated for each n; with several
    templates and mode 'alternate' the template is chosen by n modulo the
    template count (odd/even families).
    """

    name: str
    templates: tuple[str, ...]
    start: int
    stop: int
    mode: str = "single"

    def __post_init__(self):
        if not self.templates:
            raise ParseError("sequence needs at least one template")
        if self.mode not in ("single", "alternate"):
            raise ParseError(f"unknown sequence mode {self.mode!r}")
        if self.mode == "single" and len(self.templates) != 1:
            raise ParseError("mode 'single' takes exactly one template")
        if self.stop < self.start:
            raise ParseError("empty evaluation range")

    def element(self, group: FreeProductGroup, n: int) -> GroupElement:
        template = self.templates[n % len(self.templates)] \
            if self.mode == "alternate" else self.templates[0]
        out = group.identity
        for atom, (a, b) in _tokenize(template):
            k = a * n + b
            if k == 0:
                continue
            out = out * (group.word(atom) ** k)
        return out

    def elements(self, group: FreeProductGroup) -> list[GroupElement]:
        return [self.element(group, n) for n in range(self.start, self.stop + 1)]


@dataclass
class Classification:
    """Boundary label with the numerical evidence that produced it."""

    tag: str
    coset: Coset | None = None
    direction: tuple[float, ...] | None = None
    evidence: dict = field(default_factory=dict)


def _lattice_track(coset: Coset, elements: Sequence[GroupElement],
                   offset: GroupElement | None = None) -> list[tuple[int, ...]]:
    """Lattice coordinates of the projections, in the coset's chart.

    An alternate representative rep*offset (offset in the parabolic
    factor) shifts every coordinate by the offset's lattice part.
    """
    shift = (0,) * coset.group.factors[coset.factor].rank
    if offset is not None and offset.syllable_count:
        fac, z, _ = offset.syllables[0]
        if fac != coset.factor or offset.syllable_count != 1:
            raise ValueError("representative offset must lie in the parabolic factor")
        shift = z
    out = []
    for g in elements:
        _, pi = project_to_coset(g, coset)
        z = coset_lattice_part(coset, pi)
        out.append(tuple(a - b for a, b in zip(z, shift)))
    return out


def _candidate_cosets(group: FreeProductGroup, elements: Sequence[GroupElement],
                      parabolic: Sequence[int]) -> list[Coset]:
    seen = {}
    for g in elements[-2:]:
        for prefix in g.prefixes():
            for fac in parabolic:
                c = Coset.of(prefix, fac)
                seen.setdefault(c.sort_key(), c)
    for fac in parabolic:
        c = Coset.of(group.identity, fac)
        seen.setdefault(c.sort_key(), c)
    return [seen[k] for k in sorted(seen)]


def classify(group: FreeProductGroup,
             seq: SequenceSpec | Sequence[GroupElement],
             parabolic: Sequence[int], *,
             coned_threshold: float = 3.0,
             direction_tol: float = 0.05,
             min_norm: float = 3.0,
             rep_offset: GroupElement | None = None) -> Classification:
    """Label a sequence Conical, Parabolic(coset, direction), or Unresolved.

    Parabolic: some parabolic coset's projections have lattice parts with
    norms escaping and directions settling within direction_tol over the
    last half of the range.  Conical: coned-off Gromov products of
    consecutive terms exceed coned_threshold and do not decrease over the
    last half.  A sequence with no word-length growth raises
    BoundedSequenceError instead of receiving a label.
    """
    elements = seq.elements(group) if isinstance(seq, SequenceSpec) else list(seq)
    if len(elements) < 4:
        raise ValueError("need at least four terms to classify a trend")
    lengths = [g.word_length for g in elements]
    half = len(elements) // 2
    if max(lengths[half:]) <= max(lengths[:half]):
        raise BoundedSequenceError(
            f"word lengths do not grow (first half max {max(lengths[:half])}, "
            f"second half max {max(lengths[half:])})")
    evidence: dict = {"word_lengths": lengths}
    parabolic = tuple(parabolic)

    for coset in _candidate_cosets(group, elements, parabolic):
        track = _lattice_track(coset, elements, rep_offset)
        norms = [math.sqrt(sum(c * c for c in z)) for z in track]
        tail_norms = norms[half:]
        if tail_norms[-1] < min_norm:
            continue
        if any(b < a - 1e-9 for a, b in zip(tail_norms, tail_norms[1:])):
            continue
        if tail_norms[-1] <= max(norms[:half]):
            continue
        dirs = [np.array(z, dtype=float) / n
                for z, n in zip(track[half:], tail_norms) if n > 0]
        if not dirs:
            continue
        gap = max(float(np.linalg.norm(d - dirs[-1])) for d in dirs)
        evidence.setdefault("parabolic_candidates", []).append(
            {"coset": group.format(coset.rep) if coset.rep.syllable_count else "e",
             "factor": coset.factor, "norms": norms, "direction_gap": gap})
        if gap < direction_tol:
            theta = tuple(float(c) for c in dirs[-1])
            evidence["projection_norms"] = norms
            evidence["direction"] = theta
            return Classification(tag=PARABOLIC, coset=coset, direction=theta,
                                  evidence=evidence)

    products = [gromov_product_coned(a, b, group.identity, parabolic)
                for a, b in zip(elements, elements[1:])]
    coned = [coned_off_distance(group.identity, g, parabolic) for g in elements]
    evidence["coned_gromov_products"] = products
    evidence["coned_lengths"] = coned
    tail = products[max(0, half - 1):]
    growing = all(b >= a - 1e-9 for a, b in zip(tail, tail[1:]))
    if growing and min(tail) > coned_threshold and coned[-1] > coned[half - 1]:
        return Classification(tag=CONICAL, evidence=evidence)
    return Classification(tag=UNRESOLVED, evidence=evidence)


def representative_invariance(group: FreeProductGroup,
                              seq: SequenceSpec | Sequence[GroupElement],
                              parabolic: Sequence[int],
                              offset: GroupElement, **kwargs) -> dict:
    """Classify under the canonical and an offset representative set.

    The offset replaces each representative rep by rep*offset; lattice
    charts shift by a constant, so tags agree and parabolic directions
    coincide in the limit.
    """
    base = classify(group, seq, parabolic, **kwargs)
    shifted = classify(group, seq, parabolic, rep_offset=offset, **kwargs)
    gap = 0.0
    if base.direction is not None and shifted.direction is not None:
        gap = float(np.linalg.norm(np.array(base.direction) - np.array(shifted.direction)))
    return {"base": base, "shifted": shifted,
            "agree": base.tag == shifted.tag, "direction_gap": gap}


def ancona_ratio(engine: FreeProductEngine, x: GroupElement, z: GroupElement,
                 y: GroupElement, radius: int) -> float:
    """restricted Green / Green through the radius-ball around y.

    radius < 0 is the empty-forbidden-set convention and returns 1.
    Ratios below 1e-12 are reported as exact zeros: at the Green scales
    handled here they are always the float residue of a cut vertex that
    disconnects x from z, where the true restricted Green vanishes.
    """
    g = engine.green(x, z)
    if g <= 0.0:
        return 0.0
    if radius < 0:
        return 1.0
    ball = [y * h for h in ball_elements(engine.group, radius)]
    ratio = engine.taboo_green(x, z, ball) / g
    if ratio < 1e-12:
        return 0.0
    return min(1.0, ratio)


@dataclass
class MartinRow:
    n: int
    kernels: tuple[float, ...]


@dataclass
class MartinConvergenceReport:
    """Martin kernels along a sequence with Cauchy and limit diagnostics."""

    test_points: tuple[GroupElement, ...]
    rows: list[MartinRow]
    cauchy_deltas: list[tuple[int, float]]
    ratio_rows: list[dict] = field(default_factory=list)
    max_ratio_deviation: float | None = None


def martin_convergence(engine: FreeProductEngine,
                       elements: Sequence[GroupElement],
                       test_points: Sequence[GroupElement],
                       ns: Sequence[int] | None = None,
                       boundary: BoundaryPointU | None = None,
                       coset: Coset | None = None) -> MartinConvergenceReport:
    """Tabulate K_{g_n}(x) over test points with Cauchy deltas.

    When a level-set point and a parabolic coset are supplied, kernel
    ratios of lattice test points are compared against the limiting
    exponential e^(u.(z_x - z_x')); max_ratio_deviation reports the
    final row's worst relative deviation, ratio_rows every row's.
    """
    base = engine.group.identity
    ns = list(range(len(elements))) if ns is None else list(ns)
    rows = []
    for n, g in zip(ns, elements):
        kernels = tuple(engine.martin_kernel(x, g) for x in test_points)
        rows.append(MartinRow(n=n, kernels=kernels))
    deltas = []
    for i in range(len(rows)):
        worst = 0.0
        for a in range(i, len(rows)):
            for b in range(a + 1, len(rows)):
                for ka, kb in zip(rows[a].kernels, rows[b].kernels):
                    worst = max(worst, abs(ka - kb))
        deltas.append((rows[i].n, worst))
    report = MartinConvergenceReport(test_points=tuple(test_points), rows=rows,
                                     cauchy_deltas=deltas)
    if boundary is not None and coset is not None:
        u = boundary.u
        tracks = {x: coset_lattice_part(coset, x) for x in test_points
                  if coset.contains(x)}
        pts = [x for x in test_points if x in tracks]
        worst_last = 0.0
        for n, g in zip(ns, elements):
            kx = {x: engine.martin_kernel(x, g) for x in pts}
            for i, xi in enumerate(pts):
                for xj in pts[i + 1:]:
                    pred = limit_kernel_ratio(u, tracks[xi], tracks[xj])
                    got = kx[xi] / kx[xj]
                    dev = abs(got - pred) / pred
                    if n == ns[-1]:
                        worst_last = max(worst_last, dev)
                    report.ratio_rows.append(
                        {"n": n, "x": engine.group.format(xi),
                         "x_other": engine.group.format(xj),
                         "ratio": got, "predicted": pred, "rel_dev": dev})
        report.max_ratio_deviation = worst_last
    return report


@dataclass
class SeparationReport:
    """Uniform growth/decay witness for two boundary directions."""

    theta0: tuple[float, ...]
    theta1: tuple[float, ...]
    u0: tuple[float, ...]
    u1: tuple[float, ...]
    ns: list[int]
    decay: list[float]
    grid_min: list[float]
    grid_thetas: list[tuple[float, ...]]
    certified: bool


def separation_experiment(chain: LatticeChain, theta0, theta1,
                          ns: Sequence[int] | None = None,
                          grid_count: int = 9,
                          grid_width: float = 0.1,
                          eps: float = 0.05) -> SeparationReport:
    """Witness that distinct boundary directions separate at infinity.

    Along lattice points z_n realizing theta1's supporting ray, the limit
    kernels K_theta(z_n) = e^(u(theta).z_n) grow uniformly for theta in a
    grid around theta1 while K_theta0(z_n) decays to 0.
    """
    t0 = np.asarray(theta0, dtype=float).reshape(-1)
    t1 = np.asarray(theta1, dtype=float).reshape(-1)
    t0 = t0 / np.linalg.norm(t0)
    t1 = t1 / np.linalg.norm(t1)
    if float(np.linalg.norm(t0 - t1)) < 1e-12:
        raise ValueError("separation needs two distinct directions")
    ns = list(range(1, 13)) if ns is None else list(ns)
    mn = minimize_lambda(chain)
    b0 = level_set_point(chain, t0, minimum=mn)
    b1 = level_set_point(chain, t1, minimum=mn)
    if chain.rank == 1:
        grid = [tuple(t1)]
    else:
        base_angle = math.atan2(t1[1], t1[0])
        grid = [(math.cos(base_angle + d), math.sin(base_angle + d))
                for d in np.linspace(-grid_width, grid_width, grid_count)]
    grid_points = [level_set_point(chain, th, minimum=mn) for th in grid]
    scaled = t1 / float(np.max(np.abs(t1)))
    primitive = np.round(scaled)
    if float(np.max(np.abs(scaled - primitive))) > 1e-9:
        primitive = None
    decay = []
    grid_min = []
    zs = []
    for n in ns:
        if primitive is not None:
            zn = tuple(int(c) * n for c in primitive)
        else:
            zn = tuple(int(round(n * c)) for c in t1)
        zs.append(zn)
        decay.append(limit_kernel_ratio(b0.u, zn, (0,) * chain.rank))
        grid_min.append(min(limit_kernel_ratio(bp.u, zn, (0,) * chain.rank)
                            for bp in grid_points))
    decay_ok = all(b <= a * (1 + 1e-12) for a, b in zip(decay, decay[1:])) \
        and decay[-1] < decay[0]
    growth_ok = all(b >= a * (1 - 1e-12) for a, b in zip(grid_min, grid_min[1:])) \
        and grid_min[-1] > max(1.0, grid_min[0])
    floor_ok = all(
        g >= math.exp((1 - eps) * float(np.asarray(b1.u) @ np.asarray(zn)) - 1e-9)
        for g, zn in zip(grid_min, zs))
    certified = decay_ok and growth_ok and floor_ok
    return SeparationReport(
        theta0=tuple(float(c) for c in t0), theta1=tuple(float(c) for c in t1),
        u0=b0.u, u1=b1.u, ns=ns, decay=decay, grid_min=grid_min,
        grid_thetas=[tuple(float(c) for c in th) for th in grid],
        certified=certified)
