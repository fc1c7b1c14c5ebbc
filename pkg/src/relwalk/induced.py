"""First-return chains on neighborhoods of a parabolic factor.

Watching the walk only when it sits in the eta-neighborhood of the
parabolic subgroup P = Z^k x F yields a Z^k-invariant sub-Markov chain on
Z^k x {fibers}.  The excursions between visits are summed exactly through
the cut-vertex structure of the free product: an excursion re-enters the
neighborhood through the block where it left, so its weight factors into
per-syllable passage probabilities and one absorption solve in the factor
where the excursion started.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .balls import ball_elements
from .errors import AssumptionError
from .excursions import FreeProductEngine
from .groups import FreeProductGroup, GroupElement
from .lattice import ChainGreen, LatticeChain, absorption_distribution


@dataclass(frozen=True)
class FiberIndex:
    """Bijection between the eta-neighborhood of P and Z^k x {fibers}.

    A state (z, f)*w (lattice part z, finite part f, outward word w with
    |w| <= eta not starting in P's factor) maps to lattice point z and
    fiber (w, f).  Fibers are ordered by (distance to P, normal form of w,
    finite index), so fiber 0 is (identity, identity-component).
    """

    group: FreeProductGroup
    factor: int
    eta: int
    fibers: tuple[tuple[GroupElement, int], ...]

    @staticmethod
    def build(group: FreeProductGroup, factor: int, eta: int) -> "FiberIndex":
        spec = group.factors[factor]
        words = [g for g in ball_elements(group, eta)
                 if g.syllable_count == 0 or g.syllables[0][0] != factor]
        words.sort(key=lambda g: (g.word_length,) + g.sort_key())
        fibers = tuple((w, f) for w in words for f in range(len(spec.table)))
        return FiberIndex(group=group, factor=factor, eta=eta, fibers=fibers)

    def __len__(self) -> int:
        return len(self.fibers)

    @property
    def labels(self) -> tuple[str, ...]:
        out = []
        for (w, f) in self.fibers:
            word = self.group.format(w) if w.syllable_count else "e"
            out.append(f"{word}|{f}" if len(self.group.factors[self.factor].table) > 1
                       else word)
        return tuple(out)

    def position(self, w: GroupElement, f: int) -> int:
        key = (w.syllables, f)
        for i, (wi, fi) in enumerate(self.fibers):
            if (wi.syllables, fi) == key:
                return i
        raise KeyError(f"no fiber for ({w!r}, {f})")

    def state(self, z, fiber: int) -> GroupElement:
        """Group element of lattice point z in the given fiber."""
        w, f = self.fibers[fiber]
        zt = tuple(int(c) for c in z)
        base = self.group.identity
        if any(zt) or f != 0:
            base = self.group.syllable(self.factor, zt, f)
        return base * w

    def locate(self, g: GroupElement) -> tuple[tuple[int, ...], int] | None:
        """Inverse of state(); None when g is outside the neighborhood."""
        spec = self.group.factors[self.factor]
        sylls = g.syllables
        if sylls and sylls[0][0] == self.factor:
            _, z, f = sylls[0]
            rest = self.group.element(sylls[1:])
        else:
            z, f = (0,) * spec.rank, 0
            rest = g
        try:
            return tuple(z), self.position(rest, f)
        except KeyError:
            return None


def induce_first_return(engine: FreeProductEngine, factor: int, eta: int,
                        fibers: FiberIndex | None = None,
                        alpha: float | None = None) -> LatticeChain:
    """First-return chain of the walk on the eta-neighborhood of factor's P.

    Each kernel entry sums all excursion paths exactly (up to the engine's
    box truncation): a step leaving the neighborhood is propagated back
    through the departing branch by backward passage probabilities and one
    first-hit (absorption) distribution in the branching factor.  Lattice
    displacements occur only on direct steps inside P, so the chain's
    z-support equals the P-support of the step measure at every eta.
    """
    group = engine.group
    if not 0 <= factor < len(group.factors):
        raise ValueError(f"no factor {factor} in a {len(group.factors)}-factor product")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    if 3 * eta > engine.radius:
        raise ValueError(f"eta {eta} too large for engine radius {engine.radius}; "
                         "need eta <= radius/3")
    spec = group.factors[factor]
    if fibers is None:
        fibers = FiberIndex.build(group, factor, eta)
    index = {(w.syllables, f): i for i, (w, f) in enumerate(fibers.fibers)}
    zero = (0,) * spec.rank
    memo: dict[tuple, dict] = {}

    def first_hit(j_star: int, syl, depth: int) -> dict:
        key = (j_star, syl[1], syl[2], depth)
        if key not in memo:
            memo[key] = absorption_distribution(
                engine.factor_chain(j_star), syl[1], syl[2], depth, engine.radius)
        return memo[key]

    entries = []
    for k, (w, f) in enumerate(fibers.fibers):
        for s, wt in engine.mu.items():
            if s.syllable_count == 0:
                entries.append((k, k, zero, wt))
                continue
            sf, sz, sj = s.syllables[0]
            if w.syllable_count == 0 and sf == factor:
                entries.append((k, index[((), spec.finite_mul(f, sj))], tuple(sz), wt))
                continue
            h = w * s
            if h.word_length <= eta:
                entries.append((k, index[(h.syllables, f)], zero, wt))
                continue
            sylls = h.syllables
            depths = [0]
            for (ff, zz, jj) in sylls:
                depths.append(depths[-1] + group.factors[ff].syllable_length(zz, jj))
            lstar = max(l for l in range(len(sylls)) if depths[l] <= eta)
            tail = wt
            for (ff, zz, jj) in sylls[lstar + 1:]:
                tail *= engine.backward_passage(ff, zz, jj)
            v0 = sylls[lstar]
            prefix = group.element(sylls[:lstar])
            for (zv, jv), prob in sorted(first_hit(v0[0], v0, eta - depths[lstar]).items()):
                if any(zv) or jv != 0:
                    target = prefix * group.syllable(v0[0], zv, jv)
                else:
                    target = prefix
                entries.append((k, index[(target.syllables, f)], zero, tail * prob))
    if alpha is None:
        bound_note = f"box_radius={engine.radius}"
    else:
        tail_est = math.exp(-alpha * engine.radius) / (1.0 - math.exp(-alpha))
        bound_note = f"truncation_bound={tail_est:.6e}"
    chain = LatticeChain.build(
        rank=spec.rank, fiber_count=len(fibers), entries=entries,
        fiber_labels=fibers.labels,
        provenance=f"induced(factor={factor}, eta={eta}, {bound_note})")
    if not chain.is_strictly_submarkov:
        raise AssumptionError(
            "induced chain is not strictly sub-Markov; no mass escapes the "
            "neighborhood, so the level-set machinery does not apply")
    return chain


def verify_same_green(chain: LatticeChain, engine: FreeProductEngine,
                      fibers: FiberIndex, radius: int | None = None,
                      z_probes=((0,), (1,), (2, 1), (-1, 2), (3, 3))) -> float:
    """Max |G_chain - G_walk| over probe states; the two must agree.

    The induced chain observes the walk at its visits to the neighborhood,
    so its Green's function at any pair of neighborhood states equals the
    walk's Green's function at the corresponding group elements.
    """
    rank = chain.rank
    probes = []
    for z in z_probes:
        zt = tuple(int(c) for c in z)
        if len(zt) < rank:
            zt = zt + (0,) * (rank - len(zt))
        probes.append(zt[:rank])
    cg = ChainGreen(chain, radius=radius if radius is not None else engine.radius)
    worst = 0.0
    for zt in probes:
        for k in range(len(fibers)):
            target = fibers.state(zt, k)
            ref = engine.green(engine.group.identity, target)
            got = cg.green(0, zt, k)
            worst = max(worst, abs(got - ref))
    return worst


def moment_growth(engine: FreeProductEngine, factor: int, eta_list,
                  cap: float = math.inf, margin: float = 0.05) -> dict[int, float]:
    """Exponential-moment reach M(eta) of the induced chains.

    Every chain produced here has finitely many kernel entries, so all
    exponential moments converge and M(eta) is the configured cap.  A
    fitted decay rate is only meaningful for chains with an extended
    z-support; with fewer than four occupied shells the fit is refused.
    """
    table: dict[int, float] = {}
    for eta in eta_list:
        chain = induce_first_return(engine, factor, int(eta))
        shells = sorted({sum(abs(c) for c in dz) for (_, _, dz, _) in chain.entries})
        if len(shells) <= 3:
            table[int(eta)] = cap
            continue
        peaks = {}
        for (_, _, dz, w) in chain.entries:
            s = sum(abs(c) for c in dz)
            if s > 0:
                peaks[s] = max(peaks.get(s, 0.0), w)
        if len(peaks) < 4:
            raise ValueError("insufficient support range to fit a decay rate")
        xs = np.array(sorted(peaks))
        ys = np.log(np.array([peaks[s] for s in sorted(peaks)]))
        slope = float(np.polyfit(xs, ys, 1)[0])
        table[int(eta)] = min(cap, max(0.0, -slope - margin))
    etas = sorted(table)
    for a, b in zip(etas, etas[1:]):
        if table[b] < table[a] - 1e-12:
            raise AssumptionError(
                f"moment reach decreased from eta={a} to eta={b}")
    return table
