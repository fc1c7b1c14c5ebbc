"""Green's functions, Martin kernels, and spectral tail estimates on balls.

Everything here works on a truncated state space (a word-metric ball with
absorption outside), so each value is a lower bound on the true Green's
function; the gap is controlled by the Kesten-style tail estimate exposed
as kesten_alpha and tail_bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .balls import BallIndex, ball_elements
from .errors import ConvergenceError, InvalidMeasureError
from .groups import GroupElement
from .measures import StepMeasure

DIRECT_SOLVE_CAP = 50_000
_RESIDUAL_TOL = 1e-12


def lazy(mu: StepMeasure) -> StepMeasure:
    """Half-lazy transform: doubles the Green's function, keeps Martin kernels."""
    return mu.lazy()


def _solve_columns(ball: BallIndex, mu: StepMeasure,
                   targets: Sequence[GroupElement],
                   forbidden: Iterable[GroupElement] = ()) -> np.ndarray:
    """Columns G(., y) of (I - Q)^-1 for y in targets, absorbing off-ball."""
    n = len(ball)
    Q = ball.transition_matrix(mu, forbidden)
    A = (sp.identity(n, format="csc") - Q.T.tocsc())
    rhs = np.zeros((n, len(targets)))
    for j, y in enumerate(targets):
        rhs[ball.index[y], j] = 1.0
    out = np.zeros_like(rhs)
    if n <= DIRECT_SOLVE_CAP:
        lu = spla.splu(A)
        for j in range(rhs.shape[1]):
            out[:, j] = lu.solve(rhs[:, j])
    else:
        symmetric = mu.is_symmetric
        for j in range(rhs.shape[1]):
            if symmetric:
                x, info = spla.cg(A, rhs[:, j], rtol=1e-14, atol=0.0, maxiter=20_000)
            else:
                x, info = spla.bicgstab(A, rhs[:, j], rtol=1e-14, atol=0.0,
                                        maxiter=20_000)
            if info != 0:
                rho = _spectral_radius_estimate(Q)
                raise ConvergenceError(
                    f"iterative Green solve failed (info={info}); estimated "
                    f"spectral radius of the truncated kernel {rho:.6f}")
            out[:, j] = x
    resid = float(np.max(np.abs(A @ out - rhs)))
    if resid > _RESIDUAL_TOL * max(1.0, float(np.max(np.abs(out)))):
        raise ConvergenceError(f"Green solve residual {resid:.3e} above tolerance")
    return out


def _spectral_radius_estimate(Q: sp.csr_matrix, rounds: int = 60) -> float:
    v = np.full(Q.shape[0], 1.0 / Q.shape[0])
    lam = 0.0
    for _ in range(rounds):
        w = Q @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        lam = nw / float(np.linalg.norm(v))
        v = w / nw
    return lam


@dataclass
class GreenTable:
    """Green columns on a ball with per-entry truncation bounds."""

    domain: BallIndex
    targets: tuple[GroupElement, ...]
    values: np.ndarray
    alpha: float

    def value(self, x: GroupElement, y: GroupElement) -> float:
        return float(self.values[self.domain.index[x], self._col(y)])

    def _col(self, y: GroupElement) -> int:
        for j, t in enumerate(self.targets):
            if t == y:
                return j
        raise KeyError(f"{y!r} is not a column target")

    def entry_bound(self, x: GroupElement, y: GroupElement) -> float:
        l = self.domain.radius - x.word_length - y.word_length
        return tail_bound(self.alpha, max(l, 0))

    def martin_kernel(self, x: GroupElement, y: GroupElement,
                      o: GroupElement | None = None) -> float:
        o = self.domain.group.identity if o is None else o
        denom = self.value(o, y)
        if denom <= 0.0:
            raise ZeroDivisionError("Martin kernel needs G(o,y) > 0")
        return self.value(x, y) / denom

    def rows(self):
        """(x_word, y_word, value, error_bound) rows in domain-major order."""
        group = self.domain.group
        for i, x in enumerate(self.domain.elements):
            for j, y in enumerate(self.targets):
                l = self.domain.radius - x.word_length - y.word_length
                yield (group.format(x), group.format(y),
                       float(self.values[i, j]), tail_bound(self.alpha, max(l, 0)))


def green_matrix(mu: StepMeasure, ball: BallIndex,
                 forbidden: Iterable[GroupElement] = (),
                 targets: Sequence[GroupElement] | None = None,
                 alpha: float | None = None,
                 kesten_n: int = 6) -> GreenTable:
    """Solve (I - Q) G = I on the ball for the requested target columns."""
    if targets is None:
        targets = ball_elements(ball.group, min(2, ball.radius))
    if alpha is None:
        try:
            alpha = kesten_alpha(mu, kesten_n, ball)
        except InvalidMeasureError:
            alpha = kesten_alpha(mu.lazy(), kesten_n, ball)
    values = _solve_columns(ball, mu, targets, forbidden)
    return GreenTable(domain=ball, targets=tuple(targets), values=values,
                      alpha=alpha)


def green(mu: StepMeasure, ball: BallIndex, x: GroupElement,
          y: GroupElement, forbidden: Iterable[GroupElement] = ()) -> float:
    col = _solve_columns(ball, mu, [y], forbidden)[:, 0]
    return float(col[ball.index[x]])


def restricted_green(mu: StepMeasure, ball: BallIndex, x: GroupElement,
                     z: GroupElement, avoid: Iterable[GroupElement]) -> float:
    """Weight of paths x -> z avoiding the set at intermediate times.

    Endpoints are exempt: paths may start or end inside the avoided set,
    only the strictly interior positions are constrained, so the value
    decomposes as the k<=1 terms plus first/last steps out of the set
    bracketing a fully killed Green's function.
    """
    avoid_set = set(avoid)
    if not avoid_set:
        return green(mu, ball, x, z)
    if x not in avoid_set and z not in avoid_set:
        return green(mu, ball, x, z, forbidden=avoid_set)
    total = 1.0 if x == z else 0.0
    total += mu(x.inverse() * z)
    outs = [(s, w) for s, w in mu.items() if (x * s) not in avoid_set and (x * s) in ball]
    ins = [(t, w) for t, w in mu.items() if (z * t.inverse()) not in avoid_set
           and (z * t.inverse()) in ball]
    if not outs or not ins:
        return total
    killed_targets = []
    seen = set()
    for t, _ in ins:
        q = z * t.inverse()
        if q not in seen:
            seen.add(q)
            killed_targets.append(q)
    cols = _solve_columns(ball, mu, killed_targets, forbidden=avoid_set)
    col_of = {q: j for j, q in enumerate(killed_targets)}
    for s, ws in outs:
        xi = ball.index[x * s]
        for t, wt in ins:
            total += ws * float(cols[xi, col_of[z * t.inverse()]]) * wt
    return total


def martin_kernel(mu: StepMeasure, ball: BallIndex, x: GroupElement,
                  y: GroupElement, o: GroupElement | None = None) -> float:
    o = ball.group.identity if o is None else o
    cols = _solve_columns(ball, mu, [y])[:, 0]
    denom = float(cols[ball.index[o]])
    if denom <= 0.0:
        raise ZeroDivisionError("Martin kernel needs G(o,y) > 0")
    return float(cols[ball.index[x]]) / denom


def hitting_probability(mu: StepMeasure, ball: BallIndex, x: GroupElement,
                        y: GroupElement) -> float:
    if x == y:
        return 1.0
    cols = _solve_columns(ball, mu, [y])[:, 0]
    gyy = float(cols[ball.index[y]])
    if gyy <= 0.0:
        return 0.0
    return float(cols[ball.index[x]]) / gyy


def kesten_alpha(mu: StepMeasure, n: int, ball: BallIndex) -> float:
    """Return-probability decay estimate alpha_hat = -log p^(n)(e,e) / n.

    alpha_hat >= -log(spectral radius), with equality in the n limit, so
    the derived tail e^(-alpha_hat L) is an asymptotic-rate estimate, not
    a rigorous envelope at small n.
    """
    if n % 2 != 0:
        raise ValueError("n must be even (odd returns can vanish identically)")
    max_step = max((s.word_length for s, _ in mu.items()), default=0)
    if ball.radius < n * max_step:
        raise ValueError(
            f"ball radius {ball.radius} below n*max_step = {n * max_step}; "
            "returns would feel the truncation")
    P = ball.transition_matrix(mu)
    v = np.zeros(len(ball))
    v[ball.index[ball.group.identity]] = 1.0
    for _ in range(n):
        v = P.T @ v
    p = float(v[ball.index[ball.group.identity]])
    if p <= 0.0:
        raise InvalidMeasureError(
            f"p^({n})(e,e) = 0; use the lazy walk for aperiodic returns")
    return -math.log(p) / n


def tail_bound(alpha: float, length: int) -> float:
    """Geometric tail sum e^(-alpha L) / (1 - e^(-alpha))."""
    r = math.exp(-alpha)
    return r ** length / (1.0 - r)
