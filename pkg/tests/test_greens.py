"""Truncated-ball Green's function solver against tree closed forms."""
import math

import numpy as np
import pytest

from relwalk import (BallIndex, StepMeasure, green_matrix, kesten_alpha,
                     restricted_green, tail_bound)
from relwalk.errors import InvalidMeasureError
from relwalk.greens import green, hitting_probability, lazy, martin_kernel


def test_ball_green_approaches_tree_value_from_below(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    vals = []
    for r in (6, 8, 10):
        ball = BallIndex(g, r)
        vals.append(green(mu, ball, g.identity, g.identity))
    assert vals[0] <= vals[1] <= vals[2] <= 1.5 + 1e-12
    assert abs(vals[2] - 1.5) < 1e-3


def test_interior_harmonicity_of_green_columns(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 8)
    y = g.word("b")
    col = {x: green(mu, ball, x, y) for x in
           [g.identity, g.word("a"), g.word("a^-1"), g.word("b"), g.word("b^-1"),
            g.word("a^2"), g.word("a*b"), g.word("a*b^-1")]}
    x = g.word("a")
    expected = sum(w * green(mu, ball, x * s, y) for s, w in mu.items())
    assert abs(col[x] - expected) < 1e-12
    yy = green(mu, ball, y, y)
    expected_y = 1.0 + sum(w * green(mu, ball, y * s, y) for s, w in mu.items())
    assert abs(yy - expected_y) < 1e-12


def test_symmetric_measure_gives_symmetric_green(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 7)
    x, y = g.word("a"), g.word("b^-1*a")
    assert abs(green(mu, ball, x, y) - green(mu, ball, y, x)) < 1e-12


def test_lazy_walk_doubles_green_entrywise(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 6)
    targets = [g.identity, g.word("a"), g.word("b^-1")]
    gt = green_matrix(mu, ball, targets=targets)
    lt = green_matrix(lazy(mu), ball, targets=targets)
    assert np.max(np.abs(lt.values - 2.0 * gt.values)) < 1e-12


def test_restricted_green_matches_last_visit_decomposition(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 10)
    val = restricted_green(mu, ball, g.identity, g.word("a"), [g.identity])
    assert abs(val - 1.0 / 3.0) < 1e-4
    val2 = restricted_green(mu, ball, g.identity, g.word("b"), [g.word("a")])
    assert abs(val2 - 4.0 / 9.0) < 1e-4


def test_restricted_green_without_avoid_set_is_plain_green(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 6)
    assert restricted_green(mu, ball, g.identity, g.word("a"), []) == \
        green(mu, ball, g.identity, g.word("a"))


def test_kesten_alpha_bounds_and_validation(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 10)
    a = kesten_alpha(mu, 6, ball)
    assert a >= -math.log(math.sqrt(3.0) / 2.0) - 1e-12
    with pytest.raises(ValueError):
        kesten_alpha(mu, 5, ball)
    with pytest.raises(ValueError):
        kesten_alpha(mu, 6, BallIndex(g, 4))


def test_periodic_returns_raise_without_laziness(f2_cfg):
    g = f2_cfg.group
    nu = StepMeasure.from_weights(g, [("a", "0.5"), ("a^-1", "0.5")])
    ball = BallIndex(g, 10)
    assert kesten_alpha(nu, 6, ball) > 0.0
    odd_only = StepMeasure.from_weights(g, [("a", "1")])
    with pytest.raises(InvalidMeasureError):
        kesten_alpha(odd_only, 6, ball)


def test_tail_bound_is_the_geometric_tail_sum():
    alpha = 0.3
    for ln in (0, 1, 5):
        direct = sum(math.exp(-alpha * (ln + k)) for k in range(4000))
        assert abs(tail_bound(alpha, ln) - direct) < 1e-10


def test_hitting_probability_and_kernel_against_tree_values(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 10)
    assert abs(hitting_probability(mu, ball, g.identity, g.word("a")) - 1.0 / 3.0) < 1e-4
    assert hitting_probability(mu, ball, g.word("a"), g.word("a")) == 1.0
    k = martin_kernel(mu, ball, g.word("a"), g.word("a^4"))
    assert abs(k - 3.0) < 1e-3


def test_entry_bound_decreases_with_distance(f2_cfg):
    g = f2_cfg.group
    mu = StepMeasure.uniform(g)
    ball = BallIndex(g, 10)
    gt = green_matrix(mu, ball)
    near = gt.entry_bound(g.identity, g.identity)
    far = gt.entry_bound(g.word("a^4"), g.identity)
    assert far > near > 0.0
    tree = 1.5 * 3.0 ** (-4.0)
    assert abs(gt.value(g.word("a^4"), g.identity) - tree) < far
