"""Floyd metric, geodesics, and transition-point detection."""
import math

import pytest

from relwalk import (FloydFunction, TransitionParams, floyd_distance,
                     gromov_product_coned, transition_points, word_geodesic)
from relwalk.floyd import (coned_off_distance, floyd_transition_check,
                           relative_reparametrize)


def test_scaling_function_total_and_validation():
    f = FloydFunction(0.5)
    assert f(0) == 1.0 and f(3) == 0.125
    assert f.total == pytest.approx(2.0)
    with pytest.raises(ValueError):
        FloydFunction(1.0)
    with pytest.raises(ValueError):
        FloydFunction(0.0)


def test_tree_floyd_distances_through_the_basepoint(f2_cfg):
    g = f2_cfg.group
    f = FloydFunction(0.5)
    e = g.identity
    assert floyd_distance(f, e, g.word("a"), g.word("a^-1"), radius=5) == pytest.approx(2.0)
    assert floyd_distance(f, e, e, g.word("a^3"), radius=5) == pytest.approx(1.75)
    assert floyd_distance(f, e, e, e, radius=5) == 0.0


def test_floyd_diameter_is_bounded_by_twice_the_total(f2_cfg):
    g = f2_cfg.group
    f = FloydFunction(0.5)
    far = floyd_distance(f, g.identity, g.word("a^5"), g.word("b^-5"), radius=6)
    assert far <= 2.0 * f.total + 1e-12


def test_basepoint_translation_invariance(f2_cfg):
    g = f2_cfg.group
    f = FloydFunction(0.5)
    t = g.word("b*a")
    d0 = floyd_distance(f, g.identity, g.word("a"), g.word("a*b"), radius=5)
    d1 = floyd_distance(f, t, t * g.word("a"), t * g.word("a*b"), radius=7)
    assert d0 == pytest.approx(d1, abs=1e-12)


def test_endpoints_outside_radius_rejected(f2_cfg):
    g = f2_cfg.group
    with pytest.raises(ValueError):
        floyd_distance(FloydFunction(0.5), g.identity, g.word("a^9"), g.identity, radius=5)


def test_word_geodesic_steps_by_unit_generators(z2_cfg):
    g = z2_cfg.group
    x, z = g.word("a^-1"), g.word("a*b^2*t")
    path = word_geodesic(x, z)
    assert path[0] == x and path[-1] == z
    assert len(path) == 1 + (x.inverse() * z).word_length
    for p, q in zip(path, path[1:]):
        assert (p.inverse() * q).word_length == 1


def test_transition_points_of_a_two_coset_geodesic(z2_cfg):
    g = z2_cfg.group
    path = word_geodesic(g.identity, g.word("a^5*t*a^5"))
    params = TransitionParams(epsilon=1, window=4)
    pts = transition_points(path, params, parabolic=[0])
    assert pts == [3, 4, 5, 6, 7, 8]


def test_path_inside_one_coset_hull_has_no_transitions(z2_cfg):
    g = z2_cfg.group
    path = word_geodesic(g.word("a^-5*t^-1"), g.word("a^5"))
    pts = transition_points(path, TransitionParams(epsilon=1, window=4), parabolic=[0])
    assert pts == []


def test_no_parabolics_means_everything_is_a_transition(f2_cfg):
    g = f2_cfg.group
    path = word_geodesic(g.identity, g.word("a^3*b"))
    pts = transition_points(path, TransitionParams(epsilon=1, window=2), parabolic=[])
    assert pts == list(range(len(path)))


def test_coned_off_distance_collapses_parabolic_runs(z2_cfg):
    g = z2_cfg.group
    assert coned_off_distance(g.identity, g.word("a"), [0]) == 1
    assert coned_off_distance(g.identity, g.word("a^3"), [0]) == 2
    assert coned_off_distance(g.identity, g.word("a^100"), [0]) == 2
    assert coned_off_distance(g.identity, g.word("t*a^100*t"), [0]) == 4
    assert coned_off_distance(g.identity, g.word("a^100"), []) == 100


def test_gromov_products_grow_along_a_conical_ray(z2_cfg):
    g = z2_cfg.group
    e = g.identity
    seq = [g.word("a*t") ** n for n in range(1, 6)]
    for n, x in enumerate(seq, start=1):
        for m, z in enumerate(seq, start=1):
            assert gromov_product_coned(x, z, e, [0]) == 2.0 * min(n, m)


def test_reparametrization_drops_deep_coset_interiors(z2_cfg):
    g = z2_cfg.group
    path = word_geodesic(g.identity, g.word("a^10*t"))
    out = relative_reparametrize(path, [0])
    assert len(out) == 3
    assert out[0] == g.identity and out[-1] == g.word("a^10*t")
    full = relative_reparametrize(path, [])
    assert full == list(path)


def test_transition_check_reports_a_positive_floor(z2_cfg):
    g = z2_cfg.group
    samples = [(g.word("a^-2"), g.word("a^2"), g.identity),
               (g.word("t^-1"), g.word("b*t"), g.identity)]
    floor = floyd_transition_check(FloydFunction(0.5), samples, radius=5)
    assert floor > 0.0
