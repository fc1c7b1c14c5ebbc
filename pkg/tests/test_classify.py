"""Boundary classification, Ancona ratios, and Martin convergence."""
import math

import numpy as np
import pytest

from relwalk import (SequenceSpec, ancona_ratio, classify, martin_convergence,
                     representative_invariance, separation_experiment)
from relwalk.errors import BoundedSequenceError, ParseError
from relwalk.perron import BoundaryPointU, level_set_point, minimize_lambda
from relwalk.groups import Coset


def test_template_exponent_parsing(z2_cfg):
    g = z2_cfg.group
    spec = SequenceSpec(name="diag", templates=("a^n*b^n",), start=1, stop=4)
    assert spec.element(g, 3) == g.word("a^3*b^3")
    affine = SequenceSpec(name="odd", templates=("a^2n+1",), start=0, stop=3)
    assert affine.element(g, 2) == g.word("a^5")
    const = SequenceSpec(name="mix", templates=("t*a^n",), start=1, stop=4)
    assert const.element(g, 1) == g.word("t*a")
    with pytest.raises(ParseError):
        SequenceSpec(name="bad", templates=("a^n^2",), start=1, stop=3).element(g, 1)


def test_alternate_mode_cycles_templates(z2_cfg):
    g = z2_cfg.group
    spec = SequenceSpec(name="alt", templates=("a^n", "b^n"), start=1, stop=6,
                        mode="alternate")
    els = spec.elements(g)
    assert els[0] == g.word("b^1")
    assert els[1] == g.word("a^2")
    with pytest.raises(ParseError):
        SequenceSpec(name="two", templates=("a^n", "b^n"), start=1, stop=3)


def test_diagonal_sequence_is_parabolic_with_unit_diagonal_direction(z2_cfg):
    g = z2_cfg.group
    spec = SequenceSpec(name="diag", templates=("a^n*b^n",), start=1, stop=10)
    res = classify(g, spec, parabolic=[0])
    assert res.tag == "Parabolic"
    assert res.coset is not None and res.coset.factor == 0
    s = 1.0 / math.sqrt(2.0)
    assert np.allclose(res.direction, (s, s), atol=1e-9)


def test_mixed_syllable_sequence_is_conical(z2_cfg):
    g = z2_cfg.group
    spec = SequenceSpec(name="at", templates=("a*t",), start=1, stop=10)
    seq = [g.word("a*t") ** n for n in range(1, 11)]
    res = classify(g, seq, parabolic=[0])
    assert res.tag == "Conical"


def test_axis_swapping_sequence_stays_unresolved(z2_cfg):
    g = z2_cfg.group
    spec = SequenceSpec(name="swap", templates=("a^n", "b^n"), start=1, stop=12,
                        mode="alternate")
    res = classify(g, spec, parabolic=[0])
    assert res.tag == "Unresolved"


def test_second_factor_ray_is_conical_relative_to_first(z2_cfg):
    g = z2_cfg.group
    seq = [g.word(f"t^{n}") for n in range(1, 11)]
    res = classify(g, seq, parabolic=[0])
    assert res.tag == "Conical"


def test_translated_sequence_lands_in_translated_coset(z2_cfg):
    g = z2_cfg.group
    spec = SequenceSpec(name="tdiag", templates=("t*a^n*b^n",), start=1, stop=10)
    res = classify(g, spec, parabolic=[0])
    assert res.tag == "Parabolic"
    assert res.coset == Coset.of(g.word("t"), 0)
    s = 1.0 / math.sqrt(2.0)
    assert np.allclose(res.direction, (s, s), atol=1e-9)


def test_representative_invariance_for_the_diagonal(z2_cfg):
    g = z2_cfg.group
    spec = SequenceSpec(name="diag", templates=("a^n*b^n",), start=1, stop=14)
    out = representative_invariance(g, spec, [0], offset=g.word("a"))
    assert out["agree"]
    assert out["direction_gap"] < 0.05


def test_bounded_sequences_are_rejected(z2_cfg):
    g = z2_cfg.group
    seq = [g.word("a"), g.identity, g.word("a"), g.identity,
           g.word("a"), g.identity]
    with pytest.raises(BoundedSequenceError):
        classify(g, seq, parabolic=[0])


def test_ancona_ratio_conventions_and_tree_values(f2_engine, f2_cfg):
    g = f2_cfg.group
    eng = f2_engine
    x, z = g.word("a^-1"), g.word("a")
    assert ancona_ratio(eng, x, z, g.identity, radius=-1) == 1.0
    assert ancona_ratio(eng, x, z, g.identity, radius=0) == 0.0
    off_axis = ancona_ratio(eng, g.identity, g.word("a"), g.word("b"), radius=0)
    assert abs(off_axis - 8.0 / 9.0) < 1e-10
    assert ancona_ratio(eng, x, z, g.identity, radius=2) == 0.0


def test_martin_convergence_along_a_free_factor_ray(f2_engine, f2_cfg):
    g = f2_cfg.group
    seq = [g.word(f"a^{n}") for n in range(3, 9)]
    pts = [g.identity, g.word("a"), g.word("a^2"), g.word("b")]
    rep = martin_convergence(f2_engine, seq, pts, ns=list(range(3, 9)))
    assert len(rep.rows) == 6
    assert rep.rows[0].kernels[0] == 1.0
    assert abs(rep.rows[-1].kernels[1] - 3.0) < 1e-12
    deltas = [d for _, d in rep.cauchy_deltas]
    assert deltas[-1] <= deltas[0]
    assert deltas[-1] < 1e-9


def test_martin_ratio_deviation_against_boundary_prediction(z2_engine, z2_cfg, z2_chain_eta0):
    g = z2_cfg.group
    s = 1.0 / math.sqrt(2.0)
    bp = level_set_point(z2_chain_eta0, (s, s))
    coset = Coset.of(g.identity, 0)
    seq = [g.word(f"a^{n}*b^{n}") for n in (6, 8, 10)]
    pts = [g.identity, g.word("a"), g.word("b"), g.word("a*b")]
    rep = martin_convergence(z2_engine, seq, pts, ns=[6, 8, 10],
                             boundary=bp, coset=coset)
    assert rep.max_ratio_deviation is not None
    assert rep.ratio_rows
    last = [r for r in rep.ratio_rows if r["n"] == 10]
    assert rep.max_ratio_deviation == pytest.approx(max(r["rel_dev"] for r in last))


def test_separation_certificate_for_the_free_group_chain(f2a_chain):
    rep = separation_experiment(f2a_chain, (-1.0,), (1.0,), ns=list(range(1, 11)))
    assert rep.certified
    for n, d in zip(rep.ns, rep.decay):
        assert abs(d - 3.0 ** (-n)) < 1e-9
    for n, gmin in zip(rep.ns, rep.grid_min):
        assert abs(gmin - 3.0 ** n) < 3.0 ** n * 1e-9
    assert rep.u1[0] == pytest.approx(math.log(3.0), abs=1e-9)


def test_separation_rejects_equal_directions(f2a_chain):
    with pytest.raises(ValueError):
        separation_experiment(f2a_chain, (1.0,), (1.0,))


def test_kernel_ratio_correction_shrinks_like_one_over_n(z2_engine, z2_cfg, z2_chain_eta0):
    g = z2_cfg.group
    s = 1.0 / math.sqrt(2.0)
    bp = level_set_point(z2_chain_eta0, (s, s))
    coset = Coset.of(g.identity, 0)
    pts = [g.identity, g.word("a"), g.word("b^-1")]
    devs = {}
    for n in (6, 12):
        rep = martin_convergence(z2_engine, [g.word(f"a^{n}*b^{n}")], pts,
                                 ns=[n], boundary=bp, coset=coset)
        devs[n] = rep.max_ratio_deviation
    assert devs[12] < devs[6]
    assert 1.4 < devs[6] / devs[12] < 2.6
