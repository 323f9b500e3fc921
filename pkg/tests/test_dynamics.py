import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tamelab as tl
from tamelab.dynamics import MoebiusBranch, uni_distance_exact


@pytest.fixture(scope="module")
def gauss():
    return tl.gauss_source()


def test_branch_intervals_tile(gauss):
    b = tl.rary_source(3)
    ivs = [b.branch(m).interval() for m in range(3)]
    assert ivs[0][0] == 0 and ivs[-1][1] == 1
    for (lo1, hi1), (lo2, hi2) in zip(ivs, ivs[1:]):
        assert hi1 == lo2


def test_gauss_fundamental_intervals(gauss):
    lo, hi = gauss.fundamental_interval((1,))
    assert (lo, hi) == (Fraction(1, 2), Fraction(1, 1))
    lo, hi = gauss.fundamental_interval((2,))
    assert (lo, hi) == (Fraction(1, 3), Fraction(1, 2))
    assert gauss.p_word((2,)) == Fraction(1, 6)


def test_gauss_lambda_reference_values(gauss):
    # the depth-1 mixing sum at s=2 has the closed form pi^2/3 - 3
    d1 = gauss.lambda_k(2.0, 1)
    assert float(d1) == pytest.approx(math.pi ** 2 / 3 - 3, abs=1e-9)
    ref = tl.gauss_lambda_reference(2.0)
    assert ref.value == pytest.approx(1.3511315744903882, abs=1e-11)
    assert ref.bound < 1e-11
    ref3 = tl.gauss_lambda_reference(3.0)
    tree3 = gauss.lambda_series(3.0)
    assert abs(ref3.value - tree3.value) <= ref3.bound + tree3.bound


def test_gauss_series_certification_barrier(gauss):
    with pytest.raises(tl.TruncationBudget):
        gauss.lambda_series(1.5)
    loose = gauss.lambda_series(2.0, rtol=1e-4)
    assert loose.value == pytest.approx(1.35113157, abs=2 * loose.bound)


def test_contraction_profile(gauss):
    prof = gauss.contraction_profile(2)
    assert prof[1] == 1.0
    assert prof[2] == 0.25
    assert prof["contracting"]


def test_emit_word_binary():
    b = tl.rary_source(2)
    assert tl.emit_word(b, 0.40625, 4) == (0, 1, 1, 0)
    assert tl.emit_word(b, Fraction(13, 32), 5) == (0, 1, 1, 0, 1)


def test_emit_word_gauss(gauss):
    assert tl.emit_word(gauss, 2 ** 0.5 - 1, 4) == (2, 2, 2, 2)


def test_emit_word_precision_exhausted(gauss):
    # a rational orbit terminates at 0 and cannot be resolved further
    with pytest.raises(tl.PrecisionExhausted):
        tl.emit_word(gauss, Fraction(1, 2), 6)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99))
def test_emit_word_deterministic_and_interval_consistent(x):
    b = tl.rary_source(2)
    w = tl.emit_word(b, x, 6)
    assert w == tl.emit_word(b, x, 6)
    lo, hi = b.fundamental_interval(w)
    assert float(lo) <= x <= float(hi)


def test_uni_distance_exact_gauss_pairs(gauss):
    d12 = uni_distance_exact(gauss.branch(1), gauss.branch(2))
    assert d12 == pytest.approx(1 / 3, abs=1e-12)
    d23 = uni_distance_exact(gauss.branch(2), gauss.branch(3))
    assert d23 == pytest.approx(2 / (3 * 4), abs=1e-12)
    # symmetric
    assert d12 == pytest.approx(uni_distance_exact(gauss.branch(2), gauss.branch(1)), abs=1e-15)


def test_uni_distance_exact_affine_is_zero():
    b = tl.rary_source(2)
    assert uni_distance_exact(b.branch(0), b.branch(1)) == pytest.approx(0.0, abs=1e-15)


def test_uni_distance_exact_sign_change_returns_none():
    assert uni_distance_exact(MoebiusBranch(0, 1, 2, -1), MoebiusBranch(1, 0, 0, 2)) is None


def test_uni_probability_estimates(gauss):
    u1 = tl.uni_probability_estimate(gauss, 1)
    assert u1.estimate == pytest.approx(0.7654887088703203, abs=1e-9)
    assert u1.threshold == pytest.approx(2 ** -0.5, abs=1e-12)
    assert u1.covered_mass == pytest.approx(0.9995001874375193, abs=1e-9)
    u2 = tl.uni_probability_estimate(gauss, 2)
    assert u2.estimate == pytest.approx(0.7904611954370713, abs=1e-9)
    assert u2.covered_mass == pytest.approx(0.9200806316733272, abs=1e-9)


def test_uni_probability_affine_shortcut():
    rep = tl.uni_probability_estimate(tl.rary_source(2), 1)
    assert rep.estimate == 1.0


def test_check_good_class_gauss(gauss):
    rep = tl.check_good_class(gauss)
    assert rep.good and rep.G1 and rep.G2 and rep.G3
    assert rep.rho_hat == pytest.approx(0.5, abs=1e-12)
    assert rep.A_hat == pytest.approx(2.0, abs=1e-12)
    assert rep.sigma0_hat == pytest.approx(0.500687074084458, abs=1e-6)
    assert "not a proof" in rep.note


def test_check_good_class_binary():
    rep = tl.check_good_class(tl.rary_source(2))
    assert rep.good
    assert rep.rho_hat == pytest.approx(0.5, abs=1e-12)
    assert rep.A_hat == 0.0
    assert rep.sigma0_hat == 0.0


def test_diop_quantities_gauss(gauss):
    d = tl.diop_quantities(gauss, [(1,), (2,), (1, 2)])
    phi = (1 + 5 ** 0.5) / 2
    assert d.rates[(1,)] == pytest.approx(-2 * math.log(phi), abs=1e-12)
    assert d.rates[(2,)] == pytest.approx(2 * math.log(2 ** 0.5 - 1), abs=1e-12)
    r = d.pair_ratios[((1,), (2,))]
    assert r == pytest.approx(0.545979403225449, abs=1e-9)
    assert d.triple_ratios  # three words give at least one triple ratio


def test_fixed_point_translation_raises():
    with pytest.raises(ValueError):
        MoebiusBranch(1, 1, 0, 1).fixed_point()


def test_branch_count_and_validation(gauss):
    assert gauss.branch_count() is None
    assert tl.rary_source(3).branch_count() == 3
    with pytest.raises(ValueError):
        tl.moebius_source(((1, 0, 0, 2), (1, 2, 0, 4)))  # gap: [0,1/2] then [1/2,3/4]
