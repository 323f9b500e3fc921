import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tamelab as tl

LOG2_3 = math.log(3) / math.log(2)


def test_periodicity_uniform_binary():
    p = tl.Memoryless([0.5, 0.5]).periodicity()
    assert p.periodic
    assert p.generator == pytest.approx(math.log(2), rel=1e-12)


def test_periodicity_half_quarter_quarter():
    p = tl.Memoryless([0.5, 0.25, 0.25]).periodicity()
    assert p.periodic
    assert p.generator == pytest.approx(math.log(2), rel=1e-12)


def test_periodicity_rejects_incommensurable():
    assert not tl.Memoryless([0.3, 0.7]).periodicity().periodic


def test_classify_periodicity_periodic_case():
    prof = tl.classify_periodicity(tl.Memoryless([0.25, 0.25, 0.5]))
    assert prof.verdict == "periodic"
    assert prof.generator == pytest.approx(math.log(2), rel=1e-12)


def test_classify_periodicity_aperiodic_witness():
    prof = tl.classify_periodicity(tl.Memoryless([0.5, 1 / 3, 1 / 6]))
    assert prof.verdict == "aperiodic-candidate"
    assert prof.witness is not None
    assert prof.witness["ratio"] == pytest.approx(LOG2_3, abs=1e-9)
    # the convergents of log2(3) follow 1, 2, 3/2, 8/5, 19/12, ...
    heads = [c for cs in prof.convergents.values() for c in cs[:5]]
    assert (19, 12) in heads


def test_classify_periodicity_requires_memoryless():
    with pytest.raises(tl.UnsupportedSource):
        tl.classify_periodicity(tl.gauss_source())


@settings(max_examples=20, deadline=None)
@given(st.permutations([0.5, 0.25, 0.25]))
def test_classify_periodicity_permutation_invariant(perm):
    prof = tl.classify_periodicity(tl.Memoryless(list(perm)))
    assert prof.verdict == "periodic"
    assert prof.generator == pytest.approx(math.log(2), rel=1e-12)


def test_first_vertical_pole_uniform_binary():
    src = tl.Memoryless([0.5, 0.5])
    t = src.first_vertical_pole()
    assert t == pytest.approx(2 * math.pi / math.log(2), rel=1e-12)
    hits = src.vertical_pole_scan(1.25 * t)
    assert any(abs(h - t) < 1e-6 for h in hits)


def test_entropy_closed_forms():
    assert tl.Memoryless([0.5, 0.5]).entropy() == pytest.approx(math.log(2), rel=1e-14)
    h = tl.Memoryless([0.3, 0.7]).entropy()
    assert h == pytest.approx(0.6108643020548935, rel=1e-14)


def test_lam_and_series():
    src = tl.Memoryless([0.3, 0.7])
    assert src.lam(2.0) == pytest.approx(0.09 + 0.49, rel=1e-14)
    # mixing series over all words, empty word included
    full = src.lambda_series(2.0)
    assert float(full) == pytest.approx(1.0 / (1.0 - 0.58), rel=1e-12)
