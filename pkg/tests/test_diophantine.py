import math

import mpmath as mp
import pytest

from tamelab import diophantine as dio


def test_continued_fraction_log2_3():
    x = math.log(3) / math.log(2)
    assert dio.continued_fraction(x, 10) == [1, 1, 1, 2, 2, 3, 1, 5, 2, 23]


def test_convergents():
    cf = [1, 1, 1, 2, 2]
    assert dio.convergents(cf) == [(1, 1), (2, 1), (3, 2), (8, 5), (19, 12)]


def test_rational_candidate_accepts_and_rejects():
    with mp.workprec(512):
        assert dio.rational_candidate(mp.mpf(355) / 113, 200, 400) == (355, 113)
        x = mp.log(3) / mp.log(2)
        assert dio.rational_candidate(x, 64, 400) is None


def test_rational_candidate_needs_precision():
    with pytest.raises(ValueError):
        dio.rational_candidate(1.5, 64, 400)


def test_irrationality_profile_shape():
    prof = dio.irrationality_profile(math.log(3) / math.log(2))
    assert set(prof) == {"cf", "convergents", "max_quality"}
    assert prof["max_quality"] > 0
