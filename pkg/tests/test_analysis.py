import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tamelab as tl
from tamelab import analysis as an


@pytest.fixture(scope="module")
def mem37():
    return tl.Memoryless([0.3, 0.7])


@pytest.fixture(scope="module")
def uniform():
    return tl.Memoryless([0.5, 0.5])


def test_uniform_spot_values(uniform):
    assert an.exact_mean(uniform, "R", 2) == pytest.approx(2.0, abs=1e-12)
    assert an.exact_mean(uniform, "R", 3) == pytest.approx(10 / 3, abs=1e-12)
    assert an.exact_mean(uniform, "C", 2) == pytest.approx(4.0, abs=1e-12)
    assert an.exact_mean(uniform, "B", 2) == pytest.approx(2.0, abs=1e-12)


def test_trivial_sizes(uniform):
    for kind in "RCB":
        assert an.exact_mean(uniform, kind, 0) == 0.0
        assert an.exact_mean(uniform, kind, 1) == 0.0


def test_direct_means_frozen_ladder(mem37):
    dm = an.direct_means(mem37, [4096])
    assert float(dm["R"][0]) == pytest.approx(6704.2538030287205, rel=1e-12)
    assert float(dm["C"][0]) == pytest.approx(62517.721084496945, rel=1e-12)
    assert float(dm["B"][0]) == pytest.approx(383262.97943625844, rel=1e-11)


def test_three_methods_agree(mem37):
    for kind in "RCB":
        for n in (2, 5, 8, 16, 64):
            a = an.exact_mean_alternating(mem37, kind, n)
            d = an.exact_mean_direct(mem37, kind, n)
            r = an.rice_integral(mem37, kind, n)
            ref = max(1.0, abs(d.value))
            assert abs(a.value - d.value) / ref < 1e-9
            assert abs(r.value - d.value) / ref < 1e-9


def test_rice_routes(mem37):
    small = an.rice_mean(mem37, "B", 6)
    assert small.route == "circle"
    big = an.rice_mean(mem37, "B", 24)
    assert big.route == "line"
    forced = an.rice_mean(mem37, "B", 6, route="line")
    assert abs(forced.value - small.value) < 1e-9 * abs(small.value)


def test_rice_certified_error_covers_truth(mem37):
    for n in (4, 12, 32):
        r = an.rice_integral(mem37, "C", n)
        d = an.exact_mean_direct(mem37, "C", n)
        assert abs(r.value - d.value) <= r.certified_abs_error + d.certified_abs_error + 1e-12


def test_rice_kernel_underflow(mem37):
    with pytest.raises(tl.KernelUnderflow):
        an.rice_integral(mem37, "R", 4, t_max=2.0)


def test_direct_rejects_flat_spectrum():
    skew = tl.Memoryless([1e-9, 1 - 1e-9])
    with pytest.raises(tl.UnsupportedSource):
        an.exact_mean_direct(skew, "R", 64)


def test_alternating_certificate(mem37):
    base = an.exact_mean_alternating(mem37, "B", 64)
    bumped = an.exact_mean_alternating(mem37, "B", 64, precision_bits=300)
    assert abs(base.value - bumped.value) <= base.certified_abs_error + bumped.certified_abs_error
    assert base.certified_abs_error < 1e-6


def test_exact_mean_needs_closed_series():
    with pytest.raises(tl.UnsupportedSource):
        an.exact_mean(tl.gauss_source(), "R", 8)


def test_varpi_values(mem37):
    h = mem37.entropy()
    assert an.varpi(mem37, "R", 1.0) == pytest.approx(1.0 / h, rel=1e-12)
    lam = 0.3 ** 2 + 0.7 ** 2
    assert an.varpi(mem37, "C", 2.0) == pytest.approx(2.0 / (1 - lam), rel=1e-12)
    assert an.varpi(mem37, "B", 3.0) == pytest.approx(
        (2.0 / (3 * 2)) / (1 - (0.3 ** 3 + 0.7 ** 3)), rel=1e-12)


def test_asymptotic_fit_constants(mem37):
    ladder = [2 ** e for e in range(4, 13)]
    fC = an.asymptotic_fit(mem37, "C", ladder)
    fB = an.asymptotic_fit(mem37, "B", ladder)
    assert fC.coefficients["a"] == pytest.approx(1.6466267611424847, rel=1e-9)
    assert fB.coefficients["b"] == pytest.approx(-3.2334984478375017, rel=1e-9)
    assert fB.coefficients["c"] == pytest.approx(7.208868561483534, rel=1e-9)
    assert abs(fC.residuals[-1]) < 1e-5
    assert abs(fC.residuals[0]) > abs(fC.residuals[-1])


def test_main_term_shapes(mem37):
    h = mem37.entropy()
    n = 512.0
    assert an.main_term(mem37, "R", n) == pytest.approx(n / h, rel=1e-12)
    got = an.main_term(mem37, "C", n, {"a": 2.0})
    assert got == pytest.approx(n * math.log(n) / h + 2.0 * n, rel=1e-12)


def test_asymptotic_main_term_periodic(uniform):
    pred = an.asymptotic_main_term(uniform, "R", 1024)
    assert pred.regime == "periodic"
    assert pred.fluctuation is not None
    assert pred.fluctuation["tau"] == pytest.approx(2 * math.pi / math.log(2), rel=1e-12)
    exact = an.exact_mean(uniform, "R", 1024)
    # the R expansion carries a -1 constant the pure template omits
    assert pred.value - exact == pytest.approx(1.0, abs=1e-6)


def test_asymptotic_main_term_aperiodic_regime():
    pred = an.asymptotic_main_term(tl.Memoryless([0.5, 1 / 3, 1 / 6]), "C", 512)
    assert pred.regime == "H-tame"


def test_periodic_fluctuation_requires_periodicity(mem37):
    with pytest.raises(tl.UnsupportedSource):
        an.periodic_fluctuation(mem37, "R", [64])


def test_monte_carlo_reproducible(mem37):
    a = an.monte_carlo(mem37, 8, 300, seed=5)
    b = an.monte_carlo(mem37, 8, 300, seed=5)
    for kind in "RCB":
        assert a[kind].mean == b[kind].mean
        assert a[kind].se == b[kind].se


def test_monte_carlo_trial_prefix_stability(mem37):
    full = an.simulate_costs(mem37, 8, 50, seed=7)
    half = an.simulate_costs(mem37, 8, 25, seed=7)
    for kind in "RCB":
        assert np.array_equal(full[kind][:25], half[kind])


def test_monte_carlo_tracks_exact(mem37):
    est = an.monte_carlo(mem37, 8, 20_000, seed=11)
    for kind in "RCB":
        exact = an.exact_mean(mem37, kind, 8)
        assert abs(est[kind].mean - exact) <= 5 * est[kind].se


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.1, 1.0), min_size=2, max_size=4), st.integers(2, 24))
def test_alternating_matches_direct_property(raw, n):
    probs = [r / sum(raw) for r in raw]
    src = tl.Memoryless(probs)
    a = an.exact_mean_alternating(src, "C", n)
    d = an.exact_mean_direct(src, "C", n)
    assert abs(a.value - d.value) <= max(1.0, abs(d.value)) * 1e-9


def test_mean_R_monotone_in_n(mem37):
    means = an.direct_means(mem37, list(range(2, 129)))["R"]
    assert np.all(np.diff(means) > 0)
