import math

import numpy as np
import pytest

import tamelab as tl
from tamelab import operator as op

TAU = 2 * math.pi / math.log(2)


@pytest.fixture(scope="module")
def gauss():
    return tl.gauss_source()


def test_dominant_eigenvalue_is_one_at_s1(gauss):
    M = op.tangent_matrix(gauss, 1.0, N=24)
    lam = op.dominant_eigenvalue(M)
    assert abs(lam - 1.0) < 1e-8


def test_entropy_via_operator(gauss):
    h = op.entropy_via_operator(gauss)
    assert h == pytest.approx(math.pi ** 2 / (6 * math.log(2)), abs=1e-6)


def test_rary_quasi_inverse_closed_form():
    b = tl.rary_source(2)
    for s in (1.5, 2.0, 3.0):
        got = op.lambda_via_operator(b, s)
        want = 1.0 / (1.0 - 2.0 ** (1 - s))
        assert got.value == pytest.approx(want, abs=1e-10)


def test_gauss_operator_matches_reference(gauss):
    for s in (1.5, 2.0, 3.0):
        got = op.lambda_via_operator(gauss, s)
        ref = tl.gauss_lambda_reference(s)
        assert abs(got.value - ref.value) <= 1e-6 + ref.bound


def test_operator_error_bound_is_honest(gauss):
    got = op.lambda_via_operator(gauss, 3.0)
    ref = tl.gauss_lambda_reference(3.0)
    assert abs(got.value - ref.value) <= got.bound + ref.bound + 1e-12


def test_quasi_inverse_pole_binary_lattice():
    b = tl.rary_source(2)
    with pytest.raises(tl.QuasiInversePole):
        op.lambda_via_operator(b, complex(1.0, TAU))


def test_gauss_clear_of_binary_lattice(gauss):
    got = op.lambda_via_operator(gauss, complex(1.0, TAU))
    assert np.isfinite(got.value.real) and np.isfinite(got.value.imag)


def test_resolvent_probe_finite_on_gauss(gauss):
    vals = [op.resolvent_norm_probe(gauss, float(t)) for t in (2, 8, 32)]
    assert all(np.isfinite(v) and v < 1e3 for v in vals)


def test_lambda_via_operator_refines_with_degree(gauss):
    coarse = op.lambda_via_operator(gauss, 2.0, N=10)
    fine = op.lambda_via_operator(gauss, 2.0, N=18)
    ref = tl.gauss_lambda_reference(2.0)
    assert abs(fine.value - ref.value) <= abs(coarse.value - ref.value) + 1e-12
    assert fine.bound <= coarse.bound


def test_discretize_dispatch(gauss):
    Mt = op.discretize(gauss, 2.0, N=12, which="tangent")
    assert Mt.shape == (13, 13)
    Ms = op.discretize(gauss, 2.0, N=8, which="secant")
    assert Ms.shape[0] == Ms.shape[1]
    with pytest.raises(ValueError):
        op.discretize(gauss, 2.0, which="nonsense")


def test_spectral_radius_profile(gauss):
    prof = op.spectral_radius_profile(gauss, 2.0)
    assert 0 < abs(prof["value"]) < 1
    assert prof["error"] < 1e-6
