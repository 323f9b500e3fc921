"""Spectral discretization of weighted transfer operators.

The weighted operator of an expanding interval system acts on functions
over [0,1] by

    (L_s f)(x)  =  sum over branches h of |h'(x)|^s f(h(x))

and its two-variable (secant) relative replaces |h'| by the absolute
difference quotient |h(x)-h(y)| / |x-y|, acting on functions of (x, y).
Collocation on Chebyshev-Lobatto nodes turns both into matrices whose
dominant eigenvalue converges spectrally fast; the node set contains the
pair (0, 1), which is where the quasi-inverse of the secant operator
evaluates the fundamental-interval Dirichlet series.

The continued-fraction system has infinitely many branches; branches
beyond a direct cutoff enter through Taylor/Hurwitz-zeta tail rows, so the
truncation error is pushed far below the collocation error.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np

from .errors import NotEntropic, QuasiInversePole
from .sources import DirichletValue

_POLE_TOL = 1e-8


# -- Chebyshev-Lobatto machinery ---------------------------------------


def lobatto_nodes(N: int) -> np.ndarray:
    """N+1 Chebyshev-Lobatto points on [0,1], increasing, endpoints exact."""
    i = np.arange(N + 1)
    return 0.5 * (1.0 - np.cos(np.pi * i / N))


def _bary_weights(N: int) -> np.ndarray:
    w = np.ones(N + 1)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def interp_rows(nodes: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cardinal-function rows: out[p, j] = ell_j(y[p])."""
    w = _bary_weights(len(nodes) - 1)
    y = np.asarray(y, dtype=float)
    diff = y[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-15)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w[None, :] / diff
        rows = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if np.any(hit):
        rows[hit] = 0.0
        rows[hit, np.argmax(exact[hit], axis=1)] = 1.0
    return rows


def diff_matrix(nodes: np.ndarray) -> np.ndarray:
    """Barycentric spectral differentiation matrix on the nodes."""
    n = len(nodes)
    w = _bary_weights(n - 1)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = (w[j] / w[i]) / (nodes[i] - nodes[j])
        D[i, i] = -np.sum(D[i, :])
    return D


def _hurwitz(sval, a: np.ndarray):
    """zeta_H(sval, a) for an array a; scipy for real s, mpmath otherwise."""
    if isinstance(sval, complex) and abs(sval.imag) > 0:
        return np.array([complex(mp.zeta(mp.mpc(sval), mp.mpf(float(x)))) for x in a])
    from scipy.special import zeta as hz
    return hz(float(np.real(sval)), np.asarray(a, dtype=float))


# -- pointwise (tangent) operator --------------------------------------


def tangent_matrix(system, s, N: int = 24, direct: int = 64, taylor: int = 10) -> np.ndarray:
    """Collocated L_s for the system; complex s allowed."""
    x = lobatto_nodes(N)
    cplx = isinstance(s, complex)
    M = np.zeros((N + 1, N + 1), dtype=complex if cplx else float)
    if system.infinite:
        for m in range(1, direct + 1):
            br = system.branch(m)
            hx = 1.0 / (m + x)
            wgt = (m + x) ** (-2 * s) if cplx else (m + x) ** (-2 * float(s))
            M += wgt[:, None] * interp_rows(x, hx)
        D = diff_matrix(x)
        row = np.zeros(N + 1)
        row[0] = 1.0
        Dj = np.eye(N + 1)
        fact = 1.0
        for j in range(taylor + 1):
            if j > 0:
                Dj = Dj @ D
                fact *= j
            zrow = _hurwitz(2 * s + j, direct + 1 + x)
            M += zrow[:, None] * (row @ Dj)[None, :] / fact
        return M
    for br in system.branches:
        hx = np.array([float(br(t)) for t in x])
        dv = np.array([float(br.deriv_abs(t)) for t in x])
        wgt = np.exp(s * np.log(dv)) if cplx else dv ** float(s)
        M += wgt[:, None] * interp_rows(x, hx)
    return M


def dominant_eigenvalue(Mat: np.ndarray) -> complex:
    vals = np.linalg.eigvals(Mat)
    return vals[int(np.argmax(np.abs(vals)))]


def spectral_radius_profile(system, s, N: int = 24) -> dict:
    """Dominant eigenvalue at N and at a finer grid, with the gap between
    the two as the honest error estimate."""
    lam1 = dominant_eigenvalue(tangent_matrix(system, s, N=N))
    lam2 = dominant_eigenvalue(tangent_matrix(system, s, N=N + 8))
    return {"value": lam2, "error": abs(lam2 - lam1), "N": N + 8}


def entropy_via_operator(system, N: int = 24) -> float:
    """-d/ds of the dominant eigenvalue at s = 1, by central differences
    with Richardson control; two step sizes must agree or the estimate is
    refused."""
    def lam(sv: float) -> float:
        return float(np.real(dominant_eigenvalue(tangent_matrix(system, sv, N=N))))

    def fd(h: float) -> float:
        return (lam(1.0 + h) - lam(1.0 - h)) / (2 * h)

    h = 1e-4
    d1, d2 = fd(h), fd(h / 2)
    rich = (4 * d2 - d1) / 3
    if abs(d2 - d1) > 1e-3 * max(1.0, abs(rich)):
        raise NotEntropic(f"eigenvalue slope unstable: {d1} vs {d2}")
    return -rich


# -- two-variable (secant) operator ------------------------------------


def _secant_factor(system, s, N: int, m_index) -> np.ndarray:
    """B_h with B kron B the branch block of the secant operator."""
    x = lobatto_nodes(N)
    br = system.branch(m_index)
    a, b, c, d = br.a, br.b, br.c, br.d
    det = abs(a * d - b * c)
    hx = np.array([float(br(t)) for t in x])
    g = det ** (s / 2) * np.abs(c * x + d) ** (-s)
    return g[:, None] * interp_rows(x, hx)


def secant_matrix(system, s, N: int = 16, direct: int = 64,
                  taylor: int = 8, qorder: int = 10) -> np.ndarray:
    """Collocated secant operator on the tensor node grid.

    Each branch contributes kron(B, B) thanks to the Moebius identity
    |h(x)-h(y)|/|x-y| = |det h| / (|cx+d| |cy+d|).  The infinite family's
    tail is a bivariate Taylor block: expand the interpolant at (0, 0) and
    sum the branch weights into Hurwitz zetas, shifting the second variable
    onto the first with a binomial series.
    """
    x = lobatto_nodes(N)
    n1 = N + 1
    cplx = isinstance(s, complex)
    K = np.zeros((n1 * n1, n1 * n1), dtype=complex if cplx else float)
    nb = direct if system.infinite else len(system.branches)
    idx = range(1, direct + 1) if system.infinite else range(nb)
    for m in idx:
        B = _secant_factor(system, s, N, m)
        K += np.kron(B, B)
    if not system.infinite:
        return K

    D = diff_matrix(x)
    e0 = np.zeros(n1)
    e0[0] = 1.0
    R = []  # R[a] = e0^T D^a / a!
    cur = e0.copy()
    fact = 1.0
    for a2 in range(taylor + 1):
        if a2 > 0:
            cur = cur @ D
            fact *= a2
        R.append(cur / fact)
    # zeta table: zt[r][i] = zeta_H(2s + r, direct + 1 + x_i)
    zt = [ _hurwitz(2 * s + r, direct + 1 + x) for r in range(2 * taylor + qorder + 1) ]
    dx = x[None, :] - x[:, None]   # x_{i'} - x_i
    T4 = np.zeros((n1, n1, n1, n1), dtype=complex if cplx else float)
    for a2 in range(taylor + 1):
        for b2 in range(taylor + 1):
            W = np.zeros((n1, n1), dtype=complex if cplx else float)
            binom = 1.0
            for q in range(qorder + 1):
                if q > 0:
                    binom *= (-(s + b2) - (q - 1)) / q
                W += binom * dx ** q * zt[a2 + b2 + q][:, None]
            T4 += np.einsum("ik,j,l->ijkl", W, R[a2], R[b2])
    # T4[i, i', j, j'] indexed as rows (i,i'), cols (j,j')
    K += T4.transpose(0, 2, 1, 3).reshape(n1 * n1, n1 * n1)
    return K


def lambda_via_operator(system, s, N: int = 16, **kw) -> DirichletValue:
    """Fundamental-interval Dirichlet series through the secant operator:
    the quasi-inverse applied to the unit function, read at the node pair
    (0, 1).  Raises QuasiInversePole on the series' poles."""
    K = secant_matrix(system, s, N=N, **kw)
    lam = dominant_eigenvalue(K)
    if abs(lam - 1.0) < _POLE_TOL:
        raise QuasiInversePole(f"secant operator has eigenvalue 1 at s={s}")
    n1 = int(round(math.sqrt(K.shape[0])))
    rhs = np.ones(K.shape[0], dtype=K.dtype)
    v = np.linalg.solve(np.eye(K.shape[0], dtype=K.dtype) - K, rhs)
    # node 0 is x=0 and node N is x=1 on the Lobatto grid
    val = v[0 * n1 + (n1 - 1)]
    K2 = secant_matrix(system, s, N=N + 4, **kw)
    lam2 = dominant_eigenvalue(K2)
    if abs(lam2 - 1.0) < _POLE_TOL:
        raise QuasiInversePole(f"secant operator has eigenvalue 1 at s={s}")
    rhs2 = np.ones(K2.shape[0], dtype=K2.dtype)
    v2 = np.linalg.solve(np.eye(K2.shape[0], dtype=K2.dtype) - K2, rhs2)
    n2 = n1 + 4
    val2 = v2[0 * n2 + (n2 - 1)]
    err = abs(val2 - val)
    if isinstance(s, complex):
        return DirichletValue(complex(val2), float(err))
    return DirichletValue(float(np.real(val2)), float(err))


def resolvent_norm_probe(system, t: float, N: int = 24, probes: int = 4,
                         seed: int = 20260816) -> float:
    """Lower bound on the resolvent norm of L_s at s = 1 + it in the
    t-weighted C^1 norm  sup|u| + (1/|t|) sup|u'|.

    Probes are random trigonometric polynomials with unit t-norm; the
    maximum response over them is reported.  Deterministic by default so
    classification runs are reproducible."""
    if t == 0:
        raise ValueError("probe needs t != 0")
    x = lobatto_nodes(N)
    D = diff_matrix(x)
    M = tangent_matrix(system, complex(1.0, float(t)), N=N)
    A = np.eye(N + 1, dtype=complex) - M
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(probes):
        coef = rng.normal(size=6)
        f = sum(c * np.cos(np.pi * k * x) for k, c in enumerate(coef))
        fn = np.max(np.abs(f)) + np.max(np.abs(D @ f)) / abs(t)
        u = np.linalg.solve(A, f.astype(complex))
        un = np.max(np.abs(u)) + np.max(np.abs(D @ u)) / abs(t)
        best = max(best, un / fn)
    return float(best)


def discretize(system, s, N: int = 24, which: str = "tangent", **kw) -> np.ndarray:
    """Collocation matrix of the requested transfer-operator flavor at s.

    "tangent" acts on functions of one variable; "secant" acts on the
    divided-difference plane and is the one whose quasi-inverse carries
    the Dirichlet series of fundamental intervals.
    """
    if which == "tangent":
        return tangent_matrix(system, s, N=N, **kw)
    if which == "secant":
        return secant_matrix(system, s, N=N, **kw)
    raise ValueError(f"unknown operator flavor {which!r}")
