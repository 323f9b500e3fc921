"""Exact and asymptotic expected costs for word batches.

Three cost functionals of a batch of n independent words: trie size R, trie
path length C, and pivot-comparison symbol cost B.  Each expectation admits
several independent evaluation routes:

* an alternating binomial sum over the source's Dirichlet series at integer
  arguments, in big-float arithmetic (the binomials reach 2^n, so float64
  collapses long before n = 256);
* a direct sum over prefix classes, memoryless sources only, written in
  expm1/log1p form so the per-depth error stays near n*eps;
* a contour integral of the series against the Beta kernel on a shifted
  vertical line, with a certified truncation bound.

Having independent routes is the point: they cross-check each other, and the
asymptotic templates are fitted against whichever exact ladder is cheapest.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath as mp
import numpy as np
from scipy.special import gammaln, loggamma

from .errors import KernelUnderflow, UnsupportedSource
from .simple import Markov, Memoryless
from .trees import batch_costs

KINDS = ("R", "C", "B")


def _check_kind(kind: str):
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def varpi_factor(kind: str, s):
    """Prefactor turning the cumulated series into the cost transform.

    R pairs with (s-1), C with s, B with 2/(s(s-1)).  Works on floats,
    complex values, mpmath numbers and numpy arrays alike.
    """
    _check_kind(kind)
    if kind == "R":
        return s - 1
    if kind == "C":
        return s
    return 2 / (s * (s - 1))


# -- alternating binomial sums ----------------------------------------------


def _series_evaluator(source) -> Callable[[int], "mp.mpf"]:
    """Dirichlet series k -> Lambda(k) as mpf at the ambient working precision."""
    if isinstance(source, Memoryless):
        ps = [mp.mpf(float(p)) for p in source.probs]

        def ev(k: int):
            lam = mp.fsum(p ** k for p in ps)
            return 1 / (1 - lam)

        return ev
    if isinstance(source, Markov):
        m = len(source.initial)
        cols = [[mp.mpf(float(source.colP[i, j])) for j in range(m)] for i in range(m)]
        init = [mp.mpf(float(v)) for v in source.initial]

        def ev(k: int):
            P = mp.matrix(m, m)
            for i in range(m):
                for j in range(m):
                    P[i, j] = -(cols[i][j] ** k)
                P[i, i] += 1
            rhs = mp.matrix([v ** k for v in init])
            x = mp.lu_solve(P, rhs)
            return 1 + mp.fsum(x)

        return ev
    raise UnsupportedSource(
        "alternating sums need the series at integer arguments in big-float "
        "precision; closed forms exist for memoryless and Markov sources only"
    )


def _alternating_core(source, kind: str, n: int, prec: int) -> tuple[float, float]:
    """Value and a certified absolute error bound for the alternating sum.

    Terms reach magnitude ~2^n; the bound charges every term with a fixed
    budget of rounding steps at the working precision, anchored at the
    largest term exponent seen.  It is loose by design but still shrinks
    by 2^-64 for every 64 extra bits, which is what makes the
    precision-bump stability check meaningful.
    """
    with mp.workprec(prec):
        series = _series_evaluator(source)
        total = mp.mpf(0)
        binom = n * (n - 1) // 2  # C(n, 2), updated exactly over k
        max_mag = -mp.inf
        for k in range(2, n + 1):
            lam = series(k)
            if kind == "R":
                w = (k - 1) * lam
            elif kind == "C":
                w = k * lam
            else:
                w = 2 * lam / (k * (k - 1))
            term = mp.mpf(binom) * w
            mag = mp.mag(term)
            if mag > max_mag:
                max_mag = mag
            total += term if k % 2 == 0 else -term
            binom = binom * (n - k) // (k + 1)
        dim = len(getattr(source, "initial", ())) or len(getattr(source, "probs", ()))
        ops = 16 * (dim * dim + 4)
        cert = math.ldexp(float((n - 1) * ops), int(max_mag) + 1 - prec)
        return float(total), cert


def alternating_mean(source, kind: str, n: int, precision_bits: int | None = None) -> float:
    """Exact mean cost via the alternating binomial sum.

    The terms are ~2^n large while the answer is polynomial in n, so the
    working precision defaults to ceil(1.1 n) + 64 bits.  Pass
    ``precision_bits`` to override (the result must be stable under a
    +64 bit bump, and the certified bound says by how little it may move).
    """
    _check_kind(kind)
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n < 2:
        return 0.0
    prec = int(precision_bits) if precision_bits else int(math.ceil(1.1 * n)) + 64
    return _alternating_core(source, kind, n, prec)[0]


# -- direct prefix-class sums (memoryless) -----------------------------------


def _direct_depth_cap(probs: np.ndarray, n_max: int) -> tuple[float, int]:
    """Truncation depth for prefix-class sums: deep enough that the
    discarded geometric tail sits below the working precision."""
    lam2 = float(np.sum(probs**2))
    cap = int((2.0 * math.log(n_max) + 64.0) / -math.log(lam2)) + 2
    return lam2, max(cap, 16)


def _composition_matrix(k: int, sigma: int) -> np.ndarray:
    """All count vectors over sigma symbols summing to k, one row each."""
    if sigma == 1:
        return np.array([[k]], dtype=np.int64)
    blocks = []
    for first in range(k + 1):
        rest = _composition_matrix(k - first, sigma - 1)
        blk = np.empty((rest.shape[0], sigma), dtype=np.int64)
        blk[:, 0] = first
        blk[:, 1:] = rest
        blocks.append(blk)
    return np.vstack(blocks)


def direct_means(
    source,
    ns: Sequence[int],
    kinds: Sequence[str] = KINDS,
    depth_cap: int | None = None,
    class_cap: int = 4_000_000,
) -> dict:
    """Exact means for a memoryless source by summing over prefix classes.

    Prefixes with the same symbol counts share their probability, so each
    depth contributes one term per count class weighted by a multinomial.
    All requested n are evaluated in one sweep; the harmonic-style inner sum
    for B is accumulated incrementally between ladder points.

    Every power of q = 1 - p is taken through expm1/log1p so the deep
    cancellation that kills the naive forms never happens; the absolute error
    per depth stays near n*eps.
    """
    if not isinstance(source, Memoryless):
        raise UnsupportedSource("direct prefix sums are closed-form for memoryless sources only")
    for k in kinds:
        _check_kind(k)
    ns = [int(v) for v in ns]
    if any(v < 0 for v in ns):
        raise ValueError("n must be nonnegative")
    order = np.argsort(ns, kind="stable")
    ladder = [ns[i] for i in order if ns[i] >= 2]

    probs = np.asarray(source.probs, dtype=float)
    sigma = len(probs)
    lnp = np.log(probs)
    out = {k: np.zeros(len(ns)) for k in kinds}
    if not ladder:
        return out

    n_max = max(ladder)
    lam2, auto_cap = _direct_depth_cap(probs, n_max)
    if depth_cap is None:
        depth_cap = auto_cap
    if depth_cap > 1000:
        raise UnsupportedSource(
            "nearly degenerate probabilities need >1000 prefix depths; "
            "use the alternating method instead"
        )
    total_classes = math.comb(depth_cap + sigma, sigma)
    if total_classes > class_cap:
        raise UnsupportedSource(
            f"{sigma}-symbol alphabet yields {total_classes} prefix classes "
            f"at depth {depth_cap}; use the alternating method instead"
        )

    want_b = "B" in kinds
    acc = {k: np.zeros(len(ladder)) for k in KINDS}
    for depth in range(depth_cap + 1):
        if depth == 0:
            p = np.array([1.0])
            mult = np.array([1.0])
        else:
            counts = _composition_matrix(depth, sigma)
            logmult = gammaln(depth + 1) - gammaln(counts + 1).sum(axis=1)
            mult = np.exp(logmult)
            p = np.exp(counts @ lnp)
        with np.errstate(divide="ignore"):
            lnq = np.log1p(-p)  # -inf at the root class, handled by the masks below

        A = np.zeros(len(p))
        prev = 0
        for idx, n in enumerate(ladder):
            if want_b:
                m = n - 1
                jj = np.arange(prev + 1, m + 1, dtype=float)
                for lo in range(0, len(jj), 2048):
                    blk = jj[lo : lo + 2048]
                    with np.errstate(invalid="ignore"):
                        T = -np.expm1(np.outer(blk, lnq))
                    T[~np.isfinite(T)] = 1.0
                    A += (T / blk[:, None]).sum(axis=0)
                prev = m
            with np.errstate(invalid="ignore"):
                one_qn1 = -np.expm1((n - 1) * lnq)
                one_qn = -np.expm1(n * lnq)
                qn1 = np.exp((n - 1) * lnq)
            one_qn1 = np.where(np.isfinite(one_qn1), one_qn1, 1.0)
            one_qn = np.where(np.isfinite(one_qn), one_qn, 1.0)
            qn1 = np.where(np.isfinite(qn1), qn1, 0.0)
            acc["R"][idx] += float((mult * (one_qn - n * p * qn1)).sum())
            acc["C"][idx] += float((mult * n * p * one_qn1).sum())
            if want_b:
                Bt = A + one_qn / n
                acc["B"][idx] += float((mult * 2 * (one_qn - 2 * n * p + n * p * A + Bt)).sum())

    lookup = {n: i for i, n in enumerate(ladder)}
    for k in kinds:
        for j, n in enumerate(ns):
            if n >= 2:
                out[k][j] = acc[k][lookup[n]]
    return out


# -- Beta-kernel contour integral ---------------------------------------------


@dataclass(frozen=True)
class RiceEstimate:
    """Contour evaluation of a mean cost.

    tail_bound is the rigorous bound on the truncated part of the line
    integral (zero for the pole-circling route); quad_err estimates the
    quadrature discretization error by comparing two rule orders.
    """

    value: float
    polynomial_part: float
    integral_part: float
    tail_bound: float
    cutoff: float
    evaluations: int
    quad_err: float = 0.0
    route: str = "line"

    @property
    def certified_abs_error(self) -> float:
        return self.tail_bound + self.quad_err


def _reduced_series(source, d: float):
    """Reduced series Lambda - 1 on the line Re(s) = d, plus a sup bound there.

    Entries of the closed forms obey |p^(d - it)| = p^d, so the value at the
    real point d dominates the modulus along the whole line.
    """
    if isinstance(source, Memoryless):
        lnp = np.log(np.asarray(source.probs, dtype=float))

        def tilde(u: np.ndarray) -> np.ndarray:
            lam = np.exp(np.multiply.outer(u, lnp)).sum(axis=-1)
            return lam / (1.0 - lam)

        lam_d = float(np.exp(d * lnp).sum())
        return tilde, lam_d / (1.0 - lam_d)
    if isinstance(source, Markov):
        colP = source.colP
        init = source.initial
        mask = colP > 0
        logP = np.where(mask, np.log(np.where(mask, colP, 1.0)), 0.0)
        logv = np.log(init)
        m = len(init)
        eye = np.eye(m)

        def tilde(u: np.ndarray) -> np.ndarray:
            P = np.where(mask, np.exp(np.multiply.outer(u, logP)), 0.0)
            R = np.exp(np.multiply.outer(u, logv))
            x = np.linalg.solve(eye - P, R[..., None])[..., 0]
            return x.sum(axis=-1)

        bound = float(np.real(tilde(np.array([d + 0j]))[0]))
        return tilde, bound
    raise UnsupportedSource(
        "contour evaluation needs the series in closed form on vertical "
        "lines; memoryless and Markov sources only"
    )


def _rice_polynomial(kind: str, n: int) -> float:
    """The part of the alternating sum coming from the constant term of Lambda.

    R gives exactly 1, C gives n; for B the value collapses to harmonic
    numbers: 2(n H_{n-1} + H_n - 2n + 1).
    """
    if kind == "R":
        return 1.0
    if kind == "C":
        return float(n)
    h = np.cumsum(1.0 / np.arange(1, n + 1))
    return 2.0 * (n * h[-2] + h[-1] - 2.0 * n + 1.0)


def _rice_tail(kind: str, n: int, d: float, T: float, series_bound: float) -> float:
    """Rigorous bound on the discarded |t| > T part of the line integral.

    Uses |B(s, n+1)| <= n!/|t|^(n+1) and |p^(d-it)| = p^d; the prefactor is
    bounded by t + d + 1 (R), t + d (C) or 2/t^2 (B).
    """
    lgn = gammaln(n + 1)
    lnT = math.log(T)
    if kind == "R":
        core = math.exp(lgn - (n - 1) * lnT - math.log(n - 1)) + (d + 1) * math.exp(
            lgn - n * lnT - math.log(n)
        )
    elif kind == "C":
        core = math.exp(lgn - (n - 1) * lnT - math.log(n - 1)) + d * math.exp(
            lgn - n * lnT - math.log(n)
        )
    else:
        core = 2.0 * math.exp(lgn - (n + 2) * lnT - math.log(n + 2))
    return series_bound * core / math.pi


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_GL8_NODES, _GL8_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _panel_grid(T: float, panel: float = 0.25, order8: bool = False):
    """Composite Gauss-Legendre nodes and weights covering [0, T]."""
    gn, gw = (_GL8_NODES, _GL8_WEIGHTS) if order8 else (_GL_NODES, _GL_WEIGHTS)
    edges = np.arange(0.0, T, panel)
    half = panel / 2.0
    nodes = (edges[:, None] + half) + half * gn[None, :]
    weights = np.broadcast_to(half * gw, nodes.shape)
    return nodes.ravel(), weights.ravel()


def _rice_line(source, kind: str, n: int, d: float, rtol: float,
               max_cutoff: float) -> RiceEstimate:
    tilde, series_bound = _reduced_series(source, d)
    poly = _rice_polynomial(kind, n)

    target = rtol * max(1.0, float(n))
    T = 16.0
    while _rice_tail(kind, n, d, T, series_bound) > target:
        T *= 2.0
        if T > max_cutoff:
            raise KernelUnderflow(
                f"tail bound cannot reach {target:.3g} below cutoff {max_cutoff} at n={n}; "
                "the kernel decays like t^-(n+1), so small n may be out of reach "
                "for R and C on the line (the pole-circling route covers them)"
            )
    tail = _rice_tail(kind, n, d, T, series_bound)

    def quad(order8: bool) -> tuple[float, int]:
        t, w = _panel_grid(T, order8=order8)
        s = -d + 1j * t
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            logk = gammaln(n + 1) + loggamma(s) - loggamma(s + n + 1)
            kern = np.exp(logk)
        kern[~np.isfinite(kern)] = 0.0
        u = d - 1j * t
        vals = varpi_factor(kind, u) * tilde(u)
        return float(w @ np.real(vals * kern)) / math.pi, len(t)

    integral, n12 = quad(False)
    check, n8 = quad(True)
    quad_err = abs(integral - check) + 1e-15 * abs(integral)
    return RiceEstimate(poly + integral, poly, integral, tail, T,
                        n12 + n8, quad_err, "line")


def _full_series_on(source):
    """Vectorized s -> Lambda(s) on complex arrays, closed forms only."""
    tilde, _ = _reduced_series(source, 1.5)

    def full(s: np.ndarray) -> np.ndarray:
        return 1.0 + tilde(s)

    return full


def _rice_circles(source, kind: str, n: int, points: int = 64,
                  radius: float = 0.25) -> RiceEstimate:
    """Sum of kernel-pole residues, each taken by a small circle quadrature.

    The alternating sum equals (-1)^n times the sum over k = 2..n of the
    residues of varpi(s) n! Gamma(s-n)/Gamma(s+1) at s = k.  On a circle
    of radius 1/4 the nearest other singularity is 3 radii away, so the
    trapezoid rule converges like 3^-points; the midpoint offset keeps
    the nodes off the real axis where loggamma jumps branches.
    """
    full = _full_series_on(source)
    theta = 2.0 * math.pi * (np.arange(points) + 0.5) / points
    ring = radius * np.exp(1j * theta)
    lgn = gammaln(n + 1)

    def residue_sum(nodes: np.ndarray) -> tuple[float, float]:
        tot = 0.0
        scale = 0.0
        for k in range(2, n + 1):
            s = k + nodes
            with np.errstate(under="ignore", over="ignore", invalid="ignore"):
                kern = np.exp(lgn + loggamma(s - n) - loggamma(s + 1))
            vals = varpi_factor(kind, s) * full(s) * kern * nodes
            v = float(np.mean(vals).real)
            tot += v
            scale += abs(v)
        return tot, scale

    tot, scale = residue_sum(ring)
    half = radius * np.exp(1j * 2.0 * math.pi * (np.arange(points // 2) + 0.5)
                           / (points // 2))
    tot_half, _ = residue_sum(half)
    sign = 1.0 if n % 2 == 0 else -1.0
    value = sign * tot
    err = abs(tot - tot_half) + 64.0 * np.finfo(float).eps * scale
    return RiceEstimate(value, 0.0, value, 0.0, radius,
                        (points + points // 2) * (n - 1), err, "circle")


def rice_mean(
    source,
    kind: str,
    n: int,
    d: float = 1.5,
    rtol: float = 1e-10,
    max_cutoff: float = 16384.0,
    route: str = "auto",
) -> RiceEstimate:
    """Mean cost via contour integration against the Beta kernel.

    Two routes.  The line route integrates the reduced series along
    Re(s) = -d with the constant term summed in closed form; its cutoff
    comes from a certified tail bound computed before any quadrature
    runs.  That bound decays like t^-(n+1), which is hopeless for small
    n, so the circle route instead rings each kernel pole k = 2..n
    directly; it is exact up to trapezoid error but adds ~2^n terms, so
    it is the small-n specialist.  "auto" picks circles for n <= 8.
    """
    _check_kind(kind)
    n = int(n)
    if n < 2:
        return RiceEstimate(0.0, 0.0, 0.0, 0.0, 0.0, 0)
    if not 1.0 < d < 2.0:
        raise ValueError("the line Re(s) = -d must satisfy 1 < d < 2")
    if route == "auto":
        route = "circle" if n <= 8 else "line"
    if route == "circle":
        return _rice_circles(source, kind, n)
    if route == "line":
        return _rice_line(source, kind, n, d, rtol, max_cutoff)
    raise ValueError(f"unknown route {route!r}")


# -- dispatcher ----------------------------------------------------------------


def exact_mean(source, kind: str, n: int, method: str = "auto", precision_bits: int | None = None) -> float:
    """Exact mean cost, routed to the cheapest applicable evaluator."""
    _check_kind(kind)
    n = int(n)
    if method == "auto":
        if isinstance(source, Memoryless):
            method = "direct" if n > 256 else "alternating"
        elif isinstance(source, Markov):
            method = "alternating"
        else:
            raise UnsupportedSource(
                "exact means need a closed-form series at integer arguments; "
                "memoryless and Markov sources only"
            )
    if method == "direct":
        return float(direct_means(source, [n], kinds=(kind,))[kind][0])
    if method == "alternating":
        return alternating_mean(source, kind, n, precision_bits=precision_bits)
    if method == "rice":
        return rice_mean(source, kind, n).value
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ExactMeanResult:
    """An exact mean together with how it was computed and how far it
    could possibly be off."""

    kind: str
    n: int
    value: float
    method: str
    certified_abs_error: float
    precision_bits: int | None = None


def exact_mean_alternating(source, kind: str, n: int,
                           precision_bits: int | None = None) -> ExactMeanResult:
    """Alternating binomial sum with a certified rounding bound."""
    _check_kind(kind)
    n = int(n)
    if n < 2:
        return ExactMeanResult(kind, n, 0.0, "alternating", 0.0, None)
    prec = int(precision_bits) if precision_bits else int(math.ceil(1.1 * n)) + 64
    value, cert = _alternating_core(source, kind, n, prec)
    return ExactMeanResult(kind, n, value, "alternating", cert, prec)


def exact_mean_direct(source, kind: str, n: int) -> ExactMeanResult:
    """Prefix-class sum with a certified truncation + roundoff bound.

    The depth truncation discards at most c(kind) * lam(2)^(K+1) / (1 - lam(2))
    where the prefactor bounds the per-prefix contribution by its quadratic
    Taylor majorant; the roundoff envelope is calibrated well above the
    observed expm1/log1p error of the evaluator.
    """
    _check_kind(kind)
    n = int(n)
    if n < 2:
        return ExactMeanResult(kind, n, 0.0, "direct", 0.0, None)
    value = float(direct_means(source, [n], kinds=(kind,))[kind][0])
    probs = np.asarray(source.probs, dtype=float)
    lam2, cap = _direct_depth_cap(probs, n)
    if kind == "R":
        coef = 0.5 * n * (n - 1)
    elif kind == "C":
        coef = float(n * (n - 1))
    else:
        coef = 8.0 * n * n * (1.0 + math.log(n))
    tail = coef * lam2 ** (cap + 1) / (1.0 - lam2)
    roundoff = 1e-13 * max(1.0, abs(value)) * (1.0 + math.log(n))
    return ExactMeanResult(kind, n, value, "direct", tail + roundoff, None)


def rice_integral(source, kind: str, n: int, d: float = 1.5,
                  rtol: float = 1e-10, t_max: float | None = None,
                  route: str = "auto") -> ExactMeanResult:
    """Contour-integral mean as a certified result.

    Passing t_max forces the line route with that cutoff cap, so a
    request the kernel decay cannot honor raises KernelUnderflow instead
    of returning an uncertified number.
    """
    if t_max is not None:
        est = rice_mean(source, kind, n, d=d, rtol=rtol,
                        max_cutoff=float(t_max), route="line")
    else:
        est = rice_mean(source, kind, n, d=d, rtol=rtol, route=route)
    return ExactMeanResult(kind, int(n), est.value, f"rice-{est.route}",
                           est.certified_abs_error, None)


def varpi(source, kind: str, s):
    """The cost transform at s: the kind prefactor times the full series.

    At s = 1 the R transform has a removable singularity with limit
    1/entropy; the other kinds genuinely blow up there.
    """
    _check_kind(kind)
    sc = complex(s)
    if kind == "R" and abs(sc - 1.0) < 1e-12:
        return 1.0 / source.entropy()
    val = source.lambda_series(s).value
    return varpi_factor(kind, s) * val


# -- asymptotic templates --------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticFit:
    """Template fit against an exact ladder.

    The leading coefficient is pinned to 1/entropy; only the lower-order
    coefficients are least-squares fitted.  ``residuals`` holds the relative
    template error at each ladder point.
    """

    kind: str
    entropy: float
    coefficients: dict
    ns: np.ndarray
    means: np.ndarray
    predictions: np.ndarray
    residuals: np.ndarray


def main_term(source, kind: str, n, coefficients: dict | None = None):
    """Asymptotic template value: n/h, n ln n/h + a n, or n ln^2 n/h + b n ln n + c n."""
    _check_kind(kind)
    h = source.entropy()
    c = coefficients or {}
    n = np.asarray(n, dtype=float)
    L = np.log(n)
    if kind == "R":
        return n / h
    if kind == "C":
        return n * L / h + c.get("a", 0.0) * n
    return n * L**2 / h + c.get("b", 0.0) * n * L + c.get("c", 0.0) * n


def asymptotic_fit(source, kind: str, ns: Sequence[int], means: Sequence[float] | None = None) -> AsymptoticFit:
    """Fit the sub-leading template coefficients on an exact ladder."""
    _check_kind(kind)
    ns_arr = np.asarray([int(v) for v in ns])
    if np.any(ns_arr < 2):
        raise ValueError("ladder entries must be >= 2")
    if means is None:
        if isinstance(source, Memoryless):
            means_arr = direct_means(source, ns_arr, kinds=(kind,))[kind]
        else:
            means_arr = np.array([exact_mean(source, kind, int(v)) for v in ns_arr])
    else:
        means_arr = np.asarray(means, dtype=float)
    h = source.entropy()
    nf = ns_arr.astype(float)
    L = np.log(nf)
    if kind == "R":
        coeffs = {}
    elif kind == "C":
        resid = means_arr - nf * L / h
        a = float(np.dot(resid, nf) / np.dot(nf, nf))
        coeffs = {"a": a}
    else:
        resid = means_arr - nf * L**2 / h
        X = np.column_stack([nf * L, nf])
        sol, *_ = np.linalg.lstsq(X, resid, rcond=None)
        coeffs = {"b": float(sol[0]), "c": float(sol[1])}
    pred = main_term(source, kind, ns_arr, coeffs)
    rel = (means_arr - pred) / pred
    return AsymptoticFit(kind, h, coeffs, ns_arr, means_arr, pred, rel)


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Template prediction at one n, with its growth-regime tag and, for
    periodic sources, the pole lattice driving the oscillation."""

    kind: str
    n: float
    value: float
    entropy: float
    coefficients: dict
    regime: str
    fluctuation: dict | None = None
    fit: AsymptoticFit | None = None


def _default_ladder(source) -> list[int]:
    top = 12 if isinstance(source, Memoryless) else 9
    return [2 ** e for e in range(4, top + 1)]


def asymptotic_main_term(source, kind: str, n, ladder: Sequence[int] | None = None,
                         means: Sequence[float] | None = None,
                         pairs: int = 5) -> AsymptoticPrediction:
    """Asymptotic mean prediction at n with everything that shaped it.

    The sub-leading template coefficients are fitted on an exact ladder
    (R needs none).  The regime tag comes from the tameness classifier;
    when the verdict is periodic and the pole lattice has a closed form,
    the conjugate oscillation terms are summed into the value and their
    locations and amplitudes are reported.
    """
    _check_kind(kind)
    fit = None
    coeffs: dict = {}
    if kind != "R":
        fit = asymptotic_fit(source, kind, ladder or _default_ladder(source),
                             means=means)
        coeffs = fit.coefficients
    base = float(main_term(source, kind, n, coeffs))

    from .errors import TamelabError
    try:
        from .tameness import classify, theorem2_regime
        regime = theorem2_regime(classify(source))
    except TamelabError:
        regime = "unknown"

    flux = None
    value = base
    if regime == "periodic" and pairs > 0:
        try:
            gen, lam_prime = _pole_lattice(source)
        except UnsupportedSource:
            gen = None
        if gen is not None:
            tau = 2.0 * math.pi / gen
            poles = []
            amps = []
            for k in range(1, pairs + 1):
                sk = complex(1.0, tau * k)
                amps.append(complex(varpi_factor(kind, sk)) * (-1.0 / lam_prime(sk)))
                poles.append(sk)
            correction = float(periodic_fluctuation(source, kind, n, pairs=pairs))
            value = base + correction
            flux = {"generator": gen, "tau": tau, "poles": poles,
                    "amplitudes": amps, "correction": correction}
    return AsymptoticPrediction(kind, float(n), value, source.entropy(),
                                coeffs, regime, flux, fit)


# -- periodic fluctuation ----------------------------------------------------------


def _pole_lattice(source):
    """Generator of the vertical pole lattice and the series derivative there."""
    if isinstance(source, Memoryless):
        per = source.periodicity()
        if not per.periodic:
            raise UnsupportedSource("fluctuation terms exist for periodic sources only")
        return per.generator, source.lam_prime
    kind = getattr(source, "kind", None)
    if kind == "rary":
        r = source.r
        lnr = math.log(r)

        def lam_prime(s):
            return -lnr * r ** (1 - s)

        return lnr, lam_prime
    raise UnsupportedSource("fluctuation terms implemented for periodic memoryless and r-ary sources")


def periodic_fluctuation(source, kind: str, n, pairs: int = 5) -> np.ndarray:
    """Oscillatory correction from the complex poles nearest the real axis.

    For a periodic source the series has simple poles at 1 + 2*pi*i*k/g; each
    conjugate pair contributes a residue against the Beta kernel.  ``pairs``
    counts how many are summed.  Returns the additive correction to the mean
    (same shape as n).
    """
    _check_kind(kind)
    gen, lam_prime = _pole_lattice(source)
    tau = 2.0 * math.pi / gen
    ns = np.atleast_1d(np.asarray(n, dtype=float))
    out = np.zeros(len(ns))
    for j, nv in enumerate(ns):
        lgn = float(gammaln(nv + 1))
        acc = 0.0
        for k in range(1, pairs + 1):
            sk = complex(1.0, tau * k)
            res_lambda = -1.0 / lam_prime(sk)
            fct = varpi_factor(kind, sk)
            kern = cmath.exp(lgn + complex(loggamma(-sk)) - complex(loggamma(nv + 1 - sk)))
            acc += 2.0 * (fct * res_lambda * kern).real
        out[j] = acc
    if np.isscalar(n) or np.asarray(n).ndim == 0:
        return out[0]
    return out


# -- Monte Carlo ---------------------------------------------------------------------


def simulate_costs(source, n: int, trials: int, seed: int = 0, kinds: Sequence[str] = KINDS) -> dict:
    """Cost samples over independent word batches, one batch per trial.

    Trial t draws from the t-th spawned child of the seed, so any prefix of
    the trial range is reproducible regardless of the total count.
    """
    for k in kinds:
        _check_kind(k)
    trials = int(trials)
    out = {k: np.empty(trials) for k in kinds}
    for t in range(trials):
        batch = source.emit(n, seed=seed, trial=t)
        r, c, b = batch_costs(batch)
        vals = {"R": r, "C": c, "B": b}
        for k in kinds:
            out[k][t] = vals[k]
    return out


def summarize_samples(samples: dict) -> dict:
    """Mean and standard error per cost kind."""
    out = {}
    for k, arr in samples.items():
        m = float(np.mean(arr))
        se = float(np.std(arr, ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        out[k] = {"mean": m, "se": se}
    return out


@dataclass(frozen=True)
class MonteCarloEstimate:
    kind: str
    n: int
    trials: int
    mean: float
    std: float
    se: float
    seed: int


def monte_carlo(source, n: int, trials: int, seed: int = 0,
                kinds: Sequence[str] = KINDS) -> dict:
    """Simulated mean costs with their standard errors, one estimate per kind."""
    samples = simulate_costs(source, n, trials, seed=seed, kinds=kinds)
    out = {}
    for k in kinds:
        arr = samples[k]
        std = float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0
        se = std / math.sqrt(len(arr)) if len(arr) > 1 else 0.0
        out[k] = MonteCarloEstimate(k, int(n), int(trials), float(np.mean(arr)),
                                    std, se, int(seed))
    return out
