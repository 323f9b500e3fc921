"""Dynamical sources: words from iterating an expanding interval map.

A source here is a complete system of injective contracting branches
h_m: [0,1] -> [0,1] with pairwise disjoint images tiling [0,1].  The shift
T inverts whichever branch's image the point sits in; the emitted symbol
at each step is that branch index.  The probability of a word w is the
length of its fundamental interval h_w([0,1]) under the uniform initial
density.

Branches are Moebius maps (ax+b)/(cx+d) with integer coefficients, so the
whole orbit calculus is exact: the composed inverse map after t steps is a
2x2 integer matrix, and the emitted point x is a dyadic rational refined
on demand from a per-word bit stream.  A symbol is committed only when the
entire dyadic uncertainty interval of x lands inside one branch image, so
emission is exact, reproducible, and prefix-stable by construction.

Builtins: r-ary expansions (digits), the continued-fraction map (infinite
branch family 1/(m+x)), and user-supplied finite Moebius systems.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (NoFixedPoint, PrecisionExhausted, TruncationBudget,
                     UnsupportedSource)
from .sources import DirichletValue, Source

_ZERO = Fraction(0)
_ONE = Fraction(1)


class MoebiusBranch:
    """h(x) = (a x + b) / (c x + d), integer coefficients, det != 0."""

    __slots__ = ("a", "b", "c", "d", "det")

    def __init__(self, a: int, b: int, c: int, d: int):
        det = a * d - b * c
        if det == 0:
            raise ValueError("degenerate branch")
        self.a, self.b, self.c, self.d = int(a), int(b), int(c), int(d)
        self.det = det

    def __call__(self, x):
        return (self.a * x + self.b) / (self.c * x + self.d)

    def deriv_abs(self, x):
        return abs(self.det) / (self.c * x + self.d) ** 2

    def interval(self) -> tuple[Fraction, Fraction]:
        """Closed image of [0,1], endpoints sorted."""
        y0 = Fraction(self.b, self.d)
        y1 = Fraction(self.a + self.b, self.c + self.d)
        return (y0, y1) if y0 <= y1 else (y1, y0)

    def width(self) -> Fraction:
        lo, hi = self.interval()
        return hi - lo

    def sup_deriv_abs(self) -> Fraction:
        """sup over [0,1] of |h'|; |h'| is monotone so an endpoint wins."""
        c, d = self.c, self.d
        lo = min(abs(d), abs(c + d))
        return Fraction(abs(self.det), lo * lo)

    def inverse_matrix(self) -> tuple[int, int, int, int]:
        return (self.d, -self.b, -self.c, self.a)

    def matrix(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def fixed_point(self) -> float:
        """The fixed point of h inside [0,1] (branches here have one)."""
        a, b, c, d = self.a, self.b, self.c, self.d
        if c == 0:
            if d == a:
                raise ValueError("translation branch has no fixed point")
            x = b / (d - a)
        else:
            disc = (a - d) ** 2 + 4 * b * c
            if disc < 0:
                raise ValueError("no real fixed point")
            r = math.sqrt(disc)
            roots = [((a - d) + r) / (2 * c), ((a - d) - r) / (2 * c)]
            inside = [x for x in roots if -1e-12 <= x <= 1 + 1e-12]
            if not inside:
                raise ValueError("fixed point escapes [0,1]")
            x = min(inside, key=lambda t: abs(t - 0.5))
        return min(max(x, 0.0), 1.0)

    def __repr__(self):
        return f"MoebiusBranch({self.a},{self.b},{self.c},{self.d})"


def _matmul(m1, m2):
    a1, b1, c1, d1 = m1
    a2, b2, c2, d2 = m2
    return (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
            c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)


def _moebius_frac(m, num: int, den: int) -> Fraction:
    """Apply the matrix to num/den exactly."""
    a, b, c, d = m
    return Fraction(a * num + b * den, c * num + d * den)


class DynamicalSource(Source):
    """Complete expanding Moebius system over [0,1], uniform initial density.

    kind is "rary", "gauss", or "moebius".  Finite systems carry their
    branch list; the continued-fraction system generates branch m on
    demand as x -> 1/(m+x) for m >= 1.
    """

    name = "dynamical"

    def __init__(self, kind: str, branches=None, r: int | None = None):
        self.kind = kind
        self.r = r
        if kind == "gauss":
            self.infinite = True
            self.branches = None
        else:
            if not branches:
                raise ValueError("finite system needs branches")
            self.infinite = False
            self.branches = list(branches)
            self._validate_tiling()
        self._interval_cache: list[tuple[Fraction, Fraction]] | None = None

    # -- structure -----------------------------------------------------

    def branch(self, m: int) -> MoebiusBranch:
        if self.infinite:
            if m < 1:
                raise IndexError(m)
            return MoebiusBranch(0, 1, 1, m)
        return self.branches[m]

    def branch_count(self) -> int | None:
        return None if self.infinite else len(self.branches)

    def _validate_tiling(self):
        ivs = sorted((br.interval(), i) for i, br in enumerate(self.branches))
        if ivs[0][0][0] != _ZERO or ivs[-1][0][1] != _ONE:
            raise ValueError("branch images must tile [0,1]")
        for (iv1, _), (iv2, _) in zip(ivs, ivs[1:]):
            if iv1[1] != iv2[0]:
                raise ValueError("branch images must tile [0,1] without gaps")
        for br in self.branches:
            if br.sup_deriv_abs() >= 1:
                raise ValueError("branches must be strict contractions")
        # keep lookup table in interval order
        self._sorted = [(iv[0], iv[1], idx) for iv, idx in ivs]

    def _locate(self, lo: Fraction, hi: Fraction) -> int | None:
        """Branch whose closed image contains [lo, hi], else None."""
        if self.infinite:
            # images are [1/(m+1), 1/m]
            if lo <= 0:
                return None
            m = int(1 / hi) if hi != 0 else None
            if m is None or m < 1:
                return None
            # candidate intervals around the reciprocal
            for mm in (m, m + 1):
                if mm >= 1 and Fraction(1, mm + 1) <= lo and hi <= Fraction(1, mm):
                    return mm
            return None
        los = [t[0] for t in self._sorted]
        i = bisect_right(los, lo) - 1
        if i < 0:
            return None
        a, b, idx = self._sorted[i]
        if a <= lo and hi <= b:
            return idx
        return None

    def fundamental_interval(self, word) -> tuple[Fraction, Fraction]:
        """Exact closed interval h_w([0,1]) for the word."""
        m = (1, 0, 0, 1)
        for sym in word:
            m = _matmul(m, self.branch(sym).matrix())
        y0 = _moebius_frac(m, 0, 1)
        y1 = _moebius_frac(m, 1, 1)
        return (y0, y1) if y0 <= y1 else (y1, y0)

    def p_word(self, word) -> Fraction:
        lo, hi = self.fundamental_interval(word)
        return hi - lo

    # -- emission ------------------------------------------------------

    def emit(self, n: int, seed, *, trial: int | None = None):
        from .words import WordBatch
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        if trial is not None:
            ss = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (int(trial),))
        word_seeds = ss.spawn(n)
        states = [_OrbitState(self, np.random.Generator(np.random.PCG64(s)))
                  for s in word_seeds]

        def extend(rows: int):
            out = np.empty((rows, n), dtype=np.int64)
            for j, st in enumerate(states):
                out[:, j] = st.take(rows)
            return out

        return WordBatch(n, extend)

    def _emitter(self, n, rng):  # pragma: no cover - emit() is overridden
        raise NotImplementedError

    # -- Dirichlet data --------------------------------------------------

    def lambda_k(self, s, k: int, rtol: float = 1e-10):
        """Depth-k power sum over fundamental intervals, certified to rtol.

        r-ary digits are closed form; the continued-fraction family is
        summed level by level with its last level collapsed into Hurwitz
        zetas; general finite systems enumerate cylinders with mass-based
        pruning.  Discarded subtree mass is charged to the error bound.
        """
        val, bound = self._depth_sum(s, k, rtol)
        if bound > rtol * 10 + abs(val) * rtol * 10:
            raise TruncationBudget(f"depth-{k} sum certified only to {bound}")
        if isinstance(s, complex):
            return val
        return float(np.real(val))

    def _depth_sum(self, s, k: int, eps: float):
        cplx = isinstance(s, complex)
        sr = s.real if cplx else float(s)
        if k == 0:
            return (1.0 + 0j) if cplx else 1.0, 0.0
        if self.kind == "rary":
            lam1 = self.r ** (1 - s) if cplx else self.r ** (1 - sr)
            return lam1 ** k, 0.0
        if self.kind == "gauss":
            if cplx:
                raise UnsupportedSource(
                    "continued-fraction depth sums are real-s only")
            return _gauss_depth_sum(sr, k, eps)
        return self._finite_depth_sum(s, k, eps)

    def _finite_depth_sum(self, s, k: int, eps: float):
        cplx = isinstance(s, complex)
        sr = s.real if cplx else float(s)
        if sr <= 1:
            raise ValueError("need Re(s) > 1 for pruned cylinder sums")
        mats = [br.matrix() for br in self.branches]
        # composed-map coefficient arrays, one entry per live cylinder
        A = np.array([1.0]); B = np.array([0.0])
        C = np.array([0.0]); D = np.array([1.0])
        DET = np.array([1.0])
        err = 0.0
        cut = eps / (2 * k)
        for lev in range(k):
            As, Bs, Cs, Ds, DETs = [], [], [], [], []
            for (a, b, c, d) in mats:
                As.append(A * a + B * c)
                Bs.append(A * b + B * d)
                Cs.append(C * a + D * c)
                Ds.append(C * b + D * d)
                DETs.append(DET * abs(a * d - b * c))
            A = np.concatenate(As); B = np.concatenate(Bs)
            C = np.concatenate(Cs); D = np.concatenate(Ds)
            DET = np.concatenate(DETs)
            w = DET / np.abs(D * (C + D))
            ws = w ** sr
            if lev < k - 1:
                # a dropped cylinder's whole depth-k mass is at most w^s
                keep = ws >= cut / max(len(ws), 1)
                err += float(ws[~keep].sum())
                A, B, C, D, DET = A[keep], B[keep], C[keep], D[keep], DET[keep]
                if len(A) == 0:
                    return (0.0 + 0j if cplx else 0.0), err
                if len(A) > 3_000_000:
                    raise TruncationBudget("cylinder population cap hit")
        if cplx:
            val = np.exp(s * np.log(w)).sum()
            return complex(val), err
        return float(ws.sum()), err

    def lambda_series(self, s, rtol: float = 1e-9, kmax: int = 80) -> DirichletValue:
        """Sum over all finite words of the fundamental probability to the
        s-th power, with a certified error bound.

        r-ary digits are closed form.  The continued-fraction system walks
        its cylinder tree once, stopping subtrees against an elementary
        bound on the remaining mass.  Other finite systems sum depth by
        depth; their decay ratio bounds the remainder geometrically.
        """
        sr = s.real if isinstance(s, complex) else float(s)
        if sr <= 1:
            raise ValueError("depth sums require Re(s) > 1")
        if self.kind == "rary":
            lam1 = self.r ** (1 - s) if isinstance(s, complex) else self.r ** (1 - sr)
            return DirichletValue(1.0 / (1.0 - lam1), 0.0)
        if self.kind == "gauss":
            if isinstance(s, complex):
                raise UnsupportedSource(
                    "continued-fraction series is real-s only; use the operator route")
            val, bound = _gauss_lambda_tree(sr, rtol)
            if bound > rtol * abs(val) * 1.05 + 1e-15:
                raise TruncationBudget(
                    f"cylinder tree certifies only {bound:.2e} at s={s}; "
                    f"the coprime-pair evaluator has no such barrier")
            return DirichletValue(val, bound)
        total = 1.0 + 0j if isinstance(s, complex) else 1.0
        trunc = 0.0
        prev_abs = 1.0
        ratios: list[float] = []
        for k in range(1, kmax + 1):
            val, err = self._depth_sum(s, k, rtol * 0.1)
            total += val
            trunc += err
            cur = abs(val)
            ratios.append(cur / prev_abs if prev_abs > 0 else 1.0)
            prev_abs = cur
            if k >= 4:
                rho = max(ratios[-3:]) * 1.05
                if rho < 0.95:
                    tail = cur * rho / (1 - rho)
                    if tail <= rtol * abs(total):
                        return DirichletValue(
                            total if isinstance(s, complex) else float(total),
                            tail + trunc)
        raise TruncationBudget(
            f"depth sums did not certify a geometric tail by depth {kmax}")

    def entropy(self) -> float:
        if self.kind == "rary":
            return math.log(self.r)
        if self.kind == "gauss":
            return math.pi ** 2 / (6 * math.log(2))
        from .operator import entropy_via_operator
        return entropy_via_operator(self)

    # -- regularity diagnostics ------------------------------------------

    def contraction_profile(self, depth: int = 2) -> dict:
        """Largest |h_w'| over cylinders of depths 1..depth, exactly.

        The continued-fraction family is infinite, but sup|h_w'| is
        bounded by the product of the branchwise sups 1/m^2, so only a
        finite head needs exact evaluation.
        """
        out = {}
        for t in range(1, depth + 1):
            best = Fraction(0)
            if self.infinite:
                cap = 6

                def rec(mat, d, bound):
                    nonlocal best
                    if d == t:
                        br_sup = _composed_sup(mat)
                        if br_sup > best:
                            best = br_sup
                        return
                    for m in range(1, cap + 1):
                        rec(_matmul(mat, self.branch(m).matrix()), d + 1,
                            bound * Fraction(1, m * m))
                    # every discarded subtree is bounded by prod 1/m^2
                    # <= bound/(cap+1)^2 < the exact (1,...,1) value
                rec((1, 0, 0, 1), 0, Fraction(1))
                tail_bound = Fraction(1, (cap + 1) ** 2)
                if tail_bound > best:
                    best = tail_bound  # cannot happen for gauss, kept honest
            else:
                def rec2(mat, d):
                    nonlocal best
                    if d == t:
                        su = _composed_sup(mat)
                        if su > best:
                            best = su
                        return
                    for br in self.branches:
                        rec2(_matmul(mat, br.matrix()), d + 1)
                rec2((1, 0, 0, 1), 0)
            out[t] = float(best)
        out["contracting"] = out[depth] < 1.0
        return out

    def describe(self) -> dict:
        d = {"name": self.name, "kind": self.kind}
        if self.kind == "rary":
            d["r"] = self.r
        if self.kind == "moebius":
            d["branches"] = [br.matrix() for br in self.branches]
        return d


def _gauss_leaf(s: float, c: np.ndarray, d: np.ndarray, Q: int = 18):
    """Exact branch sum at a cylinder: sum over m >= 1 of the child width
    to the s, i.e. d^-2s * sum [(m+a)(m+a+1)]^-s with a = c/d.  The product
    collapses through (m+a)(m+a+1) = (m+g)^2 - 1/4, g = a + 1/2, into a
    fast binomial series of Hurwitz zetas (ratio <= 1/9)."""
    from scipy.special import zeta as hz
    alpha = c / d
    tot = np.zeros_like(alpha)
    binom = 1.0
    for q in range(Q):
        if q:
            binom *= (-s - (q - 1)) / q
        tot += binom * (-0.25) ** q * hz(2 * s + 2 * q, 1.5 + alpha)
    scale = d ** (-2.0 * s)
    rem = 2.0 * float(scale.sum()) * (1.0 / 9.0) ** Q
    return scale * tot, rem


def _gauss_tail(s: float, d: np.ndarray, alpha: np.ndarray, M: np.ndarray,
                Q: int = 8) -> np.ndarray:
    """Same series restricted to branches m > M (per-node array)."""
    from scipy.special import zeta as hz
    tot = np.zeros_like(alpha)
    binom = 1.0
    for q in range(Q):
        if q:
            binom *= (-s - (q - 1)) / q
        tot += binom * (-0.25) ** q * hz(2 * s + 2 * q, M + 1.5 + alpha)
    return d ** (-2.0 * s) * np.maximum(tot, 0.0)


def _gauss_two_step_bound(s: float, grid: int = 4001, mcut: int = 400) -> float:
    """Rigorous upper bound on sup_x of the two-fold branch-weight sum
    sum_{m1,m2} |(h_m2 h_m1)'(x)|^s, evaluated on a grid with an explicit
    Lipschitz slack.  Below 1 this certifies geometric decay of depth
    sums two levels at a time."""
    from scipy.special import zeta as hz
    x = np.linspace(0.0, 1.0, grid)
    m = np.arange(1, mcut + 1, dtype=float)[:, None]
    inner = hz(2 * s, 1.0 + 1.0 / (m + x))
    vals = np.sum((m + x) ** (-2 * s) * inner, axis=0)
    z2s = float(hz(2 * s, 1.0))
    vals += z2s * hz(2 * s, mcut + 1.0 + x)
    z2s1 = float(hz(2 * s + 1, 1.0))
    lip = 4 * s * z2s * z2s1
    return float(np.max(vals)) + lip / (2 * (grid - 1))


def _gauss_lambda_tree(s: float, eps: float):
    """Whole-tree cylinder sum for the continued-fraction series.

    Every visited cylinder contributes its width^s exactly; the branch
    families are cut with exact zeta tails, and the descendants of
    anything not expanded are charged through the subtree mass factor
    F - 1 derived from one- and two-step operator norm bounds.  Returns
    (value, certified absolute error bound)."""
    from scipy.special import zeta as hz
    if s <= 1:
        raise ValueError("need real s > 1")
    B1 = float(hz(2 * s, 1.0))
    B2 = _gauss_two_step_bound(s)
    if B2 >= 0.98:
        raise TruncationBudget(f"two-step mass bound {B2:.3f} will not contract")
    Fdesc = (1 + B1) / (1 - B2) - 1.0   # descendants-only mass factor
    total = 0.0                          # root cylinder is the empty word
    err = 0.0
    pop_cap = 2_000_000
    c = np.array([0.0])
    d = np.array([1.0])
    for level in range(400):
        if len(c) == 0:
            break
        ws = (d * (c + d)) ** (-s)
        total += float(ws.sum())
        # stop whole subtrees: spend this level's slice of the budget on
        # the lightest nodes, then force-stop beyond the population cap
        stop_bound = ws * Fdesc
        order = np.argsort(stop_bound)
        cum = np.cumsum(stop_bound[order])
        lev_budget = eps * 0.81 / (level + 1) ** 2   # sums to < eps * 4/3
        nstop = int(np.searchsorted(cum, lev_budget))
        nstop = max(nstop, len(c) - pop_cap)
        if nstop > 0:
            stopped = float(cum[min(nstop, len(c)) - 1])
            total += stopped / 2
            err += stopped / 2
            keep = np.sort(order[nstop:])
            c, d, ws = c[keep], d[keep], ws[keep]
        if len(c) == 0:
            break
        # expand kept nodes; children beyond M enter through exact zeta
        # tails now (their own mass) and the F bound (their descendants)
        share = lev_budget * np.maximum(ws, 1e-300) / max(float(ws.sum()), 1e-300)
        base = d ** (-2.0 * s)
        M = np.ceil((base * Fdesc / ((2 * s - 1) * share)) ** (1.0 / (2 * s - 1)))
        M = np.clip(M, 2, 500_000).astype(np.int64)
        if int(M.sum()) > pop_cap:
            M = np.maximum((M * (pop_cap / float(M.sum()))).astype(np.int64), 1)
        alpha = c / d
        t = _gauss_tail(s, d, alpha, M.astype(float))
        ttot = float(t.sum())
        total += ttot + ttot * Fdesc / 2
        err += ttot * Fdesc / 2
        ci = np.repeat(c, M)
        di = np.repeat(d, M)
        m = np.concatenate([np.arange(1, int(mm) + 1, dtype=float) for mm in M])
        c, d = di, ci + m * di
    else:
        raise TruncationBudget("tree walk failed to terminate")
    return total, err + 1e-13 * abs(total)


def _gauss_depth_sum(s: float, k: int, eps: float):
    """Depth-k power sum for the continued-fraction system, real s > 1.

    Levels are expanded breadth-first with per-node branch truncation
    certified by the exact zeta tails; the final level never enumerates,
    it is summed in closed form.  Composed maps are tracked only through
    (c, d) since every branch matrix has unit determinant and children
    obey (c, d) -> (d, c + m d)."""
    if s <= 1:
        raise ValueError("need real s > 1")
    c = np.array([0.0])
    d = np.array([1.0])
    err = 0.0
    levels = max(k - 1, 1)
    for _lev in range(k - 1):
        # prune: a node's whole depth-k subtree mass is at most its own
        # width^s, so the lightest nodes can be dropped wholesale against
        # this level's share of the error budget
        ws = (d * (c + d)) ** (-s)
        if len(ws) > 64:
            order = np.argsort(ws)
            drop_mass = np.cumsum(ws[order])
            ndrop = int(np.searchsorted(drop_mass, eps / (4 * levels)))
            if ndrop > 0:
                err += float(drop_mass[ndrop - 1])
                keep = np.sort(order[ndrop:])
                c, d, ws = c[keep], d[keep], ws[keep]
        # per-node branch truncation, budget proportional to node mass
        eps_lev = eps / (4 * levels)
        eps_node = eps_lev * ws / ws.sum()
        base = d ** (-2.0 * s)
        M = np.ceil((base / ((2 * s - 1) * eps_node)) ** (1.0 / (2 * s - 1)))
        M = np.clip(M, 4, None).astype(np.int64)
        alpha = c / d
        t = _gauss_tail(s, d, alpha, M.astype(float))
        for _ in range(40):
            bad = t > eps_node
            if not np.any(bad):
                break
            M[bad] *= 2
            if int(M.max()) > 2_000_000:
                raise TruncationBudget("branch truncation cap hit")
            t = _gauss_tail(s, d, alpha, M.astype(float))
        err += float(t.sum())
        if int(M.sum()) > 3_000_000:
            raise TruncationBudget("cylinder population cap hit")
        ci = np.repeat(c, M)
        di = np.repeat(d, M)
        m = np.concatenate([np.arange(1, int(mm) + 1, dtype=float) for mm in M])
        c, d = di, ci + m * di
    val, rem = _gauss_leaf(s, c, d)
    return float(val.sum()), err + rem


def _composed_sup(mat) -> Fraction:
    a, b, c, d = mat
    det = abs(a * d - b * c)
    lo = min(abs(d), abs(c + d))
    return Fraction(det, lo * lo)


class _OrbitState:
    """Exact orbit of one emitted point, symbols resolved lazily.

    x lives in the half-open dyadic interval [K/2^B, (K+1)/2^B); the
    composed inverse map after t committed symbols is the integer matrix
    M, so the current position interval is M applied to the x interval.
    A symbol commits only when that whole interval sits inside one branch
    image; otherwise more bits of x are drawn.
    """

    MAX_BITS = 1 << 14

    def __init__(self, system: DynamicalSource, rng):
        self.sys = system
        self.rng = rng
        self.K = 0
        self.B = 0
        self.M = (1, 0, 0, 1)
        self.out: list[int] = []

    def _more_bits(self):
        if self.B >= self.MAX_BITS:
            raise PrecisionExhausted(
                "orbit point sits on a branch boundary beyond the bit cap")
        chunk = int(self.rng.integers(0, 1 << 32, dtype=np.uint64))
        self.K = (self.K << 32) | chunk
        self.B += 32

    def _step(self) -> int:
        while True:
            if self.B == 0:
                self._more_bits()
            lo = _moebius_frac(self.M, self.K, 1 << self.B)
            hi = _moebius_frac(self.M, self.K + 1, 1 << self.B)
            if lo > hi:
                lo, hi = hi, lo
            m = self.sys._locate(lo, hi)
            if m is not None:
                self.M = _matmul(self.sys.branch(m).inverse_matrix(), self.M)
                return m
            self._more_bits()

    def take(self, rows: int) -> np.ndarray:
        out = np.empty(rows, dtype=np.int64)
        for i in range(rows):
            out[i] = self._step()
        return out


# -- builtin factories -------------------------------------------------


def rary_source(r: int) -> DynamicalSource:
    if r < 2:
        raise ValueError("need r >= 2")
    branches = [MoebiusBranch(1, m, 0, r) for m in range(r)]
    src = DynamicalSource("rary", branches, r=r)
    return src


def gauss_source() -> DynamicalSource:
    return DynamicalSource("gauss")


def moebius_source(branch_coeffs) -> DynamicalSource:
    branches = [MoebiusBranch(*[int(x) for x in co]) for co in branch_coeffs]
    return DynamicalSource("moebius", branches)


def from_dynamical_config(cfg: dict) -> DynamicalSource:
    kind = cfg.get("kind")
    if cfg.get("initial", "uniform") != "uniform":
        raise UnsupportedSource("only the uniform initial density is supported")
    if kind == "rary":
        return rary_source(int(cfg.get("r", 2)))
    if kind == "gauss":
        return gauss_source()
    if kind == "moebius":
        coeffs = [(b["a"], b["b"], b["c"], b["d"]) for b in cfg["branches"]]
        return moebius_source(coeffs)
    raise ValueError(f"unknown dynamical kind: {kind!r}")


# -- continued-fraction series, independent route ----------------------


def gauss_lambda_reference(s: float, Q: int = 2_000_000) -> DirichletValue:
    """Lambda(s) for the continued-fraction source without any cylinder
    recursion: fundamental intervals biject onto coprime continuant pairs
    q' <= q with width 1/(q(q+q')), each pair counted twice except (1,1).

    The coprimality is unfolded by Moebius inversion, leaving Hurwitz zeta
    blocks that vectorize over q; the q-tail beyond Q is estimated by the
    mean coprime density with a conservative bound.  Real s > 1 only.
    """
    from scipy.special import zeta as hurwitz

    if not isinstance(s, (int, float)) or s <= 1:
        raise ValueError("reference series needs real s > 1")
    s = float(s)
    j = np.arange(1, Q + 1, dtype=float)
    F = j ** (-s) * (hurwitz(s, j + 1) - hurwitz(s, 2 * j))
    SF = np.cumsum(F)

    mu = _mobius_sieve(Q)
    d = np.arange(1, Q + 1, dtype=float)
    idx = (Q // np.arange(1, Q + 1)) - 1
    core = np.sum(np.where(mu != 0, mu * d ** (-2 * s) * SF[idx], 0.0))

    # tail over q > Q: S_q ~ (6/pi^2) * c(s) * q^(1-2s), c(s) = int_0^1 (1+u)^-s du
    c_s = (2 ** (1 - s) - 1) / (1 - s)
    dens = 6 / math.pi ** 2
    tail_est = dens * c_s * (Q ** (2 - 2 * s)) / (2 * s - 2)
    # hard bound uses phi(q)/q <= 1 instead of the mean density
    tail_hard = c_s * ((Q ** (2 - 2 * s)) / (2 * s - 2) + Q ** (1 - 2 * s))
    value = 1.0 + 2.0 ** (-s) + 2.0 * (core + tail_est)
    bound = 2.0 * (tail_hard - tail_est) + 1e-12 * abs(value)
    return DirichletValue(float(value), float(bound))


def _mobius_sieve(n: int) -> np.ndarray:
    """mu(1..n) as an int8 array, index 0 is mu(1)."""
    mu = np.ones(n + 1, dtype=np.int8)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, n + 1):
        if is_prime[p]:
            is_prime[2 * p::p] = False
            mu[p::p] = -mu[p::p]
            sq = p * p
            if sq <= n:
                mu[sq::sq] = 0
    return mu[1:]


# -- regularity functionals --------------------------------------------


def uni_distance(b1: MoebiusBranch, b2: MoebiusBranch, grid: int = 2001):
    """inf over [0,1] of |d/dx log(|h1'| / |h2'|)| with a Lipschitz bound.

    Affine pairs have identically zero distance (their log-derivatives are
    constant), which is what rules them out of the uniform nonintegrability
    regime no matter the branch pair chosen.
    """
    def psi_prime(x):
        t1 = -2 * b1.c / (b1.c * x + b1.d)
        t2 = -2 * b2.c / (b2.c * x + b2.d)
        return t1 - t2

    xs = np.linspace(0.0, 1.0, grid)
    vals = np.abs([psi_prime(x) for x in xs])
    inf_est = float(np.min(vals))
    # |psi''| <= sum 2 c_i^2 / min(d_i, c_i+d_i)^2 on [0,1]
    lip = 0.0
    for b in (b1, b2):
        lo = min(abs(b.d), abs(b.c + b.d))
        lip += 2 * b.c * b.c / (lo * lo)
    step = 1.0 / (grid - 1)
    certified = max(0.0, inf_est - lip * step / 2)
    return inf_est, certified


def uni_pair_fraction(system: DynamicalSource, threshold: float = 0.0,
                      head: int = 8) -> float:
    """Weighted fraction of distinct branch pairs whose distance clears the
    threshold, weights being products of fundamental-interval widths.

    The infinite family is truncated to its head; widths there decay like
    1/m^2 so the discarded mass is reported inside the weight normalizer.
    """
    if system.infinite:
        ms = range(1, head + 1)
    else:
        ms = range(len(system.branches))
    branches = [(m, system.branch(m)) for m in ms]
    widths = {m: float(br.width()) for m, br in branches}
    num = 0.0
    den = 0.0
    for i, (m1, br1) in enumerate(branches):
        for m2, br2 in branches[i + 1:]:
            w = widths[m1] * widths[m2]
            den += w
            _, cert = uni_distance(br1, br2)
            if cert > threshold:
                num += w
    if den == 0:
        return 0.0
    return num / den


def branch_expansion_rates(system: DynamicalSource, head: int = 4) -> dict:
    """Per-branch Lyapunov data at the branch's own fixed point:
    c(h) = log|h'(x*)| (period one), the quantity whose pairwise ratios
    feed the diophantine classification."""
    if system.infinite:
        ms = range(1, head + 1)
    else:
        ms = range(len(system.branches))
    out = {}
    for m in ms:
        br = system.branch(m)
        x = br.fixed_point()
        out[m] = {"fixed_point": x, "c": math.log(br.deriv_abs(x))}
    return out


# -- deterministic orbits ------------------------------------------------


def _as_fraction_interval(x) -> tuple[Fraction, Fraction]:
    if isinstance(x, tuple):
        lo, hi = Fraction(x[0]), Fraction(x[1])
        if lo > hi:
            lo, hi = hi, lo
    else:
        lo = hi = Fraction(x)
    if lo < 0 or hi > 1:
        raise ValueError("starting point must lie in [0,1]")
    return lo, hi


def emit_word(system: DynamicalSource, x, length: int) -> tuple[int, ...]:
    """The word the shift reads off the orbit of x, computed exactly.

    x may be an int, float, Fraction, or an (lo, hi) enclosure pair; a
    float converts to the exact dyadic rational it represents.  Each
    symbol commits only while the whole enclosure sits inside one closed
    branch image.  An orbit that reaches a point outside every image
    (the continued-fraction orbit of a rational terminates at 0) or an
    enclosure straddling a branch boundary raises PrecisionExhausted,
    since no amount of recomputation can resolve the symbol.
    """
    lo, hi = _as_fraction_interval(x)
    out: list[int] = []
    for _ in range(int(length)):
        m = system._locate(lo, hi)
        if m is None:
            raise PrecisionExhausted(
                f"orbit enclosure [{lo}, {hi}] does not resolve a branch "
                f"after {len(out)} symbols")
        inv = system.branch(m).inverse_matrix()
        y0 = _moebius_frac(inv, lo.numerator, lo.denominator)
        y1 = _moebius_frac(inv, hi.numerator, hi.denominator)
        lo, hi = (y0, y1) if y0 <= y1 else (y1, y0)
        out.append(m)
    return tuple(out)


# -- good-class diagnostics ----------------------------------------------


@dataclass(frozen=True)
class GoodClassReport:
    """Sampled regularity certificate for an expanding system.

    G1: uniform contraction (rho_hat < 1), from exact per-depth sups.
    G2: bounded distortion (A_hat finite), A_hat = sup |h''| / |h'|.
    G3: summable branch widths strictly below the half-plane edge,
        i.e. sigma0_hat < 1.
    """

    rho_hat: float
    A_hat: float
    sigma0_hat: float
    G1: bool
    G2: bool
    G3: bool
    per_depth_sup: dict = field(default_factory=dict)
    probe_max: float = 0.0
    note: str = "finite-depth and sampled evidence, not a proof"

    @property
    def good(self) -> bool:
        return self.G1 and self.G2 and self.G3


def check_good_class(system: DynamicalSource, probe_points=None,
                     depth: int = 2, head: int = 512) -> GoodClassReport:
    """Estimate the good-class constants from exact branch data.

    rho_hat is the best per-symbol contraction factor seen among the
    exact depth-d sups (min over d of sup_d^(1/d)); A_hat bounds the
    distortion |h''/h'| = 2|c| / |cx+d| branch by branch in closed form
    and cross-checks it on the probe points; sigma0_hat estimates where
    the branch-width series stops converging (0 for finite systems, the
    reciprocal width-decay exponent for infinite families).
    """
    if probe_points is None:
        probe_points = tuple(i / 16 for i in range(17))
    prof = system.contraction_profile(depth)
    per_depth = {d: prof[d] for d in range(1, depth + 1)}
    rho_hat = min(per_depth[d] ** (1.0 / d) for d in per_depth)

    if system.infinite:
        ms = list(range(1, head + 1))
    else:
        ms = list(range(len(system.branches)))
    a_exact = 0.0
    probe_max = 0.0
    for m in ms:
        br = system.branch(m)
        c, d = br.c, br.d
        if c != 0:
            lo = min(abs(d), abs(c + d))
            a_exact = max(a_exact, 2 * abs(c) / lo)
        for x in probe_points:
            den = c * x + d
            if den != 0:
                probe_max = max(probe_max, 2 * abs(c) / abs(den))

    if system.infinite:
        # width decay exponent from the tail half of the branch family
        msf = np.arange(head // 2, head + 1, dtype=float)
        w = np.array([float(system.branch(int(m)).width()) for m in msf])
        slope = np.polyfit(np.log(msf), np.log(w), 1)[0]
        gamma = -float(slope)
        sigma0 = 1.0 / gamma if gamma > 0 else math.inf
    else:
        sigma0 = 0.0

    return GoodClassReport(
        rho_hat=float(rho_hat),
        A_hat=float(a_exact),
        sigma0_hat=float(sigma0),
        G1=rho_hat < 1.0,
        G2=math.isfinite(a_exact),
        G3=sigma0 < 1.0,
        per_depth_sup=per_depth,
        probe_max=float(probe_max),
    )


# -- uniform separation of branch pairs -----------------------------------


def uni_distance_exact(b1: MoebiusBranch, b2: MoebiusBranch) -> float | None:
    """Exact inf over [0,1] of |d/dx log(|h1'| / |h2'|)|.

    The derivative is 2 (c2 d1 - c1 d2) / ((c1 x + d1)(c2 x + d2)) with a
    constant numerator, so the infimum sits where the denominator's
    magnitude peaks: an endpoint, or the inner vertex of the quadratic.
    Returns None when a denominator changes sign on [0,1] (not a valid
    branch pair) so callers can fall back to the grid bound.
    """
    num = 2 * abs(b1.c * b2.d - b2.c * b1.d)
    ends = (b1.d, b1.c + b1.d, b2.d, b2.c + b2.d)
    if 0 in ends:
        return None
    if (ends[0] > 0) != (ends[1] > 0) or (ends[2] > 0) != (ends[3] > 0):
        return None
    cands = [Fraction(0), Fraction(1)]
    c12 = b1.c * b2.c
    if c12 != 0:
        xv = Fraction(-(b1.c * b2.d + b2.c * b1.d), 2 * c12)
        if 0 < xv < 1:
            cands.append(xv)
    qmax = max(abs((b1.c * x + b1.d) * (b2.c * x + b2.d)) for x in cands)
    return float(Fraction(num) / qmax)


@dataclass(frozen=True)
class UniReport:
    """Truncated estimate of how often two independent depth-n cylinders
    have nearly matching log-derivatives."""

    n: int
    a: float
    rho_hat: float
    threshold: float
    estimate: float
    covered_mass: float
    pairs: int
    min_distance: float
    max_distance: float
    note: str = "truncated enumeration; evidence, not a proof"


def uni_probability_estimate(system: DynamicalSource, n: int, a: float = 0.5,
                             budget: int = 4000) -> UniReport:
    """Weighted probability that two independently drawn depth-n branches
    sit closer than rho_hat^(a n) in log-derivative distance.

    Distinct word pairs are weighted by the product of their fundamental
    interval widths.  The infinite family is truncated so at most
    `budget` words are enumerated and the covered mass is reported, so
    the reader sees what the truncation left out.  Affine systems short
    circuit to 1: every pairwise distance vanishes identically, which is
    exactly what keeps them out of the uniformly separated regime.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    prof = system.contraction_profile(2)
    rho = min(prof[1], prof[2] ** 0.5)
    thr = rho ** (a * n)
    if not system.infinite and all(br.c == 0 for br in system.branches):
        return UniReport(n, a, rho, thr, 1.0, 1.0, 0, 0.0, 0.0,
                         note="affine branches: distances vanish identically")

    if system.infinite:
        head = max(2, int(budget ** (1.0 / n)))
        ms = list(range(1, head + 1))
    else:
        ms = list(range(len(system.branches)))
        if len(ms) ** n > 4 * budget:
            raise TruncationBudget("word enumeration exceeds the budget")

    C = []
    D = []
    W = []
    negative = False
    for w in itertools.product(ms, repeat=n):
        m = (1, 0, 0, 1)
        for sym in w:
            m = _matmul(m, system.branch(sym).matrix())
        am, bm, cm, dm = m
        det = am * dm - bm * cm
        C.append(cm)
        D.append(dm)
        W.append(abs(Fraction(det, dm * (cm + dm))))
        if cm < 0 or dm <= 0:
            negative = True
    if negative:
        raise UnsupportedSource(
            "pair enumeration needs nonnegative composed denominators")
    Ca = np.array(C, dtype=float)
    Da = np.array(D, dtype=float)
    Wa = np.array([float(w) for w in W])
    covered = float(Wa.sum()) ** 2

    # denominators are nondecreasing on [0,1], so the exact distance is
    # 2|ci dj - cj di| / ((ci+di)(cj+dj)) for every pair at once
    E = Ca + Da
    num_mass = 0.0
    den_mass = 0.0
    dmin = math.inf
    dmax = 0.0
    npairs = 0
    block = 1024
    for i0 in range(0, len(Wa), block):
        i1 = min(i0 + block, len(Wa))
        cross = np.abs(np.outer(Ca[i0:i1], Da) - np.outer(Da[i0:i1], Ca))
        dist = 2.0 * cross / np.outer(E[i0:i1], E)
        wprod = np.outer(Wa[i0:i1], Wa)
        same = np.zeros(dist.shape, dtype=bool)
        idx = np.arange(i0, i1)
        same[np.arange(i1 - i0), idx] = True
        off = ~same
        num_mass += float(wprod[off & (dist <= thr)].sum())
        den_mass += float(wprod[off].sum())
        if off.any():
            dv = dist[off]
            dmin = min(dmin, float(dv.min()))
            dmax = max(dmax, float(dv.max()))
        npairs += int(off.sum())

    est = num_mass / den_mass if den_mass > 0 else 0.0
    return UniReport(n, float(a), float(rho), float(thr), est,
                     covered, npairs, float(dmin), float(dmax))


# -- diophantine expansion-rate profile ------------------------------------


@dataclass(frozen=True)
class DiopQuantities:
    """Per-word expansion rates at periodic points and their ratios.

    rates maps a word w to c(w) = log|h_w'(x_w)| / |w| where x_w is the
    fixed point of the composed branch h_w.  pair_ratios holds c(w1)/c(w2)
    for ordered pairs, triple_ratios (c1-c2)/(c1-c3) for ordered triples;
    the arithmetic nature of these numbers drives the classification.
    """

    rates: dict
    pair_ratios: dict
    triple_ratios: dict
    note: str = "finite word sample; evidence, not a proof"


def diop_quantities(system: DynamicalSource, words) -> DiopQuantities:
    words = [tuple(int(s) for s in w) for w in words]
    rates: dict = {}
    for w in words:
        if not 1 <= len(w) <= 3:
            raise ValueError("expansion-rate words must have length 1..3")
        m = (1, 0, 0, 1)
        for sym in w:
            m = _matmul(m, system.branch(sym).matrix())
        br = MoebiusBranch(*m)
        try:
            x = br.fixed_point()
        except ValueError as exc:
            raise NoFixedPoint(f"word {w}: {exc}") from None
        rates[w] = math.log(br.deriv_abs(x)) / len(w)
    pair_ratios = {}
    for w1, w2 in itertools.permutations(words, 2):
        if rates[w2] != 0:
            pair_ratios[(w1, w2)] = rates[w1] / rates[w2]
    triple_ratios = {}
    for w1, w2, w3 in itertools.permutations(words, 3):
        dd = rates[w1] - rates[w3]
        if dd != 0:
            triple_ratios[(w1, w2, w3)] = (rates[w1] - rates[w2]) / dd
    return DiopQuantities(rates, pair_ratios, triple_ratios)
