"""Memoryless and Markov sources.

Both have closed-form Dirichlet series: the memoryless mixing series is
lambda(s) = sum p_i^s with Lambda(s) = 1/(1 - lambda(s)), and the Markov
chain replaces lambda by the secular matrix P(s) (transition probabilities
raised elementwise to s, column-stochastic convention at s = 1):

    Lambda(s) = 1 + 1^T (I - P(s))^{-1} R(s)

with R(s) the initial distribution raised to s.  Constructors accept the
row-stochastic layout that is natural in JSON (transition[j][i] is the
probability of emitting i after j) and transpose internally.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath as mp
import numpy as np

from .diophantine import rational_candidate
from .errors import QuasiInversePole, UnsupportedSource
from .sources import DirichletValue, Source

_POLE_TOL = 1e-12


@dataclass(frozen=True)
class Periodicity:
    """Outcome of the exact log-commensurability test.

    periodic is True when every ln p_i / ln p_j is rational, certified by
    exact integer-power identities on the (binary-rational) probabilities.
    generator is the positive real g with every ln(1/p_i) in g*Z, so the
    mixing series has vertical poles at 1 + i*(2*pi/g)*k.
    """

    periodic: bool
    generator: float | None
    certificate: dict


class Memoryless(Source):
    name = "memoryless"

    def __init__(self, probs):
        p = np.asarray([float(x) for x in probs], dtype=float)
        if p.ndim != 1 or len(p) < 2:
            raise ValueError("need at least two symbol probabilities")
        if np.any(p <= 0):
            raise ValueError("probabilities must be positive")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")
        self.probs = p / p.sum()
        self._cum = np.cumsum(self.probs)
        self._logp = np.log(self.probs)

    # -- series --------------------------------------------------------

    def lam(self, s):
        """Mixing series sum p_i^s; accepts complex s."""
        if np.iscomplexobj(np.asarray(s)) or isinstance(s, complex):
            return complex(np.sum(np.exp(np.asarray(s) * self._logp)))
        return float(np.sum(np.exp(s * self._logp)))

    def lam_prime(self, s):
        if np.iscomplexobj(np.asarray(s)) or isinstance(s, complex):
            return complex(np.sum(self._logp * np.exp(np.asarray(s) * self._logp)))
        return float(np.sum(self._logp * np.exp(s * self._logp)))

    def lambda_k(self, s, k: int):
        return self.lam(s) ** k

    def lambda_series(self, s) -> DirichletValue:
        lam = self.lam(s)
        if abs(1.0 - lam) < _POLE_TOL:
            raise QuasiInversePole(f"mixing series has a pole at s={s}")
        return DirichletValue(1.0 / (1.0 - lam), 0.0)

    def entropy(self) -> float:
        return float(-np.sum(self.probs * self._logp))

    # -- emission ------------------------------------------------------

    def _emitter(self, n: int, rng: np.random.Generator):
        cum = self._cum
        top = len(self.probs) - 1

        def extend(rows: int):
            u = rng.random((rows, n))
            return np.minimum(np.searchsorted(cum, u, side="right"), top)

        return extend

    # -- structure -----------------------------------------------------

    def prefix_probabilities(self, depth: int):
        out = []
        for w in itertools.product(range(len(self.probs)), repeat=depth):
            out.append((w, float(np.prod(self.probs[list(w)]))))
        return out

    def periodicity(self, max_den: int = 64) -> Periodicity:
        """Exact commensurability of the probability logarithms.

        Candidates u/v for ln q_i / ln q_1 come from continued fractions of
        512-bit evaluations; each candidate is then verified exactly on the
        binary-rational inputs (q_1^u == q_i^v as Fractions).  A candidate
        that fails exact verification, or the absence of any candidate with
        denominator <= max_den, certifies aperiodicity at that cap.
        """
        qs = sorted(set(Fraction(float(x)) for x in self.probs))
        if len(qs) == 1:
            g = math.log(1.0 / float(qs[0]))
            return Periodicity(True, g, {"kind": "uniform", "ratios": [(1, 1)]})
        ratios: list[tuple[int, int]] = [(1, 1)]
        with mp.workprec(512):
            logs = [mp.log(q.numerator) - mp.log(q.denominator) for q in qs]
            for i in range(1, len(qs)):
                x = logs[i] / logs[0]
                cand = rational_candidate(x, max_den=max_den, bits=400)
                if cand is None:
                    return Periodicity(False, None, {
                        "kind": "no-rational-candidate",
                        "pair": (0, i), "max_den": max_den})
                u, v = cand
                if qs[0] ** u != qs[i] ** v:
                    return Periodicity(False, None, {
                        "kind": "candidate-refuted-exactly",
                        "pair": (0, i), "candidate": (u, v)})
                ratios.append((u, v))
        # ln(1/q_i) = (u_i/v_i) ln(1/q_1); lattice generator via lcm/gcd
        V = 1
        for _, v in ratios:
            V = V * v // gcd(V, v)
        G = 0
        for u, v in ratios:
            G = gcd(G, u * (V // v))
        g = math.log(float(qs[0].denominator) / float(qs[0].numerator)) * G / V
        return Periodicity(True, g, {"kind": "commensurable", "ratios": ratios})

    def first_vertical_pole(self) -> float | None:
        """Smallest t > 0 with lambda(1 + i t) = 1, None if aperiodic."""
        per = self.periodicity()
        if not per.periodic:
            return None
        return 2.0 * math.pi / per.generator

    def vertical_pole_scan(self, t_max: float, grid: int = 4000):
        """Numeric scan of |lambda(1+it) - 1| on (0, t_max]; returns the
        refined locations where it vanishes.  Cross-check for the exact
        test, and the honest answer when no exact structure is known."""
        ts = np.linspace(t_max / grid, t_max, grid)
        vals = np.array([abs(self.lam(1 + 1j * t) - 1.0) for t in ts])
        hits = []
        for i in range(1, grid - 1):
            if vals[i] < vals[i - 1] and vals[i] < vals[i + 1] and vals[i] < 1e-2:
                lo, hi = ts[i - 1], ts[i + 1]
                for _ in range(80):
                    m1 = lo + (hi - lo) / 3
                    m2 = hi - (hi - lo) / 3
                    if abs(self.lam(1 + 1j * m1) - 1) < abs(self.lam(1 + 1j * m2) - 1):
                        hi = m2
                    else:
                        lo = m1
                t0 = 0.5 * (lo + hi)
                if abs(self.lam(1 + 1j * t0) - 1.0) < 1e-9:
                    hits.append(t0)
        return hits

    def describe(self) -> dict:
        return {"name": self.name, "probs": [float(x) for x in self.probs]}


class Markov(Source):
    name = "markov"

    def __init__(self, initial, transition):
        init = np.asarray([float(x) for x in initial], dtype=float)
        rows = np.asarray([[float(x) for x in row] for row in transition], dtype=float)
        r = len(init)
        if rows.shape != (r, r):
            raise ValueError("transition must be square and match initial")
        if np.any(init < 0) or np.any(rows < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(init.sum() - 1.0) > 1e-9 or np.any(np.abs(rows.sum(axis=1) - 1) > 1e-9):
            raise ValueError("initial and each transition row must sum to 1")
        self.initial = init / init.sum()
        self.rows = rows / rows.sum(axis=1, keepdims=True)
        self.colP = self.rows.T.copy()   # colP[i, j] = P(next=i | prev=j)
        self._cum_rows = np.cumsum(self.rows, axis=1)
        self._cum_init = np.cumsum(self.initial)

    def _pow(self, mat, s):
        with np.errstate(divide="ignore"):
            logm = np.where(mat > 0, np.log(np.where(mat > 0, mat, 1.0)), -np.inf)
        out = np.exp(np.multiply(s, logm, dtype=complex if isinstance(s, complex) else float))
        return np.where(mat > 0, out, 0.0)

    def secular(self, s):
        """P(s): transitions raised elementwise to s, column convention."""
        return self._pow(self.colP, s)

    def lambda_k(self, s, k: int):
        if k == 0:
            return 1.0
        v = self._pow(self.initial, s)
        P = self.secular(s)
        for _ in range(k - 1):
            v = P @ v
        tot = v.sum()
        return complex(tot) if isinstance(s, complex) else float(tot)

    def lambda_series(self, s) -> DirichletValue:
        P = self.secular(s)
        lam_dom = np.max(np.abs(np.linalg.eigvals(P)))
        if abs(lam_dom - 1.0) < _POLE_TOL:
            raise QuasiInversePole(f"secular matrix has dominant eigenvalue 1 at s={s}")
        R = self._pow(self.initial, s)
        x = np.linalg.solve(np.eye(len(R)) - P, R)
        tot = 1.0 + x.sum()
        if isinstance(s, complex):
            return DirichletValue(complex(tot), 0.0)
        return DirichletValue(float(np.real(tot)), 0.0)

    def stationary(self) -> np.ndarray:
        vals, vecs = np.linalg.eig(self.colP)
        i = int(np.argmin(np.abs(vals - 1.0)))
        pi = np.real(vecs[:, i])
        pi = np.abs(pi)
        return pi / pi.sum()

    def entropy(self) -> float:
        pi = self.stationary()
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(self.colP > 0, self.colP * np.log(np.where(self.colP > 0, self.colP, 1)), 0.0)
        return float(-np.sum(pi * plogp.sum(axis=0)))

    def _emitter(self, n: int, rng: np.random.Generator):
        r = len(self.initial)
        state = {"prev": None}
        cum_rows, cum_init = self._cum_rows, self._cum_init

        def extend(rows_wanted: int):
            out = np.empty((rows_wanted, n), dtype=np.int64)
            prev = state["prev"]
            for t in range(rows_wanted):
                u = rng.random(n)
                if prev is None:
                    sym = np.minimum(np.searchsorted(cum_init, u, side="right"), r - 1)
                else:
                    # per-word inverse cdf on that word's conditional row
                    sym = (u[:, None] > cum_rows[prev]).sum(axis=1)
                    sym = np.minimum(sym, r - 1)
                out[t] = sym
                prev = sym
            state["prev"] = prev
            return out

        return extend

    def prefix_probabilities(self, depth: int):
        r = len(self.initial)
        out = []
        for w in itertools.product(range(r), repeat=depth):
            p = self.initial[w[0]] if depth else 1.0
            for a, b in zip(w, w[1:]):
                p *= self.rows[a, b]
            out.append((w, float(p)))
        return out

    def describe(self) -> dict:
        return {"name": self.name,
                "initial": [float(x) for x in self.initial],
                "transition": [[float(x) for x in row] for row in self.rows]}


# -- log-ratio arithmetic profile -----------------------------------------


@dataclass(frozen=True)
class RatioProfile:
    """Arithmetic structure of the probability log-ratios.

    base indexes the reference probability (the largest one, so ratios
    come out >= 1).  For every other distinct value the profile records
    the float ratio ln p_j / ln p_base, the continued-fraction
    convergents behind the rational candidate, and whether a candidate
    survived exact verification.  verdict is "periodic" only when every
    ratio verified; a single refuted ratio is an aperiodicity witness.
    """

    base: int
    base_value: float
    ratios: dict
    convergents: dict
    rational: dict
    verdict: str
    generator: float | None
    witness: dict | None


def classify_periodicity(source, cf_depth: int = 24, max_den: int = 64) -> RatioProfile:
    """Commensurability profile of a memoryless source's log-probabilities.

    Candidates come from 512-bit continued fractions and are then checked
    exactly on the binary-rational inputs, so "periodic" is a certificate
    while "aperiodic-candidate" is evidence bounded by max_den.
    """
    if not isinstance(source, Memoryless):
        raise UnsupportedSource(
            "periodicity profiles are defined for memoryless sources only")
    probs = [float(p) for p in source.probs]
    qs = sorted(set(Fraction(p) for p in probs), reverse=True)
    base_q = qs[0]
    base_idx = probs.index(float(base_q))
    ratios: dict = {}
    convs: dict = {}
    rational: dict = {}
    witness = None
    with mp.workprec(512):
        log_base = mp.log(base_q.numerator) - mp.log(base_q.denominator)
        for q in qs[1:]:
            j = probs.index(float(q))
            x = (mp.log(q.numerator) - mp.log(q.denominator)) / log_base
            ratios[j] = float(x)
            from .diophantine import continued_fraction, convergents
            cf = continued_fraction(x, terms=cf_depth)
            convs[j] = list(itertools.islice(convergents(cf), cf_depth))
            cand = rational_candidate(x, max_den=max_den, bits=400)
            # x = u/v means v ln q = u ln base, i.e. q^v == base^u exactly
            ok = cand is not None and q ** cand[1] == base_q ** cand[0]
            rational[j] = ok
            if not ok and witness is None:
                witness = {
                    "pair": (float(base_q), float(q)),
                    "ratio": float(x),
                    "text": f"ln({float(q):.6g})/ln({float(base_q):.6g})",
                }
    if all(rational.values()):
        per = source.periodicity(max_den=max_den)
        verdict = "periodic" if per.periodic else "aperiodic-candidate"
        gen = per.generator
    else:
        verdict = "aperiodic-candidate"
        gen = None
    return RatioProfile(base_idx, float(base_q), ratios, convs, rational,
                        verdict, gen, witness)
