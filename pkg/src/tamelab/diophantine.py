"""Continued fractions and rational recognition.

These are the arithmetic primitives behind two classification questions:
whether log-ratios of probabilities are rational (periodicity), and how
well an irrational log-ratio is approximable (the witness reported for
candidate tame sources).
"""

from __future__ import annotations

import mpmath as mp

_HUGE_QUOTIENT = 10 ** 30


def continued_fraction(x, terms: int = 64) -> list[int]:
    """Partial quotients of x > 0 at the caller's working precision.

    Extraction stops early when the remainder is indistinguishable from an
    integer at the current precision (the tail would be noise), or when a
    quotient is absurdly large (x is rational to precision).
    """
    x = mp.mpf(x)
    if x <= 0:
        raise ValueError("need x > 0")
    eps = mp.mpf(2) ** (-(mp.mp.prec - 16))
    out = []
    for _ in range(terms):
        a = int(mp.floor(x))
        out.append(a)
        frac = x - a
        if frac < eps:
            break
        x = 1 / frac
        if x > _HUGE_QUOTIENT:
            break
    return out


def convergents(cf: list[int]) -> list[tuple[int, int]]:
    """(p_k, q_k) for each truncation of the continued fraction."""
    out = []
    p0, q0, p1, q1 = 1, 0, cf[0], 1
    out.append((p1, q1))
    for a in cf[1:]:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
    return out


def rational_candidate(x, max_den: int, bits: int) -> tuple[int, int] | None:
    """Best rational u/v with v <= max_den if it matches x to 2^-bits.

    Returns None when no convergent with admissible denominator is that
    close; an exact caller-side check must still confirm any candidate.
    """
    x = mp.mpf(x)
    if mp.mp.prec < bits + 32:
        raise ValueError("working precision too low for the requested bits")
    cf = continued_fraction(x)
    best = None
    for p, q in convergents(cf):
        if q > max_den:
            break
        best = (p, q)
    if best is None:
        return None
    u, v = best
    if abs(x - mp.mpf(u) / v) < mp.mpf(2) ** (-bits):
        return (u, v)
    return None


def irrationality_profile(x, terms: int = 12, prec: int = 256) -> dict:
    """Convergents of x with their approximation qualities.

    quality_k = -ln|x - p_k/q_k| / ln q_k, the exponent mu such that the
    convergent approximates x to q^-mu.  Bounded quality along the whole
    list is the diophantine-type evidence reported for tame candidates.
    """
    with mp.workprec(prec):
        xm = mp.mpf(x) if not isinstance(x, mp.mpf) else x
        cf = continued_fraction(xm, terms=terms)
        convs = convergents(cf)
        rows = []
        for p, q in convs:
            err = abs(xm - mp.mpf(p) / q)
            if err == 0 or q == 1:
                quality = float("inf") if err == 0 else float("nan")
            else:
                quality = float(-mp.log(err) / mp.log(q))
            rows.append({"p": p, "q": q, "error": float(err), "quality": quality})
    finite = [r["quality"] for r in rows if r["q"] > 1 and r["error"] > 0]
    return {
        "cf": cf,
        "convergents": rows,
        "max_quality": max(finite) if finite else float("nan"),
    }
