"""Source classification along the periodic / tame spectrum.

The growth constants of the mean costs are governed by how the series
behaves on the vertical line through its real pole.  Exactly periodic
sources put a whole lattice of poles there; the two tame regimes keep the
rest of the line quiet for arithmetic (H) or geometric-spectral (S)
reasons.  Periodicity of a memoryless source is decidable here and comes
with an exact certificate; every other verdict is labeled candidate and
backed by finite evidence, never claimed as proof.

Verdicts: "periodic", "H-tame-candidate", "S-tame-candidate",
"unresolved".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .diophantine import irrationality_profile
from .dynamics import (DynamicalSource, check_good_class, diop_quantities,
                       uni_distance_exact, uni_probability_estimate)
from .errors import TamelabError, UnsupportedSource
from .simple import Markov, Memoryless, classify_periodicity

VERDICTS = ("periodic", "H-tame-candidate", "S-tame-candidate", "unresolved")

_NOT_PROOF = "finite evidence, not a proof"


@dataclass(frozen=True)
class TamenessReport:
    verdict: str
    source: dict
    evidence: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")


def theorem2_regime(report: TamenessReport) -> str:
    """Growth-regime tag the asymptotic templates should carry."""
    return {
        "periodic": "periodic",
        "H-tame-candidate": "H-tame",
        "S-tame-candidate": "S-tame",
        "unresolved": "unknown",
    }[report.verdict]


def _classify_memoryless(source: Memoryless, max_den: int) -> TamenessReport:
    profile = classify_periodicity(source, max_den=max_den)
    if profile.verdict == "periodic":
        gen = profile.generator
        tau = 2.0 * math.pi / gen
        hits = source.vertical_pole_scan(1.25 * tau)
        agree = bool(hits) and abs(hits[0] - tau) < 1e-6
        return TamenessReport(
            "periodic",
            source.describe(),
            evidence={
                "generator": gen,
                "first_pole_t": tau,
                "ratio_profile": profile,
                "pole_scan_hits": hits,
                "pole_scan_agrees": agree,
            },
            notes=("periodicity verified exactly on the rational inputs",),
        )
    witness = profile.witness
    irr = irrationality_profile(witness["ratio"]) if witness else None
    return TamenessReport(
        "H-tame-candidate",
        source.describe(),
        evidence={
            "ratio_profile": profile,
            "witness": witness,
            "irrationality": irr,
        },
        notes=(
            f"aperiodicity certified up to denominator {max_den}; "
            "the diophantine type is " + _NOT_PROOF,
        ),
    )


def _classify_dynamical(system: DynamicalSource, uni_budget: int) -> TamenessReport:
    good = check_good_class(system)
    if not good.good:
        return TamenessReport(
            "unresolved", system.describe(),
            evidence={"good_class": good},
            notes=("regularity baseline not certified; no tameness route applies",),
        )

    affine = not system.infinite and all(br.c == 0 for br in system.branches)
    if affine:
        widths = [float(br.width()) for br in system.branches]
        inner = classify_periodicity(Memoryless(widths))
        if inner.verdict == "periodic":
            return TamenessReport(
                "periodic", system.describe(),
                evidence={"good_class": good, "width_profile": inner,
                          "generator": inner.generator},
                notes=("affine system: word probabilities are products of "
                       "branch widths, so the memoryless certificate applies",),
            )
        return TamenessReport(
            "H-tame-candidate", system.describe(),
            evidence={"good_class": good, "width_profile": inner,
                      "witness": inner.witness},
            notes=("affine branches have identically parallel log-derivatives, "
                   "so the geometric route is closed; " + _NOT_PROOF,),
        )

    if system.infinite:
        b1, b2 = system.branch(1), system.branch(2)
        words = [(1,), (2,), (1, 2)]
    else:
        b1, b2 = system.branch(0), system.branch(1)
        words = [(0,), (1,), (0, 1)]
    delta = uni_distance_exact(b1, b2)
    uni = [uni_probability_estimate(system, n, budget=uni_budget) for n in (1, 2)]
    diop = diop_quantities(system, words)
    separated = delta is not None and delta > 0.0
    verdict = "S-tame-candidate" if separated else "unresolved"
    return TamenessReport(
        verdict, system.describe(),
        evidence={
            "good_class": good,
            "branch_pair_distance": delta,
            "uni_reports": uni,
            "diop": diop,
        },
        notes=(
            "uniform separation sampled on branch pairs; " + _NOT_PROOF,
        ),
    )


def classify(source, max_den: int = 64, uni_budget: int = 4000) -> TamenessReport:
    """Place a source on the periodic / tame spectrum.

    Memoryless sources get the exact arithmetic treatment; expanding
    interval systems get the geometric one.  Markov chains are reported
    unresolved: their pole lattice lives on per-cycle weight ratios that
    this classifier does not enumerate.
    """
    if isinstance(source, Memoryless):
        return _classify_memoryless(source, max_den)
    if isinstance(source, Markov):
        return TamenessReport(
            "unresolved", source.describe(),
            evidence={"entropy": source.entropy()},
            notes=("cycle-weight commensurability is not implemented for "
                   "Markov chains; no verdict is honest here",),
        )
    if isinstance(source, DynamicalSource):
        try:
            return _classify_dynamical(source, uni_budget)
        except TamelabError as exc:
            return TamenessReport(
                "unresolved", source.describe(),
                evidence={"error": str(exc)},
                notes=("diagnostics failed before any verdict was reached",),
            )
    raise UnsupportedSource(f"cannot classify {type(source).__name__}")
