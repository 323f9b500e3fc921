"""Exception types raised by the library.

Every failure mode that callers are expected to handle gets its own class so
that the CLI can map them onto exit codes without string matching.
"""


class TamelabError(Exception):
    """Base class for all library errors."""


class PrecisionExhausted(TamelabError):
    """An exact-arithmetic emission could not be resolved with the
    available input bits (e.g. an orbit point landed exactly on a branch
    endpoint at every refinement attempted)."""


class TruncationBudget(TamelabError):
    """A truncated infinite sum could not certify the requested error
    bound within its growth cap."""


class KernelUnderflow(TamelabError):
    """The contour kernel decayed below representable range before the
    quadrature tail bound was met."""


class QuasiInversePole(TamelabError):
    """The quasi-inverse (I - M)^{-1} was requested at a point where the
    dominant eigenvalue of M is 1, i.e. on a pole of the series."""


class NotEntropic(TamelabError):
    """Entropy estimates from independent routes disagreed beyond
    tolerance, so no value can be reported honestly."""


class UnsupportedSource(TamelabError):
    """The requested analysis is not defined (or not implemented) for
    this source type."""


class IndistinguishableWords(TamelabError):
    """Two emitted words agreed on every symbol up to the comparison cap,
    so tree shapes over them are not well defined."""


class NoFixedPoint(TamelabError):
    """A composed inverse branch has no fixed point inside the unit
    interval, so its expansion rate is undefined."""
