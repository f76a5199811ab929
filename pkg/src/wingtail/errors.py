"""Exception hierarchy shared by every wingtail module."""


class WingtailError(Exception):
    """Base class for all library errors."""


class OutOfBounds(WingtailError):
    """A price violates the static no-arbitrage bracket."""


class NonConvergence(WingtailError):
    """An iterative solver exhausted its iteration budget."""


class BracketingError(WingtailError):
    """No sign change could be bracketed for a root search."""


class DomainError(WingtailError):
    """An argument lies outside the domain on which a formula is defined."""


class RegimeError(WingtailError):
    """An asymptotic formula was requested outside its regime guard."""


class DegenerateWing(WingtailError):
    """The critical moment does not move with maturity, so the wing slope vanishes."""


class DegenerateSlope(WingtailError):
    """An SVI wing slope makes the critical moment undefined."""


class NegativeDiscriminant(WingtailError):
    """The implied-variance square root would be taken of a negative number."""


class ExtrapolationUnstable(WingtailError):
    """Successive Richardson stages disagree beyond tolerance."""


class QuadratureNonConvergence(WingtailError):
    """Adaptive quadrature failed to settle."""


class DenominatorVanished(WingtailError):
    """A finite-difference denominator fell below its floor."""


class EdgeOfGrid(WingtailError):
    """A finite-difference stencil would leave the price grid."""
