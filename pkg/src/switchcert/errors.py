"""Exception types shared across the toolkit.

Everything raised on purpose derives from :class:`SwitchCertError` so callers
(and the CLI) can distinguish domain failures from programming errors.
"""

from __future__ import annotations


class SwitchCertError(Exception):
    """Base class for all toolkit-specific errors."""


class DimensionMismatch(SwitchCertError):
    """Matrix or vector shapes are inconsistent with each other."""


class NearDefective(SwitchCertError):
    """Eigenvalues too close for a numerically trustworthy eigenbasis."""


class SingularP(SwitchCertError):
    """A supplied basis matrix is singular (or numerically so)."""


class ReconstructionMismatch(SwitchCertError):
    """P J P^-1 does not reproduce the source matrix within tolerance."""


class NotAnEdge(SwitchCertError):
    """Referenced vertex pair is not an edge of the switching graph."""


class NotALoop(SwitchCertError):
    """A vertex path expected to close on itself does not."""


class TooManyLoops(SwitchCertError):
    """Simple-loop enumeration exceeded the configured bound."""


class InadmissibleSignal(SwitchCertError):
    """Switching signal violates graph edges or time monotonicity."""


class MissingInterval(SwitchCertError):
    """No dwell interval is stored for a required edge."""


class EmptyInterval(SwitchCertError):
    """A dwell interval has no interior."""


class ConditionViolated(SwitchCertError):
    """One or more edge norm conditions fail at the requested dwell times.

    ``failures`` lists ``(edge, norm_value)`` pairs.
    """

    def __init__(self, failures, message=None):
        self.failures = tuple(failures)
        if message is None:
            parts = ", ".join(
                "(%d,%d): %.6g" % (e[0], e[1], v) for e, v in self.failures
            )
            message = "edge condition >= 1 at " + parts
        super().__init__(message)


class SignalOutsideClass(SwitchCertError):
    """Signal dwell times leave the certified interval class."""


class NotHurwitz(SwitchCertError):
    """Operation requires a Hurwitz subsystem matrix."""


class BadLambdaStar(SwitchCertError):
    """Decay-rate parameter outside (spectral abscissa, 0)."""


class InfeasibleAssignment(SwitchCertError):
    """Scaling assignment cannot be folded into the decompositions."""


class DegenerateScaling(SwitchCertError):
    """A diagonal scaling entry is zero (or not finite)."""


class WrongDimension(SwitchCertError):
    """Planar routines received a non-2x2 quantity."""


class SignPatternUnsupported(SwitchCertError):
    """Diagonal feasibility test supports only saddle/anti-saddle patterns."""


class NotPlanar(SwitchCertError):
    """Planar analysis requested for a system that is not a planar 2-ring."""


class TooFewSamples(SwitchCertError):
    """Not enough switching samples for a meaningful fit."""


class ZeroState(SwitchCertError):
    """State norm hit zero; logarithmic fit undefined."""


class ParseError(SwitchCertError):
    """Input file is not syntactically valid."""


class DocumentInvalid(SwitchCertError):
    """Input parsed but violates the system-document schema."""
