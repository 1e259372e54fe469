"""Exception types shared across the solver engines."""


class EpibvpError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(EpibvpError):
    """Invalid or inconsistent run configuration."""


class NegativeExponent(EpibvpError):
    """An operation would produce a term t^p with p < 0.

    Raised by the division by t^2 when the input series has mass below t^2,
    i.e. a seed that violates u(0) = 0, u ~ c t near the origin.
    """


class DomainError(EpibvpError):
    """Evaluation point outside the series' domain (t < 0)."""


class OutOfValidity(EpibvpError):
    """Shift parameter k outside the kernel's validity range."""


class NoRealRoot(EpibvpError):
    """The constant equation F(c) = 0 has no real root in the bracket.

    Signals nonexistence of solution branches (lambda above critical).
    """


class BracketFailure(EpibvpError):
    """Bisection bracket does not straddle the existence boundary."""


class NoAdmissibleSeed(EpibvpError):
    """No seed constant C satisfies the admissibility constraints for lambda."""


class OrderingViolation(EpibvpError):
    """Monotone iterates broke the ordering chain beyond tolerance."""
