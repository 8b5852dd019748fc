"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class RuinError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class NoDrift(RuinError):
    """Expected one-step increment is not positive; ruin is certain."""

    exit_code = 3


class InfiniteMoment(RuinError):
    exit_code = 4


class NoCertificate(RuinError):
    """No m-step absorption lower bound found; fixpoint uniqueness not established."""

    exit_code = 5


class ResidualTooLarge(RuinError):
    exit_code = 6


class ValidationFailed(RuinError):
    exit_code = 7


class NoLundbergCoefficient(RuinError):
    """The Laplace transform of the increment diverges for every t > 0."""

    exit_code = 8


class ToleranceNotMet(RuinError):
    exit_code = 9


class SingularSystem(RuinError):
    exit_code = 10


class GridTooCoarse(RuinError):
    exit_code = 11


class PositiveMassAtZeroPremium(RuinError):
    """F_G(0) > 0: the interest-model tail term cannot vanish as j grows."""

    exit_code = 12


class NonConvergent(RuinError):
    exit_code = 13


class NoDensity(RuinError):
    exit_code = 14


class ConfigError(RuinError):
    exit_code = 2
