"""Exception hierarchy shared across the package.

Domain errors (bad numeric inputs, infeasible problems) are kept separate
from configuration/IO errors so the CLI can map them to distinct exit codes.
"""


class DomainError(ValueError):
    """A numerically invalid input (non-finite data, out-of-range parameter)."""


class DescriptorError(DomainError):
    """A malformed constraint-set descriptor."""


class UnsupportedKindError(DescriptorError):
    """Operation not defined for this constraint kind (e.g. polar of a non-cone)."""


class NoSolutionError(DomainError):
    """The fixed-point equation has no solution for the given sample size."""


class ConfigError(Exception):
    """Unreadable or inconsistent experiment configuration."""
