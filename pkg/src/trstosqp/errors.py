"""Exception types raised by the solver stack."""


class ContractViolation(ValueError):
    """An operation was called with inputs outside its documented domain."""


class ConfigurationError(ValueError):
    """Invalid solver, noise, or experiment configuration."""


class CapabilityError(RuntimeError):
    """The problem lacks an oracle required by the requested feature."""


class RankDeficiencyError(RuntimeError):
    """The constraint Jacobian is (numerically) rank deficient."""


class MeritLoopError(RuntimeError):
    """The merit-parameter loop failed to terminate."""


class InvariantViolation(AssertionError):
    """A per-iteration runtime invariant failed."""


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; carries the offending line number."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
