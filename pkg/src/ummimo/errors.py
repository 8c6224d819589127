"""Exception taxonomy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class SingularityError(DomainError):
    """Evaluation point coincides with a field/impedance singularity."""


class ContractError(ValueError):
    """An input violates a structural precondition (shape, PSD, normalization)."""


class ConfigError(ValueError):
    """Experiment configuration is malformed or names unknown keys."""
