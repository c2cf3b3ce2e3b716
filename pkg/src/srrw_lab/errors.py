"""Exception taxonomy shared across the package."""


class SrrwError(ValueError):
    """Base class for all srrw_lab errors."""


class ParameterError(SrrwError):
    """A numeric parameter is outside its supported range."""


class CapacityError(SrrwError):
    """A request exceeds a documented size cap (group order, enumeration bound, ...)."""


class DomainError(SrrwError):
    """An input violates a mathematical precondition (empty set, zero entry, ...)."""


class ContractError(SrrwError):
    """Caller broke an API contract (e.g. missing spin for a non-isolated cluster root)."""


class ReducibilityError(SrrwError):
    """The step distribution does not yield an irreducible aperiodic chain."""


class SchemaError(SrrwError):
    """Experiment config failed validation; carries one message per offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
