"""Exception hierarchy shared by the library and the CLI."""


class KrakenError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KrakenError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class OracleBudgetError(KrakenError):
    """The brute-force nested summation would exceed its evaluation budget."""


class MultiplierOverflowError(KrakenError, OverflowError):
    """A multiplier left the representable floating-point range."""


class SimulationBudgetError(KrakenError):
    """A simulation produced more ledger events than its configured limit."""


class LedgerIntegrityError(KrakenError):
    """An event log is malformed: gaps, unknown kinds or negative balances."""
