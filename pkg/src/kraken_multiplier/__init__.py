"""Classic and default-insurance-note (Kraken) money multipliers.

>>> from kraken_multiplier import MultiplierParams, kraken_eval
>>> p = MultiplierParams(R=0.05, I=0.05, O=1.0, T=0.3, n=100, k=3)
>>> [round(m) for m in kraken_eval(p).values]
[24, 150, 824]
"""

from .errors import (
    DomainError,
    KrakenError,
    LedgerIntegrityError,
    MultiplierOverflowError,
    OracleBudgetError,
    SimulationBudgetError,
)
from .ledger import (
    BankState,
    EventKind,
    HaltReason,
    LedgerEvent,
    SimConfig,
    SimResult,
    empirical_curve,
    replay_ledger,
    run_simulation,
)
from .multiplier import (
    DerivedFactors,
    MultiplierCurve,
    MultiplierParams,
    SkipSpec,
    classic_curve,
    classic_limit,
    classic_series,
    derived_factors,
    din_ratio,
    din_ratio_skipped,
    geometric_sum,
    growth_factor,
    kraken_eval,
    kraken_nested_oracle,
    sweep,
)

__version__ = "0.1.0"
