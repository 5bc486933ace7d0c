"""Transaction-level simulation of DIN-backed lending.

One representative bank lends out each deposit less its reserve, the loan is
redeposited, and the cycle repeats ``n`` times per generation.  Every loan
(unless skipped) buys a default insurance note on its insured tranche; the
insured value plus fees minus the premium is booked as synthetic capital,
which seeds the next generation.  At the deepest generation the synthetic
capital is lent out once and not redeposited.

Within a generation all ``n`` iterations run before the next generation
starts, so the event stream is a deterministic function of the config and
the number of events grows as ``k * n`` rather than ``n ** k``.

All balances are derived by folding events through :meth:`BankState.apply`;
the simulator and :func:`replay_ledger` share that fold, so a replay
reproduces the final state bit for bit.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Iterator

from .errors import DomainError, LedgerIntegrityError, SimulationBudgetError
from .multiplier import MultiplierCurve, MultiplierParams, _count, _real

__all__ = [
    "EventKind",
    "LedgerEvent",
    "BankState",
    "SimConfig",
    "SimResult",
    "HaltReason",
    "EVENT_COLUMNS",
    "run_simulation",
    "replay_ledger",
    "empirical_curve",
    "events_to_csv",
    "events_from_csv",
    "events_to_json",
    "events_from_json",
]

EVENT_COLUMNS = ("seq", "kind", "amount", "level", "iteration")

DEFAULT_MAX_EVENTS = 2_000_000


class EventKind(str, enum.Enum):
    SEED_DEPOSIT = "SeedDeposit"
    RESERVE_SET_ASIDE = "ReserveSetAside"
    LOAN_ISSUED = "LoanIssued"
    REDEPOSIT = "Redeposit"
    LEAK = "Leak"
    PREMIUM_PAID = "PremiumPaid"
    FEE_COLLECTED = "FeeCollected"
    SYNTHETIC_CAPITAL_BOOKED = "SyntheticCapitalBooked"


class HaltReason(str, enum.Enum):
    DEPTH = "depth"
    MIN_LOAN = "min_loan"
    CAP = "synthetic_capital_cap"
    EXHAUSTED = "no_synthetic_capital"


@dataclass(frozen=True)
class LedgerEvent:
    seq: int
    kind: EventKind
    amount: float
    level: int
    iteration: int

    def as_row(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind.value,
            "amount": self.amount,
            "level": self.level,
            "iteration": self.iteration,
        }


@dataclass
class BankState:
    reserves: float = 0.0
    deposits: float = 0.0
    loans_outstanding: float = 0.0
    synthetic_capital: float = 0.0
    insured_notional: float = 0.0
    premiums_paid: float = 0.0
    fees_collected: float = 0.0

    def apply(self, event: LedgerEvent) -> None:
        kind, amount = event.kind, event.amount
        if kind is EventKind.SEED_DEPOSIT or kind is EventKind.REDEPOSIT:
            self.deposits += amount
        elif kind is EventKind.LEAK:
            self.deposits -= amount
        elif kind is EventKind.RESERVE_SET_ASIDE:
            self.reserves += amount
        elif kind is EventKind.LOAN_ISSUED:
            self.loans_outstanding += amount
        elif kind is EventKind.PREMIUM_PAID:
            self.premiums_paid += amount
        elif kind is EventKind.FEE_COLLECTED:
            self.fees_collected += amount
        elif kind is EventKind.SYNTHETIC_CAPITAL_BOOKED:
            self.synthetic_capital += amount
            # insured value = booked capital + premium - fee, cumulatively
            self.insured_notional = (
                self.synthetic_capital + self.premiums_paid - self.fees_collected
            )
        else:  # pragma: no cover - EventKind is closed
            raise LedgerIntegrityError(f"unknown event kind {kind!r}")

    def negative_fields(self) -> list[str]:
        return [name for name, value in asdict(self).items() if value < 0]

    def copy(self) -> "BankState":
        return replace(self)


@dataclass(frozen=True)
class SimConfig:
    params: MultiplierParams
    seed_capital: float = 1.0
    leak: float = 0.0
    skip_insurance_every: int | None = None
    min_loan: float = 0.0
    synthetic_capital_cap: float | None = None
    max_events: int = DEFAULT_MAX_EVENTS

    def __post_init__(self):
        if not isinstance(self.params, MultiplierParams):
            raise DomainError("params must be a MultiplierParams instance")
        seed = _real("seed_capital", self.seed_capital)
        leak = _real("leak", self.leak)
        min_loan = _real("min_loan", self.min_loan)
        if seed <= 0:
            raise DomainError(f"seed_capital must be positive, got {seed}")
        if not 0.0 <= leak < 1.0:
            raise DomainError(f"leak must lie in [0, 1), got {leak}")
        if min_loan < 0:
            raise DomainError(f"min_loan must be >= 0, got {min_loan}")
        if self.skip_insurance_every is not None:
            _count("skip_insurance_every", self.skip_insurance_every)
        if self.synthetic_capital_cap is not None:
            cap = _real("synthetic_capital_cap", self.synthetic_capital_cap)
            if cap < 0:
                raise DomainError(f"synthetic_capital_cap must be >= 0, got {cap}")
        _count("max_events", self.max_events)
        object.__setattr__(self, "seed_capital", seed)
        object.__setattr__(self, "leak", leak)
        object.__setattr__(self, "min_loan", min_loan)

    @property
    def frictionless(self) -> bool:
        return (
            self.leak == 0
            and self.skip_insurance_every is None
            and self.min_loan == 0
            and self.synthetic_capital_cap is None
        )

    def with_depth(self, k: int) -> "SimConfig":
        return replace(self, params=self.params.with_(k=k))


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    final_state: BankState
    events: tuple[LedgerEvent, ...]
    empirical_multiplier: float
    level_multipliers: tuple[float, ...]
    levels_completed: int
    halt_reason: HaltReason

    def __post_init__(self):
        object.__setattr__(self, "final_state", self.final_state.copy())


class _Recorder:
    def __init__(self, max_events: int):
        self.state = BankState()
        self.events: list[LedgerEvent] = []
        self.max_events = max_events

    def emit(self, kind: EventKind, amount: float, level: int, iteration: int) -> float:
        if len(self.events) >= self.max_events:
            raise SimulationBudgetError(
                f"simulation exceeded the event budget of {self.max_events}"
            )
        event = LedgerEvent(len(self.events) + 1, kind, amount, level, iteration)
        self.state.apply(event)
        self.events.append(event)
        return amount


def run_simulation(config: SimConfig) -> SimResult:
    """Run the lending cascade and return its ledger and empirical multiplier.

    Without frictions the empirical multiplier equals the analytic nested
    multiplier ``kraken_eval(config.params).final``.
    """
    if not isinstance(config, SimConfig):
        raise DomainError("config must be a SimConfig")
    p = config.params
    R, T = p.R, p.T
    premium_rate, fee_rate = p.I * T, (p.O - 1.0) * T
    capital_rate = (p.O - p.I) * T
    insure = T > 0
    cap = (
        None
        if config.synthetic_capital_cap is None
        else config.synthetic_capital_cap * config.seed_capital
    )

    rec = _Recorder(config.max_events)
    emit = rec.emit
    level_loans: list[float] = []
    halt = HaltReason.DEPTH
    seed = config.seed_capital
    completed = 0

    for level in range(1, p.k + 1):
        deepest = level == p.k
        emit(EventKind.SEED_DEPOSIT, seed, level, 0)
        loans_here = 0.0
        next_seed = 0.0
        incoming = seed
        issued_any = False
        for it in range(1, p.n + 1):
            if it > 1:
                emit(EventKind.REDEPOSIT, incoming, level, it)
            if config.leak:
                incoming -= emit(EventKind.LEAK, incoming * config.leak, level, it)
            loan = (1.0 - R) * incoming
            if loan < config.min_loan:
                break
            emit(EventKind.RESERVE_SET_ASIDE, R * incoming, level, it)
            loans_here += emit(EventKind.LOAN_ISSUED, loan, level, it)
            issued_any = True
            skipped = (
                config.skip_insurance_every is not None
                and it % config.skip_insurance_every == 0
            )
            if insure and not skipped and halt is not HaltReason.CAP:
                capital = capital_rate * loan
                if cap is not None and rec.state.synthetic_capital + capital > cap:
                    halt = HaltReason.CAP
                else:
                    emit(EventKind.PREMIUM_PAID, premium_rate * loan, level, it)
                    emit(EventKind.FEE_COLLECTED, fee_rate * loan, level, it)
                    emit(EventKind.SYNTHETIC_CAPITAL_BOOKED, capital, level, it)
                    if deepest:
                        # synthetic capital is lent once; the cascade stops here
                        loans_here += emit(EventKind.LOAN_ISSUED, capital, level, it)
                    else:
                        next_seed += capital
            incoming = loan
        if not issued_any:
            halt = HaltReason.MIN_LOAN
            break
        level_loans.append(loans_here)
        completed = level
        if halt is HaltReason.CAP:
            break
        if not deepest and next_seed == 0.0:
            halt = HaltReason.EXHAUSTED
            break
        seed = next_seed

    level_multipliers = tuple(x / config.seed_capital for x in level_loans)
    return SimResult(
        config=config,
        final_state=rec.state,
        events=tuple(rec.events),
        empirical_multiplier=rec.state.loans_outstanding / config.seed_capital,
        level_multipliers=level_multipliers,
        levels_completed=completed,
        halt_reason=halt,
    )


def replay_ledger(events: Iterable[LedgerEvent]) -> BankState:
    """Fold an event log into the bank state it describes.

    Raises :class:`LedgerIntegrityError` on sequence gaps, unknown kinds,
    negative or non-finite amounts, and negative running balances.
    """
    state = BankState()
    expected = 1
    for event in events:
        if event.seq != expected:
            raise LedgerIntegrityError(f"expected seq {expected}, got {event.seq}")
        if not isinstance(event.kind, EventKind):
            raise LedgerIntegrityError(f"unknown event kind {event.kind!r} at seq {event.seq}")
        if not (math.isfinite(event.amount) and event.amount >= 0):
            raise LedgerIntegrityError(f"invalid amount {event.amount!r} at seq {event.seq}")
        state.apply(event)
        negative = state.negative_fields()
        if negative:
            raise LedgerIntegrityError(
                f"negative balance in {', '.join(negative)} after seq {event.seq}"
            )
        expected += 1
    return state


def empirical_curve(config: SimConfig) -> MultiplierCurve:
    """Empirical multiplier for every depth 1..k of ``config``."""
    values = tuple(
        run_simulation(config.with_depth(j)).empirical_multiplier
        for j in range(1, config.params.k + 1)
    )
    return MultiplierCurve(tuple(range(1, len(values) + 1)), values)


def _parse_kind(raw: str) -> EventKind:
    try:
        return EventKind(raw)
    except ValueError:
        raise LedgerIntegrityError(f"unknown event kind {raw!r}") from None


def _event_from_row(row: dict) -> LedgerEvent:
    try:
        return LedgerEvent(
            seq=int(row["seq"]),
            kind=_parse_kind(row["kind"]),
            amount=float(row["amount"]),
            level=int(row["level"]),
            iteration=int(row["iteration"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise LedgerIntegrityError(f"malformed event row {row!r}: {exc}") from None


def events_to_csv(events: Iterable[LedgerEvent], stream: io.TextIOBase | None = None) -> str:
    buf = stream if stream is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EVENT_COLUMNS)
    for e in events:
        writer.writerow([e.seq, e.kind.value, repr(e.amount), e.level, e.iteration])
    return buf.getvalue() if stream is None else ""


def events_from_csv(text: str) -> list[LedgerEvent]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != EVENT_COLUMNS:
        raise LedgerIntegrityError(f"unexpected event columns {reader.fieldnames}")
    return [_event_from_row(row) for row in reader]


def events_to_json(events: Iterable[LedgerEvent]) -> str:
    return json.dumps([e.as_row() for e in events])


def events_from_json(text: str) -> list[LedgerEvent]:
    rows = json.loads(text)
    if not isinstance(rows, list):
        raise LedgerIntegrityError("event log JSON must be an array of objects")
    return [_event_from_row(row) for row in rows]


def iter_loans(events: Iterable[LedgerEvent]) -> Iterator[LedgerEvent]:
    return (e for e in events if e.kind is EventKind.LOAN_ISSUED)
