"""Money multipliers for reserve banking with and without default insurance notes.

Symbols follow the usual banking shorthand:

``R``  reserve fraction retained at each deposit
``I``  price of the default insurance note (DIN) as a fraction of insured value
``O``  one plus the origination fee fraction ("points")
``T``  tranche fraction of each loan that is insured
``n``  deposit -> loan iterations per generation
``k``  number of nested DIN generations

The nested multiplier is a k-deep product of summations.  Because the inner
summation does not depend on the outer summation index it factors into the
first-order recurrence ``m_j = A * (1 + c * m_{j-1})`` with ``m_0 = 1``, where
``A`` is the finite geometric deposit sum and ``c = (O - I) * T``.
:func:`kraken_eval` uses the recurrence; :func:`kraken_nested_oracle` evaluates
the summation literally and exists to check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from numbers import Integral, Real
from typing import Iterable, Sequence

from .errors import DomainError, MultiplierOverflowError, OracleBudgetError

__all__ = [
    "MultiplierParams",
    "DerivedFactors",
    "MultiplierCurve",
    "SkipSpec",
    "ORACLE_BUDGET",
    "SWEEP_AXES",
    "classic_limit",
    "classic_series",
    "classic_curve",
    "geometric_sum",
    "derived_factors",
    "kraken_nested_oracle",
    "kraken_eval",
    "growth_factor",
    "din_ratio",
    "din_ratio_skipped",
    "sweep",
]

#: Largest ``n ** k`` the literal nested evaluation will attempt.
ORACLE_BUDGET = 10**7

SWEEP_AXES = ("R", "I", "O", "T", "n", "k")


def _real(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def _count(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _reserve(R, allow_full: bool = False) -> float:
    R = _real("R", R)
    upper_ok = R <= 1.0 if allow_full else R < 1.0
    if not (R > 0.0 and upper_ok):
        bound = "(0, 1]" if allow_full else "(0, 1)"
        raise DomainError(f"reserve fraction R must lie in {bound}, got {R}")
    return R


@dataclass(frozen=True)
class MultiplierParams:
    """Full parameter vector of the nested DIN multiplier."""

    R: float
    I: float  # noqa: E741
    O: float  # noqa: E741
    T: float
    n: int
    k: int

    def __post_init__(self):
        R = _reserve(self.R)
        I = _real("I", self.I)  # noqa: E741
        O = _real("O", self.O)  # noqa: E741
        T = _real("T", self.T)
        n = _count("n", self.n)
        k = _count("k", self.k)
        if O < 1.0:
            raise DomainError(f"O must be >= 1, got {O}")
        if not 0.0 <= I <= O:
            raise DomainError(f"I must satisfy 0 <= I <= O, got I={I}, O={O}")
        if not 0.0 <= T <= 1.0:
            raise DomainError(f"T must lie in [0, 1], got {T}")
        for name, value in zip("RIOTnk", (R, I, O, T, n, k)):
            object.__setattr__(self, name, value)

    @property
    def coupling(self) -> float:
        return (self.O - self.I) * self.T

    def with_(self, **changes) -> "MultiplierParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DerivedFactors:
    """Per-generation deposit sum ``A`` and DIN coupling ``c``."""

    A: float
    c: float

    @property
    def growth(self) -> float:
        return self.A * self.c


@dataclass(frozen=True)
class SkipSpec:
    """Iteration window ``s..n`` of loans that are not themselves DIN insured."""

    s: int
    n: int

    def __post_init__(self):
        s = _count("s", self.s)
        n = _count("n", self.n)
        if s > n:
            raise DomainError(f"skip window requires s <= n, got s={s}, n={n}")


@dataclass(frozen=True)
class MultiplierCurve:
    """Multiplier per level (iteration count or nesting depth), levels from 1.

    ``log_values`` holds natural logs when the curve was produced in log space;
    ``values`` may then contain ``inf`` where the multiplier overflows.
    """

    levels: tuple[int, ...]
    values: tuple[float, ...]
    log_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.levels) != len(self.values):
            raise ValueError("levels and values differ in length")
        if self.log_values is not None and len(self.log_values) != len(self.values):
            raise ValueError("log_values and values differ in length")
        if list(self.levels) != list(range(1, len(self.levels) + 1)):
            raise ValueError("levels must run 1, 2, 3, ... without gaps")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, level: int) -> float:
        """Multiplier at ``level`` (1-based, like the tables)."""
        if not 1 <= level <= len(self.values):
            raise IndexError(level)
        return self.values[level - 1]

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.levels, self.values))

    @property
    def final(self) -> float:
        return self.values[-1]

    def log10(self) -> list[float]:
        if self.log_values is not None:
            return [v / math.log(10.0) for v in self.log_values]
        return [math.log10(v) if v > 0 else -math.inf for v in self.values]


def classic_limit(R: float) -> float:
    """Textbook reserve multiplier ``1/R``; ``R = 1`` (full reserve) is allowed."""
    return 1.0 / _reserve(R, allow_full=True)


def geometric_sum(R: float, n: int) -> float:
    """Closed form of ``sum((1-R)**i for i in 1..n)``."""
    R = _reserve(R)
    n = _count("n", n)
    q = 1.0 - R
    # expm1/log1p keep precision when (1-R)**n is close to 1
    return -q * math.expm1(n * math.log1p(-R)) / R


def classic_series(R: float, n: int, include_initial_deposit: bool = False) -> float:
    """Partial sum of the classic deposit series, summed term by term.

    The series starts at ``i = 1`` and so tends to ``(1-R)/R``.  With
    ``include_initial_deposit`` the originating deposit is counted as well and
    the limit becomes ``1/R``.
    """
    R = _reserve(R)
    n = _count("n", n)
    q = 1.0 - R
    total = math.fsum(q**i for i in range(1, n + 1))
    return total + 1.0 if include_initial_deposit else total


def classic_curve(
    R: float, n_max: int, include_initial_deposit: bool = False
) -> MultiplierCurve:
    R = _reserve(R)
    n_max = _count("n_max", n_max)
    q = 1.0 - R
    offset = 1.0 if include_initial_deposit else 0.0
    values = []
    total = 0.0
    for i in range(1, n_max + 1):
        total += q**i
        values.append(total + offset)
    return MultiplierCurve(tuple(range(1, n_max + 1)), tuple(values))


def derived_factors(params: MultiplierParams) -> DerivedFactors:
    return DerivedFactors(A=geometric_sum(params.R, params.n), c=params.coupling)


def kraken_nested_oracle(params: MultiplierParams, budget: int = ORACLE_BUDGET) -> float:
    """Evaluate the k-deep nested summation literally.

    Each outer term re-evaluates the full inner summation, so the cost grows
    as ``n**k``; this is deliberate.  The deepest summation multiplies 1.
    """
    if not isinstance(params, MultiplierParams):
        raise DomainError("params must be a MultiplierParams instance")
    if params.n**params.k > budget:
        raise OracleBudgetError(
            f"n**k = {params.n}**{params.k} exceeds the oracle budget of {budget}"
        )
    q = 1.0 - params.R
    fee_net = params.O - params.I
    T = params.T

    def level(depth: int) -> float:
        total = 0.0
        for i in range(1, params.n + 1):
            deposit = q**i
            inner = 1.0 if depth == params.k else level(depth + 1)
            total += deposit + (deposit * fee_net * T) * inner
        return total

    return level(1)


def kraken_eval(params: MultiplierParams, log_space: bool = False) -> MultiplierCurve:
    """Multipliers ``m_1 .. m_k`` of the nested DIN summation.

    Raises :class:`MultiplierOverflowError` when a value overflows; pass
    ``log_space=True`` to carry ``log m`` instead, which never overflows.
    """
    if not isinstance(params, MultiplierParams):
        raise DomainError("params must be a MultiplierParams instance")
    A = geometric_sum(params.R, params.n)
    c = params.coupling
    levels = tuple(range(1, params.k + 1))

    if log_space:
        log_A = math.log(A)
        log_c = math.log(c) if c > 0 else -math.inf
        logs = []
        log_m = 0.0
        for _ in levels:
            log_m = log_A + (0.0 if c == 0 else _log1p_exp(log_c + log_m))
            logs.append(log_m)
        values = tuple(math.exp(v) if v < 709.78 else math.inf for v in logs)
        return MultiplierCurve(levels, values, tuple(logs))

    values = []
    m = 1.0
    for j in levels:
        m = A * (1.0 + c * m)
        if not math.isfinite(m):
            raise MultiplierOverflowError(
                f"multiplier overflowed at level {j}; use log_space=True"
            )
        values.append(m)
    return MultiplierCurve(levels, tuple(values))


def _log1p_exp(x: float) -> float:
    """``log(1 + exp(x))`` without overflow."""
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def growth_factor(params: MultiplierParams) -> float:
    """Asymptotic ratio ``m_{j+1} / m_j``, equal to ``A * c``.

    Values above 1 mean the multiplier diverges exponentially in depth; below
    1 it converges to ``A / (1 - A*c)``.
    """
    factors = derived_factors(params)
    if factors.c == 0:
        raise DomainError("coupling (O - I) * T is zero: nesting adds nothing, no growth")
    return factors.growth


def din_ratio(O: float, I: float, T: float) -> float:  # noqa: E741
    """Ratio of DIN capital to new deposit creation when every loan is insured."""
    O, I, T = _real("O", O), _real("I", I), _real("T", T)  # noqa: E741
    denom = (O - I) * T
    if not (O > I and T > 0) or denom <= 0:
        raise DomainError(f"(O - I) * T must be positive, got {denom}")
    return 1.0 / denom


def din_ratio_skipped(O: float, I: float, R: float, skip: SkipSpec) -> float:  # noqa: E741
    """Same ratio when the loans in iterations ``skip.s..skip.n`` are not insured."""
    O, I = _real("O", O), _real("I", I)  # noqa: E741
    R = _reserve(R)
    if not isinstance(skip, SkipSpec):
        raise DomainError("skip must be a SkipSpec")
    if not O > I:
        raise DomainError(f"O must exceed I, got O={O}, I={I}")
    q = 1.0 - R
    uninsured = math.fsum(q**i for i in range(skip.s, skip.n + 1))
    return 1.0 / ((O - I) + uninsured)


def sweep(
    base: MultiplierParams, axis: str, values: Iterable[float]
) -> list[tuple[float, MultiplierCurve]]:
    """Evaluate :func:`kraken_eval` once per value of one parameter, in input order."""
    if axis not in SWEEP_AXES:
        raise DomainError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    values = list(values)
    # every parameter set is validated before any evaluation
    param_sets = [base.with_(**{axis: v}) for v in values]
    return [(v, kraken_eval(p)) for v, p in zip(values, param_sets)]


def curve_ratios(curve: MultiplierCurve) -> Sequence[float]:
    """Successive ratios ``m_{j+1} / m_j``."""
    v = curve.values
    return [b / a for a, b in zip(v, v[1:])]
