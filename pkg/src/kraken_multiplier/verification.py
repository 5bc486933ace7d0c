"""Self-contained verification of the library against the published values.

Every check is deterministic (fixed RNG seed) and needs no external data.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import fixtures as fx
from .ledger import SimConfig, run_simulation
from .multiplier import (
    MultiplierParams,
    classic_curve,
    classic_series,
    derived_factors,
    din_ratio,
    din_ratio_skipped,
    kraken_eval,
    kraken_nested_oracle,
)

DEFAULT_SEED = 20120301

HAND_EXPANDED_PARAMS = MultiplierParams(R=0.5, I=0.05, O=1.0, T=1.0, n=2, k=2)
# i1=1: 0.5 + 0.475 * 1.4625 ; i1=2: 0.25 + 0.2375 * 1.4625 ; inner = 0.975 + 0.4875
HAND_EXPANDED_VALUE = 1.79203125


@dataclass(frozen=True)
class CheckResult:
    name: str
    expected: float
    computed: float
    tolerance: float
    passed: bool
    note: str = ""

    @property
    def delta(self) -> float:
        return self.computed - self.expected


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b else abs(a - b)


def random_params(
    rng: random.Random,
    n_max: int,
    k_max: int,
    collapse: bool = False,
) -> MultiplierParams:
    """Random valid parameters; ``collapse`` forces ``(O - I) * T == 0``."""
    R = rng.uniform(0.01, 0.99)
    O = 1.0 + rng.choice([0.0, rng.uniform(0.0, 0.2)])  # noqa: E741
    I = rng.uniform(0.0, O)  # noqa: E741
    T = rng.uniform(0.0, 1.0)
    if collapse:
        if rng.random() < 0.5:
            T = 0.0
        else:
            I = O  # noqa: E741
    return MultiplierParams(
        R=R, I=I, O=O, T=T, n=rng.randint(1, n_max), k=rng.randint(1, k_max)
    )


def semilog_fit(levels: Sequence[int], values: Sequence[float]) -> tuple[float, float, float, float]:
    """Least-squares line through ``(level, log10 value)``.

    Returns ``(slope, intercept, r_squared, max_abs_residual)``.
    """
    x = np.asarray(levels, dtype=float)
    y = np.log10(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2, float(np.max(np.abs(resid)))


def check_tables(tables: Sequence[fx.PaperFixture] = fx.PAPER_TABLES) -> list[CheckResult]:
    out = []
    for table in tables:
        curve = kraken_eval(table.params)
        for k, expected in enumerate(table.expected, start=1):
            computed = curve[k]
            small = abs(expected) <= fx.TABLE_SMALL_ENTRY
            out.append(
                CheckResult(
                    name=f"table{table.table_id}.k{k}",
                    expected=float(expected),
                    computed=computed,
                    tolerance=fx.TABLE_ABS_TOL if small else fx.TABLE_REL_TOL,
                    passed=fx.table_entry_ok(expected, computed),
                    note="abs" if small else "rel",
                )
            )
    return out


def check_oracle(rng: random.Random, cases: int = 100) -> list[CheckResult]:
    worst = 0.0
    for _ in range(cases):
        p = random_params(rng, n_max=5, k_max=4)
        worst = max(worst, rel_err(kraken_nested_oracle(p), kraken_eval(p).final))
    hand_oracle = kraken_nested_oracle(HAND_EXPANDED_PARAMS)
    hand_eval = kraken_eval(HAND_EXPANDED_PARAMS).final
    hand_err = max(rel_err(hand_oracle, HAND_EXPANDED_VALUE), rel_err(hand_eval, HAND_EXPANDED_VALUE))
    return [
        CheckResult("oracle.randomized", 0.0, worst, 1e-12, worst <= 1e-12, f"{cases} cases, rel"),
        CheckResult("oracle.hand_n2_k2", HAND_EXPANDED_VALUE, hand_eval, 1e-12, hand_err <= 1e-12, "rel"),
    ]


def check_classic() -> list[CheckResult]:
    R = 0.05
    value = classic_series(R, 100)
    curve = classic_curve(R, 500).values
    bound = (1 - R) / R
    monotone = all(b > a for a, b in zip(curve, curve[1:]))
    bounded = all(v < bound for v in curve)
    saturating = bound - curve[-1] < 1e-6
    with_initial = classic_series(R, 500, include_initial_deposit=True)
    return [
        CheckResult("classic.series_R0.05_n100", 18.8875, value, 1e-3, abs(value - 18.8875) <= 1e-3),
        CheckResult(
            "classic.shape",
            bound,
            curve[-1],
            1e-6,
            monotone and bounded and saturating,
            "monotone, below (1-R)/R, saturating",
        ),
        CheckResult(
            "classic.include_initial_deposit",
            1 / R,
            with_initial,
            1e-6,
            with_initial < 1 / R and 1 / R - with_initial < 1e-6,
        ),
    ]


def check_semilog() -> list[CheckResult]:
    out = []
    for R in fx.FIGURE3_RESERVES:
        p = fx.FIGURE3_BASE.with_(R=R)
        curve = kraken_eval(p)
        _, _, r2, _ = semilog_fit(curve.levels[2:], curve.values[2:])
        out.append(CheckResult(f"semilog.r2_R{R:g}", 1.0, r2, 1e-4, r2 >= 0.9999))
        growth = derived_factors(p).growth
        ratio = curve[10] / curve[9]
        out.append(
            CheckResult(f"semilog.ratio_R{R:g}", growth, ratio, 1e-3, rel_err(ratio, growth) <= 1e-3, "rel")
        )
    return out


def check_din_ratios() -> list[CheckResult]:
    r6 = din_ratio(**fx.EQ6_PRESET)
    r7 = din_ratio_skipped(**fx.EQ7_PRESET)
    return [
        CheckResult("din_ratio.eq6", fx.EQ6_PUBLISHED, r6, fx.EQ6_TOLERANCE,
                    abs(r6 - fx.EQ6_PUBLISHED) <= fx.EQ6_TOLERANCE),
        CheckResult("din_ratio.eq7", fx.EQ7_PUBLISHED, r7, fx.EQ7_TOLERANCE,
                    abs(r7 - fx.EQ7_PUBLISHED) <= fx.EQ7_TOLERANCE),
    ]


def check_simulator(rng: random.Random, cases: int = 50) -> list[CheckResult]:
    worst = 0.0
    for _ in range(cases):
        p = random_params(rng, n_max=50, k_max=5)
        result = run_simulation(SimConfig(p, seed_capital=rng.uniform(0.5, 1000.0)))
        worst = max(worst, rel_err(result.empirical_multiplier, kraken_eval(p).final))
    return [CheckResult("simulator.equivalence", 0.0, worst, 1e-9, worst <= 1e-9, f"{cases} cases, rel")]


def check_collapse(rng: random.Random, cases: int = 1000) -> list[CheckResult]:
    worst = 0.0
    for _ in range(cases):
        p = random_params(rng, n_max=200, k_max=10, collapse=True)
        base = classic_series(p.R, p.n)
        worst = max(worst, max(rel_err(v, base) for v in kraken_eval(p).values))
    return [CheckResult("collapse", 0.0, worst, 1e-12, worst <= 1e-12, f"{cases} cases, rel")]


def run_verification(
    tables: Sequence[fx.PaperFixture] = fx.PAPER_TABLES, seed: int = DEFAULT_SEED
) -> list[CheckResult]:
    rng = random.Random(seed)
    groups: list[Callable[[], list[CheckResult]]] = [
        lambda: check_tables(tables),
        lambda: check_oracle(rng),
        check_classic,
        check_semilog,
        check_din_ratios,
        lambda: check_simulator(rng),
        lambda: check_collapse(rng),
    ]
    results: list[CheckResult] = []
    for group in groups:
        results.extend(group())
    return results


def corrupt_fixture(
    tables: Sequence[fx.PaperFixture], table_id: int, k: int, factor: float = 2.0
) -> tuple[fx.PaperFixture, ...]:
    """Copy of ``tables`` with one expected entry scaled by ``factor`` (failure-path testing)."""
    out = []
    for t in tables:
        if t.table_id == table_id:
            expected = list(t.expected)
            expected[k - 1] = int(math.floor(expected[k - 1] * factor))
            t = fx.PaperFixture(t.table_id, t.params, tuple(expected))
        out.append(t)
    return tuple(out)
