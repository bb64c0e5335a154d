"""
Experiment layer for hardyseq.
Orchestrates scaling scans of W and C_s, the adjacent-correlation counterexample
and the discrepancy links, fanning per-N work out to a thread pool.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from analysis.discrepancy import discrepancy_1d, discrepancy_md, function_point_set
from analysis.expsum import PHASE_ERROR
from analysis.measures import (
    CorrelationMode,
    correlation_measure,
    correlation_sum,
    parse_mode,
    progression_sum,
    well_distribution,
)
from analysis.vaaler import build_vaaler, eval_A, eval_B
from config import EXPERIMENT_CONFIG
from errors import ConstraintViolation, InputError, NotSubpolynomialType
from hardy.hfunc import SubpolyFunction, classify_type, growth_exponent, parse_function
from hardy.precision import DEFAULT_POLICY, PrecisionPolicy, eval_frac_batch
from hardy.seqgen import generate_sequence
from numeric_config import CONFIG
from utils.fit_utils import ScalingFit, fit_exponent, running_slopes
from utils.io_utils import witness_json

logger = logging.getLogger(__name__)


@dataclass
class ScanResult:
    measure: str
    source: str
    witnesses: list
    table: pd.DataFrame
    fit: ScalingFit | None
    in_regime: bool
    notes: list[str] = field(default_factory=list)

    @property
    def sublinear(self) -> bool:
        return self.fit is not None and bool(self.fit.slope <= EXPERIMENT_CONFIG["sublinear_slope_max"])

    def within_prediction(self, exponent: float) -> bool:
        """Fitted slope no larger than a predicted exponent plus the fit margin."""
        return self.fit is not None and bool(self.fit.slope <= exponent + EXPERIMENT_CONFIG["fit_margin"])


def dyadic_grid(lo: int, hi: int) -> list[int]:
    """Powers of two in [lo, hi]."""
    if lo < 1 or hi < lo:
        raise InputError(f"bad grid bounds {lo}..{hi}")
    start = math.ceil(math.log2(lo))
    return [2**k for k in range(start, int(math.log2(hi)) + 1) if lo <= 2**k <= hi]


def parse_grid(text: str) -> list[int]:
    """``N1..N2`` (powers of two in between) or a comma-separated list."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            grid = dyadic_grid(int(float(lo)), int(float(hi)))
        else:
            grid = sorted({int(float(part)) for part in text.split(",") if part.strip()})
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}; use N1..N2 or a comma list") from None
    if not grid or grid[0] < 1:
        raise InputError(f"grid {text!r} selects no positive N")
    return grid


def _map_ordered(fn, items, workers: int | None):
    workers = workers or CONFIG["workers"]
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def _scan_table(witnesses: list, Ns: list[int]) -> tuple[pd.DataFrame, ScalingFit | None]:
    values = [w.value for w in witnesses]
    table = pd.DataFrame(
        {
            "N": Ns,
            "value": values,
            "slope_running": running_slopes(Ns, values),
            "witness_json": [witness_json(w.to_record(N)) for w, N in zip(witnesses, Ns)],
        },
        columns=EXPERIMENT_CONFIG["csv_columns"],
    )
    fit = None
    if len(Ns) >= EXPERIMENT_CONFIG["min_fit_points"]:
        fit = fit_exponent(zip(Ns, values))
    return table, fit


def scan_w(
    f: SubpolyFunction,
    N_grid: list[int],
    a_cap: int | None = None,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    workers: int | None = None,
) -> ScanResult:
    """W(E_N) over the grid; one sequence at max N, prefixes for the rest."""
    Ns = sorted(N_grid)
    notes = []
    try:
        classify_type(f)
        in_regime = True
    except NotSubpolynomialType as e:
        in_regime = False
        notes.append(str(e))
        logger.warning("scan_w on a control function outside the theorem: %s", e)
    logger.info("scan_w: f=%s, N in %s, a_cap=%s", f, Ns, a_cap)
    E = generate_sequence(f, Ns[-1], policy, workers)

    def measure(N: int):
        witness = well_distribution(E.prefix(N), None if a_cap is None else min(a_cap, N))
        logger.info("W(E_%d) = %d", N, witness.value)
        return witness

    witnesses = _map_ordered(measure, Ns, workers)
    table, fit = _scan_table(witnesses, Ns)
    return ScanResult("W", str(f), witnesses, table, fit, in_regime, notes)


def scan_c(
    f: SubpolyFunction,
    s: int,
    N_grid: list[int],
    mode: CorrelationMode | str = CorrelationMode(),
    policy: PrecisionPolicy = DEFAULT_POLICY,
    workers: int | None = None,
) -> ScanResult:
    """C_s(E_N) over the grid, flagging whether 2 <= s < beta + 1 for a type x^(l+) function."""
    if isinstance(mode, str):
        mode = parse_mode(mode)
    Ns = sorted(N_grid)
    notes = []
    beta = growth_exponent(f).beta
    try:
        classify_type(f)
        typed = True
    except NotSubpolynomialType as e:
        typed = False
        notes.append(str(e))
    in_regime = typed and 2 <= s < beta + 1
    if not in_regime:
        notes.append(f"s={s} outside 2 <= s < beta + 1 = {beta + 1:g}" if typed else "not of type x^(l+)")
        logger.warning("scan_c: %s is out of regime (%s)", f, "; ".join(notes))
    logger.info("scan_c: f=%s, s=%d, mode=%s, N in %s", f, s, mode, Ns)
    E = generate_sequence(f, Ns[-1], policy, workers)

    def measure(N: int):
        witness = correlation_measure(E.prefix(N), s, mode)
        logger.info("C_%d(E_%d) = %d", s, N, witness.value)
        return witness

    witnesses = _map_ordered(measure, Ns, workers)
    table, fit = _scan_table(witnesses, Ns)
    return ScanResult(f"C{s}", str(f), witnesses, table, fit, in_regime, notes)


def write_scan_csv(result: ScanResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    result.table.to_csv(path, index=False, float_format=EXPERIMENT_CONFIG["float_format"])
    logger.info("Wrote %d rows to %s", len(result.table), path)
    return path


def power_function(c: float) -> SubpolyFunction:
    return parse_function(f"x^{c!r}", allow_polynomial=True)


def counterexample_run(
    c: float,
    N_grid: list[int],
    exact_c2_max_n: int | None = None,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    workers: int | None = None,
) -> pd.DataFrame:
    """S = sum_{n<N} e_n e_{n+1} and S/N for f = x^c, with exact C_2 where N permits."""
    if c <= 0:
        raise InputError(f"exponent must be positive, got {c}")
    in_theorem = 0 < c < 1
    if not in_theorem:
        logger.warning("c=%g lies outside (0, 1); ratios are reported without a floor", c)
    cap = EXPERIMENT_CONFIG["counterexample_exact_c2_max_n"] if exact_c2_max_n is None else exact_c2_max_n
    Ns = sorted(N_grid)
    if Ns[0] < 2:
        raise InputError("the adjacent correlation needs N >= 2")
    E = generate_sequence(power_function(c), Ns[-1], policy, workers)

    def row(N: int) -> dict:
        prefix = E.prefix(N)
        S = correlation_sum(prefix, N - 1, (0, 1))
        c2 = correlation_measure(prefix, 2).value if N <= cap else np.nan
        logger.info("c=%g N=%d: S=%d ratio=%.4f", c, N, S, S / N)
        return {"N": N, "S": S, "ratio": S / N, "c2": c2, "c2_ratio": c2 / N, "in_theorem": in_theorem}

    return pd.DataFrame(_map_ordered(row, Ns, workers))


def floor_holds(table: pd.DataFrame, theta: float) -> bool:
    ratios = table["ratio"].to_numpy()
    c2 = table["c2_ratio"].dropna().to_numpy()
    return bool(np.all(ratios >= theta) and np.all(c2 >= theta))


@dataclass(frozen=True)
class Decomposition:
    N: int
    H: int
    S: int
    main: float
    b_left: float
    b_right: float
    b_product: float

    @property
    def lower(self) -> float:
        return self.main - self.b_left - self.b_right - self.b_product

    @property
    def holds(self) -> bool:
        return self.S >= self.lower - 1e-9 * self.N


def counterexample_decomposition(
    c: float, N: int, H: int | None = None, policy: PrecisionPolicy = DEFAULT_POLICY
) -> Decomposition:
    """
    Lower bound for S from the trigonometric envelope:
    e_n e_{n+1} >= A(x_n) A(x_{n+1}) - B(x_n) - B(x_{n+1}) - B(x_n) B(x_{n+1}).
    """
    if N < 2:
        raise InputError("the adjacent correlation needs N >= 2")
    if H is None:
        H = max(1, int(N ** ((1 - c) ** 2) / 4))
    f = power_function(c)
    x = eval_frac_batch(f, np.arange(1, N + 1), policy, max_err=PHASE_ERROR).frac
    V = build_vaaler(H)
    A, B = eval_A(V, x), eval_B(V, x)
    S = correlation_sum(generate_sequence(f, N, policy), N - 1, (0, 1))
    return Decomposition(
        N=N,
        H=H,
        S=S,
        main=math.fsum(A[:-1] * A[1:]),
        b_left=math.fsum(B[:-1]),
        b_right=math.fsum(B[1:]),
        b_product=math.fsum(B[:-1] * B[1:]),
    )


@dataclass(frozen=True)
class LinkReport:
    lhs: int
    discrepancy: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def discrepancy_link_check(
    f: SubpolyFunction, a: int, b: int, M: int, policy: PrecisionPolicy = DEFAULT_POLICY
) -> LinkReport:
    """|U(E, M, a, b)| <= 2 M D_M({f(a n + b)})."""
    N = a * M + b
    if a < 1 or M < 1 or a + b < 1:
        raise ConstraintViolation(f"need a >= 1, M >= 1, a + b >= 1; got a={a}, b={b}, M={M}")
    U = progression_sum(generate_sequence(f, N, policy), M, a, b)
    D = discrepancy_1d(function_point_set(f, M, a, b, policy=policy))
    return LinkReport(lhs=abs(U), discrepancy=D, rhs=2 * M * D)


def correlation_link_check(
    f: SubpolyFunction, M: int, d, policy: PrecisionPolicy = DEFAULT_POLICY
) -> LinkReport:
    """|V(E, M, d)| <= 2^s M D_M of the points ({f(n + d_1)}, ..., {f(n + d_s)})."""
    d = tuple(int(x) for x in d)
    V = correlation_sum(generate_sequence(f, M + d[-1], policy), M, d)
    D = discrepancy_md(function_point_set(f, M, shifts=d, policy=policy))
    return LinkReport(lhs=abs(V), discrepancy=D, rhs=2 ** len(d) * M * D)

