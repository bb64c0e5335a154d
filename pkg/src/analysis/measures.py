"""
Well-distribution measure W and correlation measures C_s with argmax witnesses.

W: for each step a, the progression sums in one residue class are differences
of that column's prefix sums, so the best window is max - min of the column.
C_s: for a fixed shift shape (0, delta_2, ..., delta_s) the windowed sums are
differences of prefix sums of the shifted products; every start i gives the
tuple d = (i, i + delta_2, ..., i + delta_s).
"""

import logging
import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from constants import MEASURE_C, MEASURE_W
from errors import ConstraintViolation, ModeError, SizeGuardExceeded
from hardy.seqgen import BinarySequence
from numeric_config import CONFIG

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WellDistWitness:
    value: int
    a: int
    b: int
    M: int
    signed_sum: int

    def to_record(self, N: int, runtime_ms: float | None = None) -> dict:
        record = {
            "measure": MEASURE_W,
            "value": self.value,
            "N": N,
            "a": self.a,
            "b": self.b,
            "M": self.M,
            "signed_sum": self.signed_sum,
            "exact": True,
        }
        if runtime_ms is not None:
            record["runtime_ms"] = round(runtime_ms, 3)
        return record


@dataclass(frozen=True)
class CorrelationWitness:
    value: int
    s: int
    M: int
    d: tuple[int, ...]
    exact: bool
    signed_sum: int

    def to_record(self, N: int, runtime_ms: float | None = None) -> dict:
        record = {
            "measure": f"{MEASURE_C}{self.s}",
            "value": self.value,
            "N": N,
            "M": self.M,
            "d": list(self.d),
            "signed_sum": self.signed_sum,
            "exact": self.exact,
        }
        if runtime_ms is not None:
            record["runtime_ms"] = round(runtime_ms, 3)
        return record


@dataclass(frozen=True)
class CorrelationMode:
    kind: str = "exact"
    d_max: int | None = None
    seed: int | None = None
    iters: int | None = None

    def __str__(self) -> str:
        if self.kind == "capped":
            return f"capped:{self.d_max}"
        if self.kind == "randomized":
            return f"rand:{self.seed}:{self.iters}"
        return "exact"


def parse_mode(text: str) -> CorrelationMode:
    """``exact``, ``capped:D`` or ``rand:SEED:ITERS``."""
    parts = text.strip().split(":")
    try:
        if parts == ["exact"]:
            return CorrelationMode()
        if parts[0] == "capped" and len(parts) == 2:
            d_max = int(parts[1])
            if d_max < 1:
                raise ValueError
            return CorrelationMode("capped", d_max=d_max)
        if parts[0] in ("rand", "randomized") and len(parts) == 3:
            iters = int(parts[2])
            if iters < 0:
                raise ValueError
            return CorrelationMode("randomized", seed=int(parts[1]), iters=iters)
    except ValueError:
        pass
    raise ModeError(f"unknown correlation mode {text!r}; use exact, capped:D or rand:SEED:ITERS")


def progression_sum(E: BinarySequence, M: int, a: int, b: int) -> int:
    """U(E, M, a, b) = sum_{n=1..M} e_{a n + b}."""
    N = len(E)
    if a < 1 or M < 1 or not (1 <= a + b <= a * M + b <= N):
        raise ConstraintViolation(f"need 1 <= a+b <= aM+b <= {N}, got M={M}, a={a}, b={b}")
    start = a + b - 1
    return int(E.signs[start : start + a * (M - 1) + 1 : a].sum(dtype=np.int64))


def _column_range(signs: np.ndarray, a: int) -> int:
    N = signs.size
    rows = -(-N // a)
    padded = np.zeros(rows * a, dtype=np.int32)
    padded[:N] = signs
    prefix = np.cumsum(padded.reshape(rows, a), axis=0)
    top = np.maximum(prefix.max(axis=0), 0)
    bottom = np.minimum(prefix.min(axis=0), 0)
    return int((top - bottom).max())


def _first_opposite_pair(P: np.ndarray) -> tuple[int, int]:
    """Earliest i with an opposite extreme later on, and the first such j."""
    hi, lo = P.max(), P.min()
    idx = np.flatnonzero((P == hi) | (P == lo))
    labels = P[idx] == hi
    k = int(np.argmax(labels != labels[0]))
    return int(idx[0]), int(idx[k])


def _closest_opposite_pair(P: np.ndarray) -> tuple[int, int]:
    """(gap, i) of the nearest max/min pair; smallest i among equal gaps."""
    hi, lo = P.max(), P.min()
    idx = np.flatnonzero((P == hi) | (P == lo))
    labels = P[idx] == hi
    change = np.flatnonzero(labels[1:] != labels[:-1])
    gaps = idx[change + 1] - idx[change]
    k = int(np.argmin(gaps))
    return int(gaps[k]), int(idx[change[k]])


def _progression_witness(signs: np.ndarray, a: int, value: int) -> WellDistWitness:
    best = None
    for r in range(min(a, signs.size)):
        P = np.concatenate(([0], np.cumsum(signs[r::a], dtype=np.int64)))
        if int(P.max() - P.min()) != value:
            continue
        i, j = _first_opposite_pair(P)
        candidate = (r + 1 + i * a, j - i, int(P[j] - P[i]))
        if best is None or candidate[:2] < best[:2]:
            best = candidate
    start, M, signed = best
    return WellDistWitness(value=value, a=a, b=start - a, M=M, signed_sum=signed)


def well_distribution(E: BinarySequence, a_cap: int | None = None) -> WellDistWitness:
    """Exact W(E) over steps a <= a_cap; ties go to the smallest (a, b, M)."""
    signs = E.signs
    N = signs.size
    a_cap = N if a_cap is None else max(1, min(int(a_cap), N))
    best_value, best_a = 0, 1
    for a in range(1, a_cap + 1):
        # a column holds at most ceil(N / a) terms
        if -(-N // a) <= best_value:
            break
        value = _column_range(signs, a)
        if value > best_value:
            best_value, best_a = value, a
    return _progression_witness(signs, best_a, best_value)


def correlation_sum(E: BinarySequence, M: int, d) -> int:
    """V(E, M, d) = sum_{n=1..M} e_{n+d_1} ... e_{n+d_s}."""
    d = tuple(int(x) for x in d)
    N = len(E)
    if not d or d[0] < 0 or any(x >= y for x, y in zip(d, d[1:])):
        raise ConstraintViolation(f"shifts must be strictly increasing and >= 0, got {d}")
    if M < 1 or M + d[-1] > N:
        raise ConstraintViolation(f"need M >= 1 and M + d_s <= {N}, got M={M}, d_s={d[-1]}")
    product = np.ones(M, dtype=np.int8)
    for shift in d:
        product = product * E.signs[shift : shift + M]
    return int(product.sum(dtype=np.int64))


class _Best:
    """Running maximum with lexicographic (M, d) tie-break."""

    def __init__(self):
        self.value = -1
        self.key: tuple[int, tuple[int, ...]] | None = None

    def offer(self, value: int, M: int, d: tuple[int, ...]) -> bool:
        key = (M, d)
        if value > self.value or (value == self.value and key < self.key):
            self.value, self.key = value, key
            return True
        return False


def _prefix_rows(rows: np.ndarray) -> np.ndarray:
    P = np.zeros((rows.shape[0], rows.shape[1] + 1), dtype=np.int32)
    np.cumsum(rows, axis=1, out=P[:, 1:])
    return P


def _restricted_pair(P: np.ndarray, value: int, max_start: int) -> tuple[int, int] | None:
    best = None
    for i in range(min(max_start, P.size - 2) + 1):
        diffs = np.abs(P[i + 1 :] - P[i])
        hits = np.flatnonzero(diffs == value)
        if hits.size and (best is None or (int(hits[0]) + 1, i) < best):
            best = (int(hits[0]) + 1, i)
    return best


def _search_shapes(signs: np.ndarray, s: int, d_max: int, best: _Best):
    """Every shape with last shift <= d_max; starts restricted so d_s <= d_max."""
    N = signs.size
    unrestricted = d_max >= N - 1
    padded = np.concatenate([signs.astype(np.int32), np.zeros(N, dtype=np.int32)])
    windows = sliding_window_view(padded, N)
    chunk = max(1, CONFIG["correlation_chunk_cells"] // max(N, 1))
    for inner in combinations(range(1, d_max), s - 2):
        shape = (0,) + inner
        top = shape[-1]
        q = np.zeros(N, dtype=np.int32)
        q[: N - top] = 1
        for shift in shape:
            q[: N - top] *= signs[shift : shift + N - top]
        for lo in range(top + 1, d_max + 1, chunk):
            lasts = np.arange(lo, min(lo + chunk, d_max + 1))
            P = _prefix_rows(q[None, :] * windows[lasts])
            if unrestricted:
                values = P.max(axis=1) - P.min(axis=1)
            else:
                width = d_max - int(lasts[0]) + 1
                rev_max = np.maximum.accumulate(P[:, ::-1], axis=1)[:, ::-1]
                rev_min = np.minimum.accumulate(P[:, ::-1], axis=1)[:, ::-1]
                head = P[:, :width]
                gain = np.maximum(rev_max[:, 1 : width + 1] - head, head - rev_min[:, 1 : width + 1])
                allowed = np.arange(width)[None, :] <= (d_max - lasts)[:, None]
                values = np.where(allowed, gain, -1).max(axis=1)
            top_value = int(values.max())
            if top_value < best.value:
                continue
            for row in np.flatnonzero(values == top_value):
                last = int(lasts[row])
                valid = P[row, : N - last + 1]
                if unrestricted:
                    M, i = _closest_opposite_pair(valid)
                else:
                    M, i = _restricted_pair(valid, top_value, d_max - last)
                best.offer(top_value, M, tuple(i + x for x in shape + (last,)))


def _shape_value(signs: np.ndarray, shape: tuple[int, ...]) -> tuple[int, int, int]:
    N = signs.size
    length = N - shape[-1]
    g = np.ones(length, dtype=np.int32)
    for shift in shape:
        g *= signs[shift : shift + length]
    P = np.concatenate(([0], np.cumsum(g)))
    M, i = _closest_opposite_pair(P)
    return int(P.max() - P.min()), M, i


def _hill_climb(signs: np.ndarray, s: int, seed: int, iters: int, best: _Best):
    N = signs.size
    rng = np.random.default_rng(seed)
    current = tuple(sorted(int(x) for x in rng.choice(np.arange(1, N), size=s - 1, replace=False)))
    value, M, i = _shape_value(signs, (0,) + current)
    best.offer(value, M, tuple(i + x for x in (0,) + current))
    step_max = max(1, N // 8)
    for _ in range(iters):
        j = int(rng.integers(0, s - 1))
        step = int(rng.integers(1, step_max + 1)) * (1 if rng.random() < 0.5 else -1)
        proposal = list(current)
        proposal[j] += step
        if proposal[0] < 1 or proposal[-1] > N - 1:
            continue
        if any(x >= y for x, y in zip(proposal, proposal[1:])):
            continue
        candidate, M, i = _shape_value(signs, (0,) + tuple(proposal))
        if candidate >= value:
            current, value = tuple(proposal), candidate
            best.offer(value, M, tuple(i + x for x in (0,) + current))


def correlation_measure(
    E: BinarySequence, s: int = 2, mode: CorrelationMode | str = CorrelationMode()
) -> CorrelationWitness:
    """C_s(E) with the lexicographically smallest (M, d) among maximisers."""
    if isinstance(mode, str):
        mode = parse_mode(mode)
    N = len(E)
    if s < 2:
        raise ConstraintViolation(f"correlation order must be >= 2, got {s}")
    if N < s:
        raise ConstraintViolation(f"no admissible shifts of order {s} in a sequence of length {N}")
    signs = E.signs
    best = _Best()
    if mode.kind == "exact":
        if s >= 3 and N > CONFIG["exact_correlation_max_n"]:
            raise ModeError(
                f"exact C_{s} needs N <= {CONFIG['exact_correlation_max_n']}, got N={N}; "
                "use capped:D or rand:SEED:ITERS"
            )
        _search_shapes(signs, s, N - 1, best)
        exact = True
    elif mode.kind == "capped":
        d_max = min(mode.d_max, N - 1)
        if d_max < s - 1:
            raise ModeError(f"capped:{mode.d_max} admits no shifts of order {s}")
        _search_shapes(signs, s, d_max, best)
        exact = d_max >= N - 1
        if not exact:
            logger.warning("C_%d search capped at d_s <= %d; value is a lower bound", s, d_max)
    elif mode.kind == "randomized":
        _hill_climb(signs, s, mode.seed, mode.iters, best)
        exact = False
    else:
        raise ModeError(f"unknown correlation mode {mode.kind!r}")
    M, d = best.key
    return CorrelationWitness(
        value=best.value, s=s, M=M, d=d, exact=exact, signed_sum=correlation_sum(E, M, d)
    )


def brute_force_w(E: BinarySequence) -> WellDistWitness:
    """Exhaustive W over all admissible (a, b, M), for testing."""
    N = len(E)
    if N > CONFIG["brute_force_w_max_n"]:
        raise SizeGuardExceeded(f"brute_force_w is limited to N <= {CONFIG['brute_force_w_max_n']}")
    e = [int(x) for x in E.signs]
    best = None
    for a in range(1, N + 1):
        for b in range(1 - a, N - a + 1):
            total, M = 0, 0
            for pos in range(a + b, N + 1, a):
                total += e[pos - 1]
                M += 1
                if best is None or abs(total) > best.value:
                    best = WellDistWitness(abs(total), a, b, M, total)
    return best


def brute_force_c(E: BinarySequence, s: int) -> CorrelationWitness:
    """Exhaustive C_s over all admissible (M, d), for testing."""
    N = len(E)
    max_n = CONFIG["brute_force_c2_max_n"] if s == 2 else CONFIG["brute_force_c_max_n"]
    if N > max_n or s > CONFIG["brute_force_c_max_s"]:
        raise SizeGuardExceeded(
            f"brute_force_c is limited to N <= {max_n} for s={s} "
            f"and s <= {CONFIG['brute_force_c_max_s']}"
        )
    if s < 2 or N < s:
        raise ConstraintViolation(f"no admissible shifts of order {s} for N={N}")
    e = [int(x) for x in E.signs]
    best = _Best()
    signed = 0
    for d in combinations(range(N), s):
        total = 0
        for M in range(1, N - d[-1] + 1):
            term = 1
            for shift in d:
                term *= e[M - 1 + shift]
            total += term
            if best.offer(abs(total), M, d):
                signed = total
    M, d = best.key
    return CorrelationWitness(best.value, s, M, d, True, signed)


def timed(fn, *args, **kwargs):
    """Run fn and return (result, elapsed milliseconds)."""
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, (time.perf_counter() - start) * 1000.0
