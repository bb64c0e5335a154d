"""
Certified fractional parts {f(a*n + b)}.

Two paths: exact rational values (integer powers, perfect roots, log(1) = 0) and
interval arithmetic with mpmath's iv context, doubling the working precision
while the enclosure touches a neighbourhood of 0, 1/2 or 1.
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath.ctx_iv import MPIntervalContext

from errors import BoundaryUnresolved, DomainError, PrecisionError
from hardy.hfunc import SubpolyFunction
from numeric_config import CONFIG

logger = logging.getLogger(__name__)

_HALF = Fraction(1, 2)
_ROUNDING_SLACK = 2.0**-53
_local = threading.local()


@dataclass(frozen=True)
class PrecisionPolicy:
    guard_bits: int = CONFIG["guard_bits"]
    max_bits: int = CONFIG["max_bits"]
    boundary_tolerance: float = CONFIG["boundary_tolerance"]
    max_err: float = CONFIG["max_err"]
    fast_path: bool = True

    def describe(self) -> str:
        return (
            f"guard={self.guard_bits} max_bits={self.max_bits} "
            f"tol=2^{math.log2(self.boundary_tolerance):g} fast={int(self.fast_path)}"
        )


DEFAULT_POLICY = PrecisionPolicy()


@dataclass(frozen=True)
class FractionalValue:
    frac: float
    err: float
    near_boundary: bool
    exact: bool = False
    bits: int = 0
    exact_frac: Fraction | None = None
    doublings: int = 0

    def in_lower_half(self) -> bool:
        if self.exact_frac is not None:
            return self.exact_frac < _HALF
        return self.frac < 0.5


@dataclass
class FracBatch:
    frac: np.ndarray
    err: np.ndarray
    lower_half: np.ndarray
    certified: int
    escalations: int = 0


def _interval_context() -> MPIntervalContext:
    ctx = getattr(_local, "iv", None)
    if ctx is None:
        ctx = MPIntervalContext()
        _local.iv = ctx
    return ctx


def _raw_to_fraction(raw) -> Fraction:
    sign, man, exp, bc = raw
    man = int(man)
    if not man:
        if exp:
            raise ArithmeticError("non-finite interval endpoint")
        return Fraction(0)
    value = Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
    return -value if sign else value


def _integer_root(x: int, q: int) -> int | None:
    y = int(round(x ** (1.0 / q)))
    while y > 0 and y**q > x:
        y -= 1
    while (y + 1) ** q <= x:
        y += 1
    return y if y**q == x else None


def _exact_value(f: SubpolyFunction, x: int) -> Fraction | None:
    total = Fraction(0)
    for t in f.terms:
        if t.k:
            if x != 1:
                return None
            continue
        if t.c.denominator == 1:
            power = Fraction(x) ** t.c.numerator
        elif t.c.denominator <= CONFIG["exact_root_max_denominator"]:
            root = _integer_root(x, t.c.denominator)
            if root is None:
                return None
            power = Fraction(root) ** t.c.numerator
        else:
            return None
        total += t.coeff * power
    return total


def _enclose(f: SubpolyFunction, x: int, bits: int) -> tuple[Fraction, Fraction]:
    ctx = _interval_context()
    ctx.prec = bits
    X = ctx.mpf(x)
    logx = ctx.log(X)
    total = ctx.mpf(0)
    for t in f.terms:
        value = ctx.mpf(t.coeff.numerator) / t.coeff.denominator
        if t.c.denominator == 1:
            if t.c:
                value = value * X ** int(t.c)
        else:
            value = value * ctx.exp(ctx.mpf(t.c.numerator) / t.c.denominator * logx)
        if t.k:
            value = value * logx**t.k
        total = total + value
    lo, hi = total._mpi_
    return _raw_to_fraction(lo), _raw_to_fraction(hi)


def _boundary_distance(frac: Fraction) -> Fraction:
    return min(frac, abs(frac - _HALF), 1 - frac)


def _to_unit_float(frac: Fraction) -> float:
    value = float(frac)
    return value if value < 1.0 else math.nextafter(1.0, 0.0)


def eval_frac(
    f: SubpolyFunction,
    n: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    max_err: float | None = None,
) -> FractionalValue:
    """Certified {f(n)}: |true - frac| <= err, near_boundary only on exact values."""
    n = int(n)
    if n < f.domain_start:
        raise DomainError(f"n={n} lies below the domain start {f.domain_start} of {f}")
    x = f.argument(n)
    tol = Fraction(policy.boundary_tolerance)

    exact = _exact_value(f, x)
    if exact is not None:
        frac_q = exact - math.floor(exact)
        return FractionalValue(
            frac=_to_unit_float(frac_q),
            err=0.0,
            near_boundary=_boundary_distance(frac_q) <= tol,
            exact=True,
            exact_frac=frac_q,
        )

    target = min(policy.max_err, max_err) if max_err is not None else policy.max_err
    bits = policy.guard_bits + math.ceil(max(f.log2_magnitude(x), 1.0))
    bits = min(bits, policy.max_bits)
    doublings = 0
    while True:
        lo, hi = _enclose(f, x, bits)
        mid = (lo + hi) / 2
        frac_q = mid - math.floor(mid)
        err_q = (hi - lo) / 2
        err = float(err_q) + _ROUNDING_SLACK
        near = _boundary_distance(frac_q) <= Fraction(err) + tol
        if not near and err < target:
            return FractionalValue(
                frac=_to_unit_float(frac_q),
                err=err,
                near_boundary=False,
                bits=bits,
                doublings=doublings,
            )
        if bits >= policy.max_bits:
            if near:
                raise BoundaryUnresolved(n, x, float(frac_q), err, bits)
            raise PrecisionError(f"n={n}: error {err:.3e} above {target:.3e} at {bits} bits")
        logger.debug("n=%d: escalating from %d bits (err=%.3e, near=%s)", n, bits, err, near)
        bits = min(2 * bits, policy.max_bits)
        doublings += 1


def eval_frac_batch(
    f: SubpolyFunction,
    ns,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    max_err: float | None = None,
    workers: int | None = None,
) -> FracBatch:
    """
    Vectorised {f(n)} for many n. A float64 value is accepted when its rounding
    bound plus the boundary tolerance separates it from 0, 1/2 and 1, and, when
    ``max_err`` is given, the bound is below it. Without ``max_err`` only the
    half-interval is certified and ``err`` may exceed the policy limit.
    Everything else goes through eval_frac.
    """
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size and ns.min() < f.domain_start:
        raise DomainError(f"n={int(ns.min())} lies below the domain start {f.domain_start} of {f}")
    fast_limit = np.inf if max_err is None else max_err
    frac = np.zeros(ns.size, dtype=np.float64)
    err = np.zeros(ns.size, dtype=np.float64)
    lower = np.zeros(ns.size, dtype=bool)

    if policy.fast_path and ns.size:
        values = np.asarray(f.evaluate(ns), dtype=np.float64)
        bound = f.float_error_bound(ns)
        with np.errstate(invalid="ignore"):
            approx = values - np.floor(values)
            dist = np.minimum(np.minimum(approx, np.abs(approx - 0.5)), 1.0 - approx)
            safe = (
                np.isfinite(values)
                & (bound < fast_limit)
                & (dist > bound + policy.boundary_tolerance)
            )
        frac[safe] = approx[safe]
        err[safe] = bound[safe]
        lower[safe] = approx[safe] < 0.5
    else:
        safe = np.zeros(ns.size, dtype=bool)

    pending = np.flatnonzero(~safe)
    escalations = 0
    if pending.size:
        workers = workers or CONFIG["workers"]
        pending_ns = [int(n) for n in ns[pending]]
        if workers > 1 and pending.size > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                resolved = list(executor.map(lambda n: eval_frac(f, n, policy, max_err), pending_ns))
        else:
            resolved = [eval_frac(f, n, policy, max_err) for n in pending_ns]
        for idx, value in zip(pending, resolved):
            frac[idx] = value.frac
            err[idx] = value.err
            lower[idx] = value.in_lower_half()
            escalations += int(value.doublings > 0)
        logger.debug("%s: %d of %d values needed the certified kernel", f, pending.size, ns.size)

    return FracBatch(
        frac=frac, err=err, lower_half=lower, certified=int(pending.size), escalations=escalations
    )
