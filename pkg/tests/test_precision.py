from fractions import Fraction
from pathlib import Path
import os
import sys

import mpmath
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from errors import BoundaryUnresolved, DomainError, PrecisionError  # noqa: E402
from hardy.hfunc import affine_substitute, parse_function  # noqa: E402
from hardy.precision import (  # noqa: E402
    DEFAULT_POLICY,
    PrecisionPolicy,
    eval_frac,
    eval_frac_batch,
)

FULL = os.environ.get("HARDYSEQ_FULL") == "1"

CORPUS = [
    "x^1.5",
    "x^2.5",
    "x^3.5",
    "x^2*log(x)",
    "x^0.5",
    "x^3*log(x)^2",
    "2*x^1.5 + x^0.5",
]


def oracle_frac(f, n: int, bits: int) -> mpmath.mpf:
    """{f(n)} recomputed with mpmath at the given precision."""
    with mpmath.workprec(bits):
        value = f.evaluate_mp(n)
        return value - mpmath.floor(value)


def circular_distance(x: float, y: float) -> float:
    d = abs(x - y) % 1.0
    return min(d, 1.0 - d)


# ── Exact path ───────────────────────────────────────────────────────────────


def test_perfect_square_is_exact_and_on_boundary():
    v = eval_frac(parse_function("x^1.5"), 4)
    assert v.exact
    assert v.frac == 0.0 and v.err == 0.0
    assert v.near_boundary
    assert v.exact_frac == 0


def test_integer_polynomial_is_exact():
    v = eval_frac(parse_function("x", allow_polynomial=True), 7)
    assert v.exact and v.frac == 0.0 and v.err == 0.0


def test_rational_offset_is_exact_half():
    v = eval_frac(parse_function("x + 0.5", allow_polynomial=True), 3)
    assert v.exact_frac == Fraction(1, 2)
    assert not v.in_lower_half()


def test_log_vanishes_at_one():
    v = eval_frac(parse_function("x^1.5*log(x) + 0.25*x^0.5"), 1)
    assert v.exact_frac == Fraction(1, 4)


# ── Interval path ────────────────────────────────────────────────────────────


def test_irrational_value():
    v = eval_frac(parse_function("x^1.5"), 2)
    assert not v.exact and not v.near_boundary
    assert v.frac == pytest.approx(0.8284271247461903, abs=1e-15)
    assert v.err < DEFAULT_POLICY.max_err
    assert abs(float(oracle_frac(parse_function("x^1.5"), 2, 512)) - v.frac) <= v.err


def test_affine_argument():
    f = affine_substitute(parse_function("x^0.5"), 3, 1)
    v = eval_frac(f, 2)
    # sqrt(7) = 2.6457513110645906
    assert v.frac == pytest.approx(0.6457513110645906, abs=1e-15)


def test_unresolvable_boundary_raises():
    f = parse_function("0.5 + 1e-20*x^0.5")
    policy = PrecisionPolicy(max_bits=256)
    with pytest.raises(BoundaryUnresolved) as exc:
        eval_frac(f, 2, policy)
    assert exc.value.n == 2
    assert exc.value.bits == 256
    assert isinstance(exc.value, PrecisionError)


def test_exact_value_next_to_boundary_is_classified():
    v = eval_frac(parse_function("0.5 + 1e-20*x^0.5"), 4)
    assert v.exact and v.near_boundary
    assert not v.in_lower_half()


def test_below_domain_start_raises():
    f = parse_function("x^2*log(x) - 100*x^1.5")
    with pytest.raises(DomainError):
        eval_frac(f, 10)
    with pytest.raises(DomainError):
        eval_frac_batch(f, np.arange(1, 20))


def test_no_misclassification_against_high_precision_oracle():
    rng = np.random.default_rng(11)
    for text in CORPUS:
        f = parse_function(text)
        ns = list(range(1, 301)) + [int(n) for n in rng.integers(301, 100_000, size=40)]
        for n in ns:
            v = eval_frac(f, n)
            reference = oracle_frac(f, n, 4 * max(v.bits, 64))
            assert v.err < DEFAULT_POLICY.max_err
            assert circular_distance(float(reference), v.frac) <= v.err + 1e-30, (text, n)
            if v.exact:
                continue
            assert (reference < 0.5) == v.in_lower_half(), (text, n)


def test_doublings_are_counted():
    coarse = PrecisionPolicy(guard_bits=4)
    assert eval_frac(parse_function("x^2.5"), 2, coarse).doublings > 0
    assert eval_frac(parse_function("x^1.5"), 2).doublings == 0
    assert eval_frac(parse_function("x^1.5"), 4, coarse).doublings == 0


# ── Batch path ───────────────────────────────────────────────────────────────


@pytest.mark.parametrize("text", CORPUS)
def test_batch_agrees_with_scalar_kernel(text):
    f = parse_function(text)
    ns = np.arange(1, 2001)
    batch = eval_frac_batch(f, ns)
    scalar = [eval_frac(f, int(n)) for n in ns]
    assert list(batch.lower_half) == [v.in_lower_half() for v in scalar]


def test_batch_accuracy_mode_bounds_error():
    f = parse_function("x^2.5")
    ns = np.arange(1, 3001)
    batch = eval_frac_batch(f, ns, max_err=2.0**-30)
    assert batch.err.max() < 2.0**-30
    for n in (1, 17, 999, 3000):
        v = eval_frac(f, n)
        assert circular_distance(batch.frac[n - 1], v.frac) <= batch.err[n - 1] + v.err


def test_batch_without_fast_path_certifies_everything():
    f = parse_function("x^1.5")
    policy = PrecisionPolicy(fast_path=False)
    batch = eval_frac_batch(f, np.arange(1, 101), policy)
    assert batch.certified == 100
    assert list(batch.lower_half) == list(eval_frac_batch(f, np.arange(1, 101)).lower_half)


@pytest.mark.skipif(not FULL, reason="full-range certification; set HARDYSEQ_FULL=1")
@pytest.mark.parametrize("text", CORPUS)
def test_fast_path_matches_certified_path_full_range(text):
    f = parse_function(text)
    ns = np.arange(1, 100_001)
    fast = eval_frac_batch(f, ns, workers=4)
    certified = eval_frac_batch(f, ns, PrecisionPolicy(fast_path=False), workers=4)
    assert certified.certified == ns.size
    assert np.array_equal(fast.lower_half, certified.lower_half)
    rng = np.random.default_rng(29)
    for n in (int(k) for k in rng.integers(1, 100_001, size=200)):
        v = eval_frac(f, n)
        if v.exact:
            continue
        reference = oracle_frac(f, n, 4 * max(v.bits, 64))
        assert (reference < 0.5) == bool(fast.lower_half[n - 1]), (text, n)


def test_batch_parallel_matches_serial():
    f = parse_function("x^3*log(x)^2")
    policy = PrecisionPolicy(fast_path=False)
    ns = np.arange(1, 301)
    serial = eval_frac_batch(f, ns, policy, workers=1)
    parallel = eval_frac_batch(f, ns, policy, workers=4)
    assert np.array_equal(serial.frac, parallel.frac)
    assert np.array_equal(serial.lower_half, parallel.lower_half)


def test_policy_describe():
    assert PrecisionPolicy(fast_path=False).describe() == "guard=64 max_bits=4096 tol=2^-48 fast=0"
