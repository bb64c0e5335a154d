from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
import math
import sys

import mpmath
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from analysis.expsum import (  # noqa: E402
    BoundInputs,
    PhaseSpec,
    bound_inputs,
    exp_sum,
    falling_factorial,
    kusmin_landau_bound,
    lambda_alpha,
    linear_form,
    min_nonvanishing_index,
    multi_phase_sum,
    predicted_w_exponent,
    robert_check,
    vdc_bound,
    weyl_sum,
    well_distribution_bound,
)
from analysis.measures import progression_sum  # noqa: E402
from constants import KUSMIN_LANDAU_EMPIRICAL, VAN_DER_CORPUT_EMPIRICAL  # noqa: E402
from errors import ConstraintViolation  # noqa: E402
from hardy.hfunc import GrowthInfo, growth_exponent, parse_function  # noqa: E402
from hardy.seqgen import generate_sequence  # noqa: E402


# ── Sums ─────────────────────────────────────────────────────────────────────


def test_exp_sum_of_integers_and_halves():
    assert exp_sum(np.arange(10.0)) == pytest.approx(10)
    assert exp_sum(np.full(6, 0.5)) == pytest.approx(-6)
    assert exp_sum(np.array([0.25, 0.75])) == pytest.approx(0, abs=1e-15)


def test_weyl_sum_of_integer_valued_function():
    f = parse_function("x", allow_polynomial=True)
    assert weyl_sum(f, 1, 1, 50) == pytest.approx(50)
    g = parse_function("x + 0.5", allow_polynomial=True)
    assert weyl_sum(g, 1, 1, 50) == pytest.approx(-50)


def test_weyl_sum_against_multiprecision_oracle():
    f = parse_function("x^0.5")
    with mpmath.workprec(128):
        expected = mpmath.fsum(mpmath.expjpi(2 * mpmath.sqrt(n)) for n in range(1, 1001))
    got = weyl_sum(f, 1, 1, 1000)
    assert got.real == pytest.approx(float(expected.real), abs=1e-9)
    assert got.imag == pytest.approx(float(expected.imag), abs=1e-9)


def test_weyl_sum_conjugate_symmetry_and_trivial_bound():
    f = parse_function("x^2.5")
    s_pos = weyl_sum(f, 3, 10, 400)
    s_neg = weyl_sum(f, -3, 10, 400)
    assert s_neg == pytest.approx(s_pos.conjugate(), abs=1e-9)
    assert abs(s_pos) <= 391


def test_weyl_sum_rejects_bad_input():
    f = parse_function("x^1.5")
    with pytest.raises(ConstraintViolation):
        weyl_sum(f, 0, 1, 10)
    with pytest.raises(ConstraintViolation):
        weyl_sum(f, 1, 10, 9)


def test_multi_phase_with_one_shift_is_a_weyl_sum():
    f = parse_function("x^1.5")
    assert multi_phase_sum(PhaseSpec(f, (3,), (0,)), 200) == pytest.approx(weyl_sum(f, 3, 1, 200), abs=1e-9)
    assert multi_phase_sum(PhaseSpec(f, (2,), (2,)), 100) == pytest.approx(weyl_sum(f, 2, 3, 102), abs=1e-9)


def test_multi_phase_difference_of_square_roots_is_large():
    spec = PhaseSpec(parse_function("x^0.5"), (1, -1), (0, 1))
    assert abs(multi_phase_sum(spec, 1000)) >= 500


def test_phase_spec_validation():
    f = parse_function("x^1.5")
    with pytest.raises(ConstraintViolation):
        PhaseSpec(f, (1, 1), (0, 0))
    with pytest.raises(ConstraintViolation):
        PhaseSpec(f, (0, 0), (0, 1))
    with pytest.raises(ConstraintViolation):
        PhaseSpec(f, (1,), (0, 1))


# ── Linear forms ─────────────────────────────────────────────────────────────


def test_linear_form():
    assert linear_form((1, -1), (0, 1), 0) == 0
    assert linear_form((1, -1), (0, 1), 1) == -1
    assert linear_form((2, 3), (0, 2), 0) == 5


def test_min_nonvanishing_index():
    assert min_nonvanishing_index((1, -1), (0, 1)) == 1
    assert min_nonvanishing_index((1, -2, 1), (0, 1, 2)) == 2
    assert min_nonvanishing_index((1, 0, 0), (0, 1, 2)) == 0
    with pytest.raises(ConstraintViolation):
        min_nonvanishing_index((0, 0), (0, 1))


@pytest.mark.parametrize("s", [2, 3, 4])
def test_vandermonde_guarantee(s):
    for d in combinations(range(7), s):
        for h in product(range(-5, 6), repeat=s):
            if any(h):
                assert min_nonvanishing_index(h, d) <= s - 1


def test_falling_factorial():
    assert falling_factorial(2.5, 0) == 1
    assert falling_factorial(2.5, 3) == pytest.approx(1.875)


# ── Bound evaluators ─────────────────────────────────────────────────────────


def test_lambda_alpha():
    f = parse_function("x^2.5")
    lam, alpha = lambda_alpha(f, 3, 2, 1024, 3, eps=0.1)
    assert lam == pytest.approx(3 * 2048**2.4 * 1024.0**-3)
    assert alpha == pytest.approx(2048**0.2)


def test_lambda_alpha_rejects_bad_parameters():
    f = parse_function("x^2.5")
    with pytest.raises(ConstraintViolation):
        lambda_alpha(f, 1, 1, 1024, 3, eps=0.2)
    with pytest.raises(ConstraintViolation):
        lambda_alpha(f, 1, 1, 1024, 0)
    with pytest.raises(ConstraintViolation):
        lambda_alpha(f, 0, 1, 1024, 3)


def test_kusmin_landau_bound():
    assert kusmin_landau_bound(0.5) == 2
    assert kusmin_landau_bound(0.25) == 4
    for bad in (0.0, 0.6):
        with pytest.raises(ConstraintViolation):
            kusmin_landau_bound(bad)


def test_kusmin_landau_linear_phase():
    S = exp_sum(0.3 * np.arange(1, 1001))
    assert abs(S) <= KUSMIN_LANDAU_EMPIRICAL * kusmin_landau_bound(0.3)


def test_kusmin_landau_monotone_phases():
    rng = np.random.default_rng(21)
    N = 2000
    n = np.arange(1, N + 1, dtype=np.float64)
    for _ in range(30):
        lam = float(rng.uniform(0.05, 0.4))
        v = float(rng.uniform(0.0, 1.0 - 2 * lam))
        S = exp_sum(lam * n + v * n * n / (2 * N))
        assert abs(S) <= KUSMIN_LANDAU_EMPIRICAL * kusmin_landau_bound(lam)


def test_bound_inputs_fill_big_r():
    B = BoundInputs(lambda_r=1e-3, alpha_r=2.0, r=3, X=1024)
    assert B.bigR == 4
    with pytest.raises(ConstraintViolation):
        BoundInputs(lambda_r=1e-3, alpha_r=2.0, r=3, X=1024, bigR=2)
    with pytest.raises(ConstraintViolation):
        BoundInputs(lambda_r=0.0, alpha_r=2.0, r=3, X=1024)


def test_vdc_bound_formula():
    B = BoundInputs(lambda_r=1e-4, alpha_r=2.0, r=3, X=2**16)
    R, X, lam, alpha = 4, 2.0**16, 1e-4, 2.0
    L = math.log(X)
    expected = X * (
        (alpha * lam) ** (1 / 6) + (lam * X**3) ** (-1 / 4) * L ** (2 / 4) + (alpha * L**2 / X) ** (1 / 4)
    )
    assert vdc_bound(B) == pytest.approx(expected, rel=1e-12)


def test_vdc_bound_second_term_grows_as_lambda_shrinks():
    values = [vdc_bound(BoundInputs(lambda_r=lam, alpha_r=1.0, r=2, X=1024)) for lam in (1e-2, 1e-5, 1e-8)]
    assert values[0] < values[1] < values[2]


def test_bound_inputs_from_function():
    f = parse_function("x^2.5")
    B = bound_inputs(f, 2, 1, 1000, 1000)
    assert B.r == 3 and B.bigR == 4
    # |2 * 1.875 x^-0.5| on [1000, 2000]
    assert B.lambda_r == pytest.approx(2 * 1.875 / math.sqrt(2000))
    assert B.alpha_r == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("text", ["x^1.5", "x^2.5", "x^3.5"])
@pytest.mark.parametrize("X", [256, 1024])
@pytest.mark.parametrize("h", [1, 2, 5])
def test_van_der_corput_bound_holds_empirically(text, X, h):
    f = parse_function(text)
    S = weyl_sum(f, h, X + 1, 2 * X)
    assert abs(S) <= VAN_DER_CORPUT_EMPIRICAL * vdc_bound(bound_inputs(f, h, 1, X, X))


def test_predicted_w_exponent_cases():
    for text, expected, label in [("x^0.25", 0.8, "small"), ("x^0.5", 0.8, "small"), ("x^0.75", 0.875, "medium")]:
        value, case = predicted_w_exponent(growth_exponent(parse_function(text)))
        assert case == label and value == pytest.approx(expected)
    value, case = predicted_w_exponent(growth_exponent(parse_function("x^2.5")))
    assert case == "large" and value == pytest.approx(1 - 0.5 / 7)
    one = GrowthInfo(beta=1.0, ell=1, r=2, bigR=2, beta_exact=Fraction(1))
    value, case = predicted_w_exponent(one)
    assert case == "large" and value == pytest.approx(2 / 3)


def test_well_distribution_bound_dominates_progression_sums():
    f = parse_function("x^1.5")
    E = generate_sequence(f, 3 * 200 + 1)
    for a, b, M in [(1, 0, 200), (3, 1, 200), (2, -1, 150)]:
        U = progression_sum(E, M, a, b)
        assert abs(U) <= well_distribution_bound(f, a, b, M, 10)


def test_robert_lower_bound():
    for text, N in [("x", 52), ("x^0.5", 2600)]:
        report = robert_check(parse_function(text, allow_polynomial=True), 1, N)
        assert report.premise_ok
        assert report.holds
        assert report.lower_bound == N / 8
        assert report.sum_abs >= report.lower_bound


def test_robert_premise_not_met():
    report = robert_check(parse_function("x", allow_polynomial=True), 1, 20)
    assert not report.premise_ok
    assert report.holds is None


def test_robert_requires_increasing_positive_function():
    with pytest.raises(ConstraintViolation):
        robert_check(parse_function("x^2*log(x) - 100*x^1.5"), 1, 50)
