from pathlib import Path
import math
import sys

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from errors import ConstraintViolation  # noqa: E402
from utils.fit_utils import fit_exponent, running_slopes  # noqa: E402


def test_fit_recovers_exact_power_law():
    points = [(n, 3.0 * n**0.75) for n in (2**10, 2**11, 2**12, 2**13, 2**14)]
    fit = fit_exponent(points)
    assert fit.slope == pytest.approx(0.75)
    assert math.exp(fit.intercept) == pytest.approx(3.0)
    assert fit.max_residual < 1e-9


def test_fit_sorts_points():
    points = [(4096, 64.0), (1024, 32.0), (16384, 128.0), (2048, 45.254834)]
    fit = fit_exponent(points)
    assert fit.Ns == (1024, 2048, 4096, 16384)
    assert fit.slope == pytest.approx(0.5, abs=1e-6)


def test_fit_needs_four_points():
    with pytest.raises(ConstraintViolation):
        fit_exponent([(1, 1.0), (2, 2.0), (4, 4.0)])


def test_fit_rejects_non_positive_values():
    with pytest.raises(ConstraintViolation):
        fit_exponent([(1, 1.0), (2, 0.0), (4, 4.0), (8, 8.0)])


def test_running_slopes():
    slopes = running_slopes([1, 2, 4, 8], [1.0, 2.0, 4.0, 8.0])
    assert math.isnan(slopes[0])
    assert slopes[1:] == pytest.approx([1.0, 1.0, 1.0])
