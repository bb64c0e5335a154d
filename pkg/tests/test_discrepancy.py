from itertools import product
from pathlib import Path
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from analysis.discrepancy import (  # noqa: E402
    PointSet,
    discrepancy_1d,
    discrepancy_1d_brute,
    discrepancy_md,
    erdos_turan_bound,
    function_point_set,
    koksma_szusz_bound,
)
from constants import KOKSMA_SZUSZ_EMPIRICAL  # noqa: E402
from errors import ConstraintViolation, SizeGuardExceeded  # noqa: E402
from hardy.hfunc import parse_function  # noqa: E402
from hardy.precision import eval_frac  # noqa: E402

FULL = os.environ.get("HARDYSEQ_FULL") == "1"
GOLDEN = (1 + math.sqrt(5)) / 2


def _box_oracle(P: PointSet) -> float:
    """Enumerate every closed and open box with corners in the coordinates and {0, 1}."""
    pts = P.points
    axes = [np.unique(np.concatenate([pts[:, j], [0.0, 1.0]])) for j in range(P.dim)]
    best = 0.0
    pairs = [[(u, v) for u in ends for v in ends if u <= v] for ends in axes]
    for box in product(*pairs):
        volume = math.prod(v - u for u, v in box)
        closed = np.all([(pts[:, j] >= u) & (pts[:, j] <= v) for j, (u, v) in enumerate(box)], axis=0)
        best = max(best, closed.sum() / P.N - volume)
        if all(u < v for u, v in box):
            opened = np.all([(pts[:, j] > u) & (pts[:, j] < v) for j, (u, v) in enumerate(box)], axis=0)
            best = max(best, volume - opened.sum() / P.N)
    return best


# ── PointSet ─────────────────────────────────────────────────────────────────


def test_point_set_shapes():
    P = PointSet(np.array([0.1, 0.2, 0.3]))
    assert (P.N, P.dim) == (3, 1)
    Q = PointSet(np.zeros((4, 3)))
    assert (Q.N, Q.dim) == (4, 3)


def test_point_set_rejects_out_of_range():
    with pytest.raises(ConstraintViolation):
        PointSet(np.array([0.5, 1.5]))
    with pytest.raises(ConstraintViolation):
        PointSet(np.zeros((0, 2)))


def test_function_point_set_rows():
    f = parse_function("x^1.5")
    P = function_point_set(f, 6, a=2, b=1, shifts=(0, 1))
    assert (P.N, P.dim) == (6, 2)
    for n in range(1, 7):
        assert P.points[n - 1, 0] == pytest.approx(eval_frac(f, 2 * n + 1).frac, abs=1e-9)
        assert P.points[n - 1, 1] == pytest.approx(eval_frac(f, 2 * n + 2).frac, abs=1e-9)


# ── Exact discrepancy ────────────────────────────────────────────────────────


def test_equally_spaced_points():
    N = 10
    assert discrepancy_1d(PointSet(np.arange(1, N + 1) / N)) == pytest.approx(1 / N)


def test_single_point_mass():
    assert discrepancy_1d(PointSet(np.array([0.5]))) == pytest.approx(1.0)


def test_extremal_formula_matches_interval_enumeration():
    rng = np.random.default_rng(64)
    for _ in range(10):
        P = PointSet(rng.random(64))
        assert discrepancy_1d(P) == pytest.approx(discrepancy_1d_brute(P), abs=1e-12)


def test_discrepancy_1d_range_and_order_invariance():
    rng = np.random.default_rng(9)
    x = rng.random(200)
    D = discrepancy_1d(PointSet(x))
    assert 1 / 200 <= D <= 1
    assert discrepancy_1d(PointSet(rng.permutation(x))) == D


def test_md_point_mass():
    assert discrepancy_md(PointSet(np.array([[0.5, 0.5]]))) == pytest.approx(1.0)


def test_md_shifted_grid():
    grid = np.array([[i / 2 + 0.25, j / 2 + 0.25] for i in range(2) for j in range(2)])
    P = PointSet(grid)
    assert discrepancy_md(P) == pytest.approx(_box_oracle(P))
    assert discrepancy_md(P) == pytest.approx(0.75)


@pytest.mark.parametrize("N, dim", [(12, 2), (20, 2), (6, 3)])
def test_md_matches_box_enumeration(N, dim):
    rng = np.random.default_rng(N * dim)
    for _ in range(3):
        P = PointSet(rng.random((N, dim)))
        assert discrepancy_md(P) == pytest.approx(_box_oracle(P), abs=1e-12)


def test_md_in_one_dimension_equals_extremal_formula():
    rng = np.random.default_rng(1)
    P = PointSet(rng.random(50))
    assert discrepancy_md(P) == pytest.approx(discrepancy_1d(P), abs=1e-12)


def test_md_size_guards():
    rng = np.random.default_rng(2)
    with pytest.raises(SizeGuardExceeded):
        discrepancy_md(PointSet(rng.random((10, 4))))
    with pytest.raises(SizeGuardExceeded):
        discrepancy_md(PointSet(rng.random((301, 1))))
    with pytest.raises(SizeGuardExceeded):
        discrepancy_md(PointSet(rng.random((40, 3))))


# ── Bounds ───────────────────────────────────────────────────────────────────


def test_erdos_turan_all_points_at_zero():
    P = PointSet(np.zeros(5))
    H = 3
    assert erdos_turan_bound(P, H) == pytest.approx(1 / 4 + 1 + 1 / 2 + 1 / 3)
    assert discrepancy_1d(P) == pytest.approx(1.0)


def test_erdos_turan_golden_ratio():
    P = PointSet(np.mod(np.arange(1, 1001) * GOLDEN, 1.0))
    assert discrepancy_1d(P) <= erdos_turan_bound(P, 100)


def test_erdos_turan_on_random_point_sets():
    rng = np.random.default_rng(2024)
    for _ in range(50 if FULL else 5):
        P = PointSet(rng.random(1000))
        D = discrepancy_1d(P)
        for H in (10, 100, 1000):
            assert D <= erdos_turan_bound(P, H)


def test_erdos_turan_rejects_bad_input():
    with pytest.raises(ConstraintViolation):
        erdos_turan_bound(PointSet(np.zeros(3)), 0)
    with pytest.raises(ConstraintViolation):
        erdos_turan_bound(PointSet(np.zeros((3, 2))), 2)


def test_koksma_szusz_one_dimension_within_factor_two_of_erdos_turan():
    rng = np.random.default_rng(4)
    P = PointSet(rng.random(300))
    for H in (1, 5, 40):
        et, ks = erdos_turan_bound(P, H), koksma_szusz_bound(P, H)
        assert et <= ks <= 2 * et + 1e-12


def test_koksma_szusz_all_points_at_zero():
    P = PointSet(np.zeros((4, 2)))
    assert discrepancy_md(P) == pytest.approx(1.0)
    assert koksma_szusz_bound(P, 3) >= 1.0


def test_koksma_szusz_symmetric_in_coordinates():
    rng = np.random.default_rng(6)
    pts = rng.random((30, 2))
    assert koksma_szusz_bound(PointSet(pts), 5) == pytest.approx(koksma_szusz_bound(PointSet(pts[:, ::-1]), 5))


def test_koksma_szusz_lattice_guard():
    with pytest.raises(SizeGuardExceeded):
        koksma_szusz_bound(PointSet(np.zeros((2, 3))), 300)


@pytest.mark.parametrize("N, dim, H_max", [(24, 2, 4), (8, 3, 8)])
def test_exact_discrepancy_below_scaled_koksma_szusz(N, dim, H_max):
    rng = np.random.default_rng(N + dim)
    constant = KOKSMA_SZUSZ_EMPIRICAL[dim]
    for _ in range(3):
        P = PointSet(rng.random((N, dim)))
        D = discrepancy_md(P)
        for H in range(1, H_max + 1):
            assert D <= constant * koksma_szusz_bound(P, H)
