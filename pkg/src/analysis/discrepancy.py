"""
Discrepancy of point sets in [0, 1]^s: exact values for small instances and the
Erdos-Turan / Koksma-Szusz exponential-sum bounds.

Intervals are taken closed or open, so a single point mass is attainable.
"""

import logging
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from analysis.expsum import PHASE_ERROR, exp_sum
from constants import ERDOS_TURAN_CONSTANT, KOKSMA_SZUSZ_CONSTANT
from errors import ConstraintViolation, SizeGuardExceeded
from hardy.hfunc import SubpolyFunction, affine_substitute
from hardy.precision import DEFAULT_POLICY, PrecisionPolicy, eval_frac_batch
from numeric_config import CONFIG

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ConstraintViolation("a point set needs at least one point")
        if np.any(pts < 0) or np.any(pts > 1):
            raise ConstraintViolation("coordinates must lie in [0, 1]")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])


def function_point_set(
    f: SubpolyFunction,
    M: int,
    a: int = 1,
    b: int = 0,
    shifts=(0,),
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> PointSet:
    """Rows ({f(a n + b + d_1)}, ..., {f(a n + b + d_s)}) for n = 1..M."""
    if M < 1:
        raise ConstraintViolation(f"M must be positive, got {M}")
    ns = np.arange(1, M + 1)
    columns = [
        eval_frac_batch(affine_substitute(f, a, b + int(d)), ns, policy, max_err=PHASE_ERROR).frac
        for d in shifts
    ]
    return PointSet(np.column_stack(columns))


def discrepancy_1d(P: PointSet) -> float:
    """1/N + max(i/N - x_(i)) - min(i/N - x_(i)) over the sorted sample."""
    if P.dim != 1:
        raise ConstraintViolation(f"discrepancy_1d needs dim 1, got {P.dim}")
    x = np.sort(P.points[:, 0])
    N = x.size
    gap = np.arange(1, N + 1) / N - x
    return float(1.0 / N + gap.max() - gap.min())


def discrepancy_1d_brute(P: PointSet) -> float:
    """O(N^2) sup over closed and open intervals with endpoints in the sample and {0, 1}."""
    x = np.sort(P.points[:, 0])
    N = x.size
    ends = np.unique(np.concatenate([x, [0.0, 1.0]]))
    best = 0.0
    for i, u in enumerate(ends):
        for v in ends[i:]:
            closed = np.searchsorted(x, v, "right") - np.searchsorted(x, u, "left")
            best = max(best, closed / N - (v - u))
            if v > u:
                inside = np.searchsorted(x, v, "left") - np.searchsorted(x, u, "right")
                best = max(best, (v - u) - inside / N)
    return float(best)


def _axis_intervals(coords: np.ndarray, closed: bool) -> list[tuple[float, float]]:
    ends = np.unique(np.concatenate([coords, [0.0, 1.0]]))
    return [
        (float(u), float(v))
        for i, u in enumerate(ends)
        for v in ends[i if closed else i + 1 :]
    ]


def _last_axis_excess(y: np.ndarray, volume: float, N: int) -> float:
    """max over closed [u, v] of count/N - volume * (v - u)."""
    z = np.unique(y)
    le = np.searchsorted(np.sort(y), z, "right") / N
    lt = np.searchsorted(np.sort(y), z, "left") / N
    left = np.maximum.accumulate(volume * z - lt)
    return float((le - volume * z + left).max())


def _last_axis_deficit(y: np.ndarray, volume: float, N: int) -> float:
    """max over open (u, v) of volume * (v - u) - count/N."""
    ys = np.sort(y)
    z = np.unique(np.concatenate([ys, [0.0, 1.0]]))
    lt = np.searchsorted(ys, z, "left") / N
    le = np.searchsorted(ys, z, "right") / N
    left = np.maximum.accumulate(le - volume * z)
    return float((volume * z[1:] - lt[1:] + left[:-1]).max())


def discrepancy_md(P: PointSet) -> float:
    """Exact sup |count/N - volume| over closed and open axis-parallel boxes."""
    N, dim = P.N, P.dim
    if dim > CONFIG["discrepancy_md_max_dim"] or N > CONFIG["discrepancy_md_max_n"]:
        raise SizeGuardExceeded(
            f"exact discrepancy is limited to dim <= {CONFIG['discrepancy_md_max_dim']} and "
            f"N <= {CONFIG['discrepancy_md_max_n']}; use koksma_szusz_bound instead"
        )
    per_axis = (N + 2) * (N + 3) // 2
    if per_axis ** (dim - 1) > CONFIG["discrepancy_md_max_boxes"]:
        raise SizeGuardExceeded(
            f"{per_axis ** (dim - 1)} boxes exceed the enumeration guard; "
            "use koksma_szusz_bound instead"
        )
    pts = P.points
    last = pts[:, -1]
    best = 0.0
    for closed in (True, False):
        axes = [_axis_intervals(pts[:, j], closed) for j in range(dim - 1)]
        for box in product(*axes):
            inside = np.ones(N, dtype=bool)
            volume = 1.0
            for j, (u, v) in enumerate(box):
                coord = pts[:, j]
                inside &= (coord >= u) & (coord <= v) if closed else (coord > u) & (coord < v)
                volume *= v - u
            y = last[inside]
            if closed:
                if y.size:
                    best = max(best, _last_axis_excess(y, volume, N))
            else:
                best = max(best, _last_axis_deficit(y, volume, N))
    return best


def erdos_turan_bound(P: PointSet, H: int) -> float:
    """1/(H+1) + sum_{h<=H} (1/h) |(1/N) sum_n e(h x_n)|."""
    if P.dim != 1:
        raise ConstraintViolation(f"erdos_turan_bound needs dim 1, got {P.dim}")
    if H < 1:
        raise ConstraintViolation(f"H must be >= 1, got {H}")
    x = P.points[:, 0]
    tail = math.fsum(abs(exp_sum(h * x)) / (h * P.N) for h in range(1, H + 1))
    return ERDOS_TURAN_CONSTANT * (1.0 / (H + 1) + tail)


def koksma_szusz_bound(P: PointSet, H: int) -> float:
    """1/H + (1/N) sum_{0 < max|h_j| <= H} |sum_n e(h . x_n)| / prod max(|h_j|, 1)."""
    if H < 1:
        raise ConstraintViolation(f"H must be >= 1, got {H}")
    if H**P.dim > CONFIG["lattice_max_points"]:
        raise SizeGuardExceeded(
            f"lattice H^s = {H ** P.dim} exceeds {CONFIG['lattice_max_points']}"
        )
    terms = []
    for h in product(range(-H, H + 1), repeat=P.dim):
        if not any(h):
            continue
        weight = math.prod(max(abs(hj), 1) for hj in h)
        terms.append(abs(exp_sum(P.points @ np.asarray(h, dtype=np.float64))) / weight)
    return KOKSMA_SZUSZ_CONSTANT * (1.0 / H + math.fsum(terms) / P.N)
