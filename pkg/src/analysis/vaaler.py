"""
Trigonometric envelope for chi: |chi(x) - A_H(x)| <= B_H(x).

chi = 2 * 1_[0,1/2) - 1, and the indicator of [0, alpha) minus alpha equals
psi(x - alpha) - psi(x) for the sawtooth psi(x) = {x} - 1/2. Substituting
Vaaler's approximation of psi (weights w(t) = pi t (1-t) cot(pi t) + t) gives,
for alpha = 1/2,

    A_H(x) = 2 sum_{1<=|h|<=H} a_h e(-h/4) e(hx),   a_h = sin(pi h/2)/(pi h) w(h/(H+1))
    B_H(x) = 2 sum_{|h|<=H} b_h e(hx),               b_h = (1 - |h|/(H+1)) / (H+1) for even h

so a_h vanishes for even h and b_h for odd h, and B_H is a sum of two Fejer kernels.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import ConstraintViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VaalerPoly:
    """Coefficient tables indexed by h = 0..H; a[0] is unused (0)."""

    H: int
    a: np.ndarray
    b: np.ndarray

    @property
    def b0(self) -> float:
        return float(self.b[0])


def _weight(t: np.ndarray) -> np.ndarray:
    angle = np.pi * t
    return angle * (1.0 - t) * np.cos(angle) / np.sin(angle) + t


def build_vaaler(H: int) -> VaalerPoly:
    if H < 1:
        raise ConstraintViolation(f"degree H must be >= 1, got {H}")
    h = np.arange(1, H + 1)
    t = h / (H + 1)
    sine = np.zeros(H)
    sine[h % 4 == 1] = 1.0
    sine[h % 4 == 3] = -1.0
    a = np.zeros(H + 1)
    a[1:] = sine / (np.pi * h) * _weight(t)
    b = np.zeros(H + 1)
    b[0] = 1.0 / (H + 1)
    even = h % 2 == 0
    b[1:][even] = (1.0 - t[even]) / (H + 1)
    a.setflags(write=False)
    b.setflags(write=False)
    return VaalerPoly(H=H, a=a, b=b)


def eval_A(V: VaalerPoly, x):
    """4 sum_{h odd} a_h cos(2 pi h (x - 1/4))."""
    x = np.asarray(x, dtype=np.float64)
    h = np.arange(1, V.H + 1)
    shifted = np.mod(x, 1.0)[..., None] - 0.25
    value = 4.0 * (np.cos(2.0 * np.pi * h * shifted) * V.a[1:]).sum(axis=-1)
    return float(value) if value.ndim == 0 else value


def eval_B(V: VaalerPoly, x):
    """2 (b_0 + 2 sum_{h even} b_h cos(2 pi h x))."""
    x = np.asarray(x, dtype=np.float64)
    h = np.arange(1, V.H + 1)
    angle = 2.0 * np.pi * h * np.mod(x, 1.0)[..., None]
    value = 2.0 * (V.b[0] + 2.0 * (np.cos(angle) * V.b[1:]).sum(axis=-1))
    return float(value) if value.ndim == 0 else value


def eval_complex(V: VaalerPoly, x) -> tuple[complex, complex]:
    """Two-sided complex evaluation of (A_H(x), B_H(x)); imaginary parts cancel."""
    x = float(x)
    A = 0j
    B = 2.0 * V.b[0] + 0j
    for h in range(1, V.H + 1):
        for sign in (1, -1):
            A += 2.0 * V.a[h] * np.exp(2j * np.pi * sign * h * (x - 0.25))
            B += 2.0 * V.b[h] * np.exp(2j * np.pi * sign * h * x)
    return complex(A), complex(B)


def chi_of(x) -> np.ndarray:
    frac = np.mod(np.asarray(x, dtype=np.float64), 1.0)
    return np.where(frac < 0.5, 1.0, -1.0)


@dataclass(frozen=True)
class EnvelopeReport:
    H: int
    grid_size: int
    points: int
    max_slack: float
    min_B: float
    passed: bool


def verify_envelope(
    H: int, grid_size: int = 100_000, exclusion_delta: float = 1e-6, tolerance: float = 1e-9
) -> EnvelopeReport:
    """max over the grid of |chi - A_H| - B_H, away from 0 and 1/2."""
    if grid_size < 1 or exclusion_delta < 0:
        raise ConstraintViolation(
            f"need grid_size >= 1 and exclusion_delta >= 0, got {grid_size}, {exclusion_delta}"
        )
    V = build_vaaler(H)
    x = np.arange(grid_size, dtype=np.float64) / grid_size
    keep = (
        (x > exclusion_delta)
        & (np.abs(x - 0.5) > exclusion_delta)
        & (x < 1.0 - exclusion_delta)
    )
    x = x[keep]
    if x.size == 0:
        raise ConstraintViolation(
            f"no grid points left outside the {exclusion_delta:g}-neighbourhoods"
        )
    slack = np.empty(x.size)
    B_values = np.empty(x.size)
    step = max(1, (1 << 22) // H)
    for lo in range(0, x.size, step):
        part = x[lo : lo + step]
        B_part = eval_B(V, part)
        slack[lo : lo + step] = np.abs(chi_of(part) - eval_A(V, part)) - B_part
        B_values[lo : lo + step] = B_part
    max_slack = float(slack.max())
    passed = max_slack <= tolerance
    if not passed:
        logger.warning("envelope violated for H=%d: max slack %.3e", H, max_slack)
    return EnvelopeReport(
        H=H,
        grid_size=grid_size,
        points=int(x.size),
        max_slack=max_slack,
        min_B=float(B_values.min()),
        passed=passed,
    )
