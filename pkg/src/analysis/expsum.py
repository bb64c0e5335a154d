"""
Exponential sums sum e(theta_n), e(t) = exp(2 pi i t), and evaluators for the
bounds used to control them: Kusmin-Landau, van der Corput (r-th derivative
test), the lambda_r / alpha_r normalisation and the three W growth cases.

Bound evaluators use implied constant 1; the test-suite pins the empirical
constants in ``constants``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import ConstraintViolation
from hardy.hfunc import GrowthInfo, SubpolyFunction, affine_substitute, derivative, growth_exponent
from hardy.precision import DEFAULT_POLICY, PrecisionPolicy, eval_frac_batch
from numeric_config import CONFIG

logger = logging.getLogger(__name__)

PHASE_ERROR = 2.0**-30


def exp_sum(phases) -> complex:
    """Correctly rounded (math.fsum) sum of e(phase) over a 1-D array."""
    phases = np.mod(np.asarray(phases, dtype=np.float64), 1.0)
    angle = 2.0 * np.pi * phases
    return complex(math.fsum(np.cos(angle)), math.fsum(np.sin(angle)))


def weyl_sum(
    f: SubpolyFunction,
    h: int,
    n1: int,
    n2: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> complex:
    """sum_{n1 <= n <= n2} e(h f(n))."""
    if h == 0:
        raise ConstraintViolation("weyl_sum needs a nonzero frequency")
    if n2 < n1:
        raise ConstraintViolation(f"empty range [{n1}, {n2}]")
    batch = eval_frac_batch(f, np.arange(n1, n2 + 1), policy, max_err=PHASE_ERROR / abs(h))
    return exp_sum(h * batch.frac)


@dataclass(frozen=True)
class PhaseSpec:
    f: SubpolyFunction
    h: tuple[int, ...]
    d: tuple[int, ...]

    def __post_init__(self):
        h = tuple(int(x) for x in self.h)
        d = tuple(int(x) for x in self.d)
        if not h or len(h) != len(d):
            raise ConstraintViolation("h and d must be nonempty and of equal length")
        if not any(h):
            raise ConstraintViolation("h must have a nonzero entry")
        if d[0] < 0 or any(x >= y for x, y in zip(d, d[1:])):
            raise ConstraintViolation(f"shifts must be strictly increasing and >= 0, got {d}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "d", d)


def multi_phase_sum(spec: PhaseSpec, M: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """sum_{n <= M} e(h_1 f(n + d_1) + ... + h_s f(n + d_s))."""
    if M < 1:
        raise ConstraintViolation(f"M must be positive, got {M}")
    s = len(spec.h)
    phases = np.zeros(M, dtype=np.float64)
    for hj, dj in zip(spec.h, spec.d):
        if not hj:
            continue
        ns = np.arange(1 + dj, M + dj + 1)
        batch = eval_frac_batch(spec.f, ns, policy, max_err=PHASE_ERROR / (s * abs(hj)))
        phases = np.mod(phases + hj * batch.frac, 1.0)
    return exp_sum(phases)


def linear_form(h, d, k: int) -> int:
    """L_k(h) = sum h_j d_j^k with 0^0 = 1."""
    if len(h) != len(d):
        raise ConstraintViolation("h and d must have equal length")
    return sum(int(hj) * int(dj) ** k for hj, dj in zip(h, d))


def min_nonvanishing_index(h, d) -> int:
    """Smallest k with L_k(h) != 0; at most s - 1 for distinct shifts."""
    if not any(h):
        raise ConstraintViolation("h must have a nonzero entry")
    if any(x >= y for x, y in zip(d, d[1:])):
        raise ConstraintViolation(f"shifts must be strictly increasing, got {tuple(d)}")
    for k in range(len(h)):
        if linear_form(h, d, k):
            return k
    raise RuntimeError(f"all L_k vanish for h={tuple(h)}, d={tuple(d)}")


def falling_factorial(beta: float, u: int) -> float:
    """c_u = beta (beta - 1) ... (beta - u + 1)."""
    return math.prod(beta - i for i in range(u))


def lambda_alpha(
    f: SubpolyFunction, h: int, a: int, P_q: float, r: int, eps: float = CONFIG["default_eps"]
) -> tuple[float, float]:
    """(lambda_r, alpha_r) = (|h| (a P)^(beta - eps) P^-r, (a P)^(2 eps))."""
    if r < 1:
        raise ConstraintViolation(f"r must be >= 1, got {r}")
    if not 0 < eps < 0.125:
        raise ConstraintViolation(f"eps must lie in (0, 1/8), got {eps}")
    if h == 0:
        raise ConstraintViolation("h must be nonzero")
    beta = growth_exponent(f).beta
    scale = a * P_q
    return abs(h) * scale ** (beta - eps) * P_q ** (-r), scale ** (2 * eps)


def kusmin_landau_bound(lam: float) -> float:
    if not 0 < lam <= 0.5:
        raise ConstraintViolation(f"lambda must lie in (0, 1/2], got {lam}")
    return 1.0 / lam


@dataclass(frozen=True)
class BoundInputs:
    lambda_r: float
    alpha_r: float
    r: int
    X: float
    X1: float = 0.0
    bigR: int = 0

    def __post_init__(self):
        if self.lambda_r <= 0 or self.alpha_r < 1:
            raise ConstraintViolation("need lambda_r > 0 and alpha_r >= 1")
        if self.bigR == 0:
            object.__setattr__(self, "bigR", 2 ** (self.r - 1))
        elif self.bigR != 2 ** (self.r - 1):
            raise ConstraintViolation(f"bigR must equal 2^(r-1) = {2 ** (self.r - 1)}")


def bound_inputs(
    f: SubpolyFunction, h: int, a: int, X1: float, X: float, r: int | None = None, b: int = 0
) -> BoundInputs:
    """lambda_r, alpha_r for g(x) = h f(a x + b) measured on [X1, X1 + X]."""
    if h == 0:
        raise ConstraintViolation("h must be nonzero")
    r = max(2, growth_exponent(f).r if r is None else r)
    g_r = derivative(affine_substitute(f, a, b), r)
    xs = np.linspace(X1, X1 + X, CONFIG["bound_sample_points"])
    values = np.abs(h * np.asarray(g_r(xs)))
    lo, hi = float(values.min()), float(values.max())
    if lo <= 0 or not math.isfinite(hi):
        raise ConstraintViolation(f"|g^({r})| is not bounded away from 0 on [{X1}, {X1 + X}]")
    return BoundInputs(lambda_r=lo, alpha_r=hi / lo, r=r, X=X, X1=X1)


def vdc_bound(B: BoundInputs) -> float:
    """X [(a l)^(1/(2R-2)) + (l X^r)^(-1/R) (log X)^((r-1)/R) + (a log^(r-1) X / X)^(1/R)]."""
    if B.r < 2 or B.X < 2:
        raise ConstraintViolation(f"need r >= 2 and X >= 2, got r={B.r}, X={B.X}")
    R, X, r = B.bigR, B.X, B.r
    lam, alpha = B.lambda_r, B.alpha_r
    log_x = math.log(X)
    first = (alpha * lam) ** (1.0 / (2 * R - 2))
    second = (lam * X**r) ** (-1.0 / R) * log_x ** ((r - 1) / R)
    third = (alpha * log_x ** (r - 1) / X) ** (1.0 / R)
    return X * (first + second + third)


def predicted_w_exponent(G: GrowthInfo) -> tuple[float, str]:
    """Exponent of M in the W-case bound matching beta, with the case label."""
    beta = G.beta_exact
    if beta <= 0:
        raise ConstraintViolation("growth exponent 0 has no W prediction")
    if beta <= 0.5:
        return 1.0 - min(0.2, float(beta)), "small"
    if beta < 1:
        return (1.0 + float(beta)) / 2.0, "medium"
    return 1.0 - (G.r - float(beta)) / (2 * G.bigR - 1), "large"


def well_distribution_bound(
    f: SubpolyFunction, a: int, b: int, M: int, H: int, policy: PrecisionPolicy = DEFAULT_POLICY
) -> float:
    """2M/(H+1) + 2 sum_{h<=H} (1/h) |sum_{n<=M} e(h f(a n + b))|, which bounds |U(E, M, a, b)|."""
    if H < 1 or M < 1:
        raise ConstraintViolation(f"need H >= 1 and M >= 1, got H={H}, M={M}")
    g = affine_substitute(f, a, b)
    batch = eval_frac_batch(g, np.arange(1, M + 1), policy, max_err=PHASE_ERROR / H)
    tail = math.fsum(abs(exp_sum(h * batch.frac)) / h for h in range(1, H + 1))
    return 2.0 * M / (H + 1) + 2.0 * tail


@dataclass(frozen=True)
class RobertReport:
    premise_ok: bool
    sum_abs: float
    lower_bound: float
    holds: bool | None


def robert_check(f: SubpolyFunction, h: int, N: int) -> RobertReport:
    """|sum_{n<=N} e(h / f(n))| >= N/8 whenever f(floor(N/4)) >= 4 pi |h|."""
    if h == 0 or N < 1:
        raise ConstraintViolation(f"need h != 0 and N >= 1, got h={h}, N={N}")
    ns = np.arange(1, N + 1)
    values = np.asarray(f(ns), dtype=np.float64)
    if np.any(values <= 0) or np.any(np.diff(values) < 0):
        raise ConstraintViolation(f"{f} must be positive and increasing on [1, {N}]")
    quarter = N // 4
    premise = quarter >= 1 and float(values[quarter - 1]) >= 4 * math.pi * abs(h)
    sum_abs = float(abs(exp_sum(h / values)))
    lower = N / 8
    holds = bool(sum_abs >= lower) if premise else None
    if premise and not holds:
        logger.warning("lower bound fails for %s, h=%d, N=%d: %.4f < %.4f", f, h, N, sum_abs, lower)
    return RobertReport(premise_ok=premise, sum_abs=sum_abs, lower_bound=lower, holds=holds)
