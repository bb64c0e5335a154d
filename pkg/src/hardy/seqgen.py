"""
Binary sequences e_n = chi(f(n)), chi = +1 on [0, 1/2) and -1 on [1/2, 1).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from errors import BoundaryUnresolved, ConstraintViolation
from hardy.hfunc import SubpolyFunction
from hardy.precision import (
    DEFAULT_POLICY,
    FracBatch,
    FractionalValue,
    PrecisionPolicy,
    eval_frac_batch,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SequenceMeta:
    source: str = ""
    policy: str = ""
    certified: int = 0
    escalations: int = 0


@dataclass(frozen=True, eq=False)
class BinarySequence:
    signs: np.ndarray
    meta: SequenceMeta = field(default_factory=SequenceMeta)

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int8)
        if signs.ndim != 1 or signs.size < 1:
            raise ConstraintViolation("a sequence needs at least one element")
        if not np.all(np.abs(signs) == 1):
            raise ConstraintViolation("sequence elements must be +1 or -1")
        signs = signs.copy()
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_signs(cls, signs, source: str = "") -> "BinarySequence":
        return cls(np.asarray(list(signs), dtype=np.int8), SequenceMeta(source=source))

    def __len__(self) -> int:
        return int(self.signs.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinarySequence):
            return NotImplemented
        return np.array_equal(self.signs, other.signs)

    __hash__ = None

    def prefix(self, n: int) -> "BinarySequence":
        if not 1 <= n <= len(self):
            raise ConstraintViolation(f"prefix length {n} outside [1, {len(self)}]")
        return BinarySequence(self.signs[:n], self.meta)

    def negated(self) -> "BinarySequence":
        return BinarySequence(-self.signs, self.meta)


def chi(v: FractionalValue) -> int:
    """+1 for {x} in [0, 1/2), -1 for {x} in [1/2, 1)."""
    if v.near_boundary and not v.exact:
        raise BoundaryUnresolved(0, 0, v.frac, v.err, v.bits)
    return 1 if v.in_lower_half() else -1


def chi_array(values) -> np.ndarray:
    """Signs for a FracBatch (its certified halves) or for plain fractions in [0, 1)."""
    if isinstance(values, FracBatch):
        lower = values.lower_half
    else:
        lower = np.asarray(values, dtype=np.float64) < 0.5
    return np.where(lower, 1, -1).astype(np.int8)


def generate_sequence(
    f: SubpolyFunction,
    N: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    workers: int | None = None,
) -> BinarySequence:
    if N < 1:
        raise ConstraintViolation(f"N must be positive, got {N}")
    batch = eval_frac_batch(f, np.arange(1, N + 1, dtype=np.int64), policy, workers=workers)
    if batch.certified:
        logger.info(
            "Generated %d terms of %s (%d via certified kernel, %d escalated)",
            N,
            f,
            batch.certified,
            batch.escalations,
        )
    meta = SequenceMeta(str(f), policy.describe(), batch.certified, batch.escalations)
    return BinarySequence(chi_array(batch), meta)
