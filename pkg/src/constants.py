"""Shared constants used across hardyseq modules."""

from typing import Final

# Sequence file format
SEQUENCE_MAGIC: Final[str] = "# hardyseq v1"
SIGN_CHARS: Final[dict[int, str]] = {1: "+", -1: "-"}
CHAR_SIGNS: Final[dict[str, int]] = {"+": 1, "-": -1}

# CLI exit codes
EXIT_OK: Final[int] = 0
EXIT_ASSERTION: Final[int] = 1
EXIT_INPUT: Final[int] = 2
EXIT_PRECISION: Final[int] = 3

# Bound evaluators are written with implied constant 1.
ERDOS_TURAN_CONSTANT: Final[float] = 1.0
KOKSMA_SZUSZ_CONSTANT: Final[float] = 1.0

# Empirical constants: |sum| <= C * bound-shape on the test grids.
# Kusmin-Landau: |sum e(g(n))| <= cot(pi lambda / 2) <= 2 / (pi lambda).
KUSMIN_LANDAU_EMPIRICAL: Final[float] = 1.0
VAN_DER_CORPUT_EMPIRICAL: Final[float] = 2.0
KOKSMA_SZUSZ_EMPIRICAL: Final[dict[int, float]] = {1: 4.0, 2: 4.0, 3: 8.0}
VAALER_A_DECAY: Final[float] = 0.3183098861837907  # 1/pi
VAALER_B_DECAY: Final[float] = 1.0

# Measure labels used in witness records
MEASURE_W: Final[str] = "W"
MEASURE_C: Final[str] = "C"
