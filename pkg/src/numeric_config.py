"""
Numeric configuration for hardyseq kernels: precision policy, guards and chunking.
"""

import os

CONFIG = {
    # certified {f(n)} kernel
    "guard_bits": 64,
    "max_bits": 4096,
    "boundary_tolerance": 2.0**-48,
    "max_err": 2.0**-40,
    "float_error_scale": 2.0**-44,
    "exact_root_max_denominator": 64,
    "monotonicity_scan_exponent": 64,
    # derivatives
    "max_derivative_order": 16,
    # measures
    "brute_force_w_max_n": 64,
    "brute_force_c_max_n": 40,
    "brute_force_c2_max_n": 64,
    "brute_force_c_max_s": 4,
    "exact_correlation_max_n": 256,
    "correlation_chunk_cells": 1 << 22,
    # discrepancy
    "discrepancy_md_max_dim": 3,
    "discrepancy_md_max_n": 300,
    "discrepancy_md_max_boxes": 200_000,
    "lattice_max_points": 10_000_000,
    # bounds
    "default_eps": 0.05,
    "bound_sample_points": 64,
    # parallelism
    "workers": int(os.environ.get("HARDYSEQ_WORKERS", "1")),
}
