"""Experiment and CLI defaults for hardyseq."""

EXPERIMENT_CONFIG = {
    # dyadic N grids
    "scan_grid": (2**10, 2**16),
    "counterexample_grid": (2**10, 2**17),
    "counterexample_exact_c2_max_n": 2**13,
    # fits
    "min_fit_points": 4,
    "fit_margin": 0.05,
    "sublinear_slope_max": 0.99,
    # correlation search
    "default_mode": "exact",
    "default_order": 2,
    # vaaler verification
    "vaaler_grid_size": 100_000,
    "vaaler_exclusion_delta": 1e-6,
    "vaaler_tolerance": 1e-9,
    # output
    "csv_columns": ["N", "value", "slope_running", "witness_json"],
    "float_format": "%.12g",
}
