"""Every tunable default in one place.

These are the values the CLI and service fall back to when a parameter
is not supplied; `epirates --show-defaults` prints this table.
"""

DEFAULTS = {
    # smoothing
    "bandwidth_multiplier": 1.0,          # times n^(-1/5)
    # fit mesh
    "shape_max": 40.0,
    "scale_max": 31.0,
    "shape_step": 0.05,
    "scale_step": 0.05,
    # mode window T_l <= (shape-1)*scale <= T_u, by time unit
    "mode_window_days": [3.0, 40.0],
    "mode_window_weeks": [0.5, 4.0],
    # convolution quadrature step, by time unit
    "quadrature_step_days": 0.25,
    "quadrature_step_weeks": 0.05,
    # kernel truncation
    "truncation_tail_mass": 1e-12,
    "truncation_step": 0.25,
    # 3-sigma band sample sizes (onset-to-event survey sizes)
    "survey_sample_size_recovery": 120,
    "survey_sample_size_death": 31,
    # reproduction number
    "latent_period": 0.0,
    "r0_quadrature_step": 0.01,
    # simulation
    "sim_step": 0.1,
}


def mode_window(time_unit: str) -> tuple[float, float]:
    lo, hi = DEFAULTS[f"mode_window_{time_unit}"]
    return lo, hi


def quadrature_step(time_unit: str) -> float:
    return DEFAULTS[f"quadrature_step_{time_unit}"]
