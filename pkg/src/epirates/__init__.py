"""Estimation of time-since-infection dependent recovery and death
distributions from aggregate epidemic time series.
"""

from .errors import (
    DataValidationError,
    EmptyFeasibleRegionError,
    EmptyWindowError,
    EpiratesError,
    NoCommonGridError,
    ParseError,
)
from .timeseries import EpiDataset, TimeSeries, load_manifest, parse_csv, restrict_window
from .smoother import KernelSmoother, default_bandwidth, evaluate, evaluate_grid, gaussian_kernel
from .gammadist import GammaParams
from .fitter import FitConfig, FitResult, fit, fit_report, predicted_new_deaths, predicted_new_recoveries
from .baseline import BaselineSpec, classical_curve, compare, constant_rate, three_sigma_band
from .epimetrics import (
    EpiContext,
    TransmissionProfile,
    basic_reproduction_number,
    estimate_survival_probability,
    herd_immunity_threshold,
)
from .simulator import SimConfig, SimState, export_dataset, simulate, simulate_classical, simulate_distributed

__version__ = "0.1.0"
