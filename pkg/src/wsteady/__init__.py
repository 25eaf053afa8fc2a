"""Dissipative preparation of a three-atom W-type steady state in a lossy cavity.

Library layout:
    hilbert    - composite-space bookkeeping and operator algebra
    model      - parameters, Hamiltonians, dissipators, Fourier ground basis
    effective  - adiabatic elimination, rate extraction, closed-form oracles
    dynamics   - rate-equation and full master-equation integrators
    analysis   - steady-state sweeps and the 1-F ~ a/C fit
    config     - flat key=value run configuration
    reporting  - CSV and figure emission
    cli        - wsteady command-line entry point
"""

from .analysis import FitResult, SweepRow, SweepSpec, fit_scaling, run_sweep, time_to_threshold
from .config import ConfigError, RunConfig, initial_state, load_config
from .dynamics import (
    Metrics,
    Trajectory,
    integrate_master,
    integrate_rate,
    metrics,
    rate_steady_state,
    run_full_independent,
    run_full_time_dependent,
    run_rate_method,
)
from .effective import (
    assemble_rate_matrix,
    closed_form_rate,
    compare_rates,
    effective_hamiltonian,
    effective_lindblads,
    numeric_rate,
)
from .hilbert import HilbertSpace
from .model import (
    GROUND_LABELS,
    DegenerateParameterError,
    SystemParams,
    check_weak_field,
    derived_quantities,
    ground_basis,
    preset,
)

__version__ = "0.1.0"

__all__ = [
    "FitResult", "SweepRow", "SweepSpec", "fit_scaling", "run_sweep", "time_to_threshold",
    "ConfigError", "RunConfig", "initial_state", "load_config",
    "Metrics", "Trajectory", "integrate_master", "integrate_rate", "metrics",
    "rate_steady_state", "run_full_independent", "run_full_time_dependent", "run_rate_method",
    "assemble_rate_matrix", "closed_form_rate", "compare_rates",
    "effective_hamiltonian", "effective_lindblads", "numeric_rate",
    "HilbertSpace",
    "GROUND_LABELS", "DegenerateParameterError", "SystemParams", "check_weak_field",
    "derived_quantities", "ground_basis", "preset",
    "__version__",
]
