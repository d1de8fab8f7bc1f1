"""Steady-state mechanical squeezing in a two-tone driven hybrid cavity.

The package models a single optical cavity coupled to one mechanical mode
and two quantum-well exciton modes.  Driving the cavity on both mechanical
sidebands dresses the optomechanical interaction into a beam-splitter part
(G_minus) and a two-mode-squeezing part (G_plus); the interplay of the two
squeezes a mechanical quadrature below the vacuum level in steady state.

The computation pipeline is: build the linearized drift and diffusion
matrices, gate on strict stability, solve the Lyapunov equation for the
steady-state covariance, and minimize the mechanical quadrature variance
over the measurement angle.  Sweeps repeat this over parameter grids.
"""

from .dynamics import (
    QUADRATURE_ORDER,
    STABILITY_EPS,
    LinearSystem,
    StabilityVerdict,
    build_diffusion,
    build_drift,
    build_linear_system,
    check_stability,
)
from .errors import (
    ConditioningError,
    ConditioningWarning,
    ConfigError,
    ConvergenceError,
    DomainError,
    SimulationError,
    SingularityError,
    StabilityError,
)
from .model import (
    POLE_THRESHOLD,
    DriveTone,
    ExcitonParams,
    SteadyAmplitudes,
    SystemParams,
    drive_amplitude,
    steady_amplitudes,
    thermal_occupation,
)
from .squeezing import (
    SqueezingResult,
    mechanical_block,
    minimize_variance,
    quadrature_variance,
    to_decibel,
)
from .steadystate import (
    RESIDUAL_RTOL,
    check_physical,
    integrate_to_steady_state,
    lyapunov_residual,
    single_mode_determinants,
    solve_lyapunov,
)
from .sweep import (
    FIGURE_IDS,
    SWEEPABLE,
    SweepAxis,
    SweepPoint,
    SweepResult,
    SweepSpec,
    evaluate_point,
    figure_sweep_spec,
    reproduce_figure,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ConditioningError",
    "ConditioningWarning",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "DriveTone",
    "ExcitonParams",
    "FIGURE_IDS",
    "LinearSystem",
    "POLE_THRESHOLD",
    "QUADRATURE_ORDER",
    "RESIDUAL_RTOL",
    "STABILITY_EPS",
    "SWEEPABLE",
    "SimulationError",
    "SingularityError",
    "SqueezingResult",
    "StabilityError",
    "StabilityVerdict",
    "SteadyAmplitudes",
    "SweepAxis",
    "SweepPoint",
    "SweepResult",
    "SweepSpec",
    "SystemParams",
    "build_diffusion",
    "build_drift",
    "build_linear_system",
    "check_physical",
    "check_stability",
    "drive_amplitude",
    "evaluate_point",
    "figure_sweep_spec",
    "integrate_to_steady_state",
    "lyapunov_residual",
    "mechanical_block",
    "minimize_variance",
    "quadrature_variance",
    "reproduce_figure",
    "run_sweep",
    "single_mode_determinants",
    "solve_lyapunov",
    "steady_amplitudes",
    "thermal_occupation",
    "to_decibel",
]
