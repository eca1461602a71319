"""Simulation and verification toolkit for deadzone-adapted disturbance
suppression (DADS) adaptive control of matched control-affine systems."""

from .analysis import (
    dads_certificate,
    deadzone_check,
    drift_metric,
    regulation_dichotomy,
    tail_stats,
)
from .baseline import SigmaModParams, SigmaModState, c1_certificate, c1_control, c1_update
from .clf import (
    CLFBundle,
    bundle_from_stabilizer,
    check_assumption_A,
    check_assumption_B,
    double_integrator_clf,
)
from .config import PRESETS, parse_scenario, run_preset, write_scenario
from .dads import (
    DadsParams,
    DadsState,
    adaptation_rate,
    chi,
    dads_control,
    gain_full,
    gain_matched,
    gain_simplified,
)
from .errors import (
    BlowupError,
    ConfigurationError,
    ContractError,
    DadsError,
    DomainError,
    IntegrationError,
    ModelError,
)
from .output import emit_csv
from .sim import Scenario, Trajectory, integrate, refine_check, rk4_step
from .systems import (
    ConstantSignal,
    DisturbanceProfile,
    PiecewiseConstantSignal,
    PlantModel,
    SinusoidSignal,
    ZeroSignal,
    double_integrator_plant,
    plant_rhs,
    signal_eval,
)

__version__ = "0.1.0"
