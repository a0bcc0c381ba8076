"""Simulation of malware propagation on device-to-device networks over random street systems."""

from ._validation import (
    ConfigurationError,
    EventCapExceeded,
    InvariantViolation,
    ParameterError,
    PercolationError,
    SimulationEnvironmentError,
)
from .devices import DeviceSet, Role, build_device_set, nearest_street_point, sample_on_streets
from .engine import DynamicsSpec, EpidemicRun, WaitingTimeModel, run_epidemic, simulate, snapshot
from .estimators import SpeedEstimate, SurvivalEstimate, estimate_speed, estimate_survival
from .experiment import ModelParams, build_environment, run_replicas
from .graph import GilbertGraph, build_graph, degree, reaches_radius
from .phase import PhasePoint, SweepPlan, find_critical, survival_fraction, sweep_curve
from .streets import StreetSystem, Window, calibrate_seed_intensity, generate_streets, measure_length

__version__ = "0.1.0"
