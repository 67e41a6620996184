"""Certified bounds for the cheapest-hub (simplified Wasserstein barycenter) problem."""

from .bounds import BoundsCertificate, certify, lower_bound, round_column0, round_perron
from .facial import FacialBasis, GangsterIndex, build_facial_basis, build_gangster, scale_objective
from .instance import (
    EDMData,
    Instance,
    InstanceError,
    Selection,
    build_edm,
    gen_random,
    gen_wheel,
    load_instance,
    objective_value,
    save_instance,
    wasserstein_value,
    wheel_fixture,
)
from .oracle import GapReport, brute_force, gap_check
from .solver import SolveReport, SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "BoundsCertificate", "EDMData", "FacialBasis", "GangsterIndex", "GapReport", "Instance",
    "InstanceError", "Selection", "SolveReport", "SolverConfig", "brute_force", "build_edm",
    "build_facial_basis", "build_gangster", "certify", "gap_check", "gen_random", "gen_wheel",
    "load_instance", "lower_bound", "objective_value", "round_column0", "round_perron",
    "save_instance", "scale_objective", "solve", "wasserstein_value", "wheel_fixture",
]
