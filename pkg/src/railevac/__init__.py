"""Passenger evacuation planning for disrupted railway networks."""

from importlib.resources import files

from .cost import CostModel, CostParams, build_connection_matrix, build_cost_matrix, haversine
from .errors import InfeasiblePrecheck, RailEvacError, ValidationError
from .network import RailLine, RailNetwork, Station, adjacency_pairs, load_network
from .oracles import brute_force_oracle, greedy_oracle
from .report import ScenarioReport, emit, summarize
from .scenario import Scenario, build_solver_inputs, derive_window_load
from .solver import EvacuationPlan, Flow, PlanStatus, SolverInstance, solve

__version__ = "0.1.0"

SAMPLE_DIR = files(__package__) / "data" / "sample"

__all__ = [
    "CostModel", "CostParams", "EvacuationPlan", "Flow", "InfeasiblePrecheck",
    "PlanStatus", "RailEvacError", "RailLine", "RailNetwork", "SAMPLE_DIR", "Scenario",
    "ScenarioReport", "SolverInstance", "Station", "ValidationError", "adjacency_pairs",
    "brute_force_oracle", "build_connection_matrix", "build_cost_matrix",
    "build_solver_inputs", "derive_window_load", "emit", "greedy_oracle", "haversine",
    "load_network", "solve", "summarize",
]
