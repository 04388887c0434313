"""Two-layer C-RAN uplink: closed-form sum-rate, Monte-Carlo oracle and
global power-sharing optimization."""

from .sysmodel import (
    SystemConfig,
    Topology,
    PowerSharingVector,
    LinkBudget,
    InfeasibleBudgetError,
    build_link_budget,
    place_topology,
    even_partition,
    load_config,
    parse_config_text,
)
from .closedrate import ClosedFormModel, RateReport, sum_rate
from .mcoracle import OracleSimulator, ergodic_rate, simulate_once, check_lemmas
from .dea import DeaParams, DeaResult, optimize
from .cli import main, run_sweep, reproduce_headline, run_validation

__version__ = "0.1.0"

__all__ = [
    "SystemConfig", "Topology", "PowerSharingVector", "LinkBudget",
    "InfeasibleBudgetError", "build_link_budget", "place_topology",
    "even_partition", "load_config", "parse_config_text",
    "ClosedFormModel", "RateReport", "sum_rate",
    "OracleSimulator", "ergodic_rate", "simulate_once", "check_lemmas",
    "DeaParams", "DeaResult", "optimize",
    "main", "run_sweep", "reproduce_headline", "run_validation",
]
