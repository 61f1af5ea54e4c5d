"""avionet: deterministic event-driven link-level simulator for AFDX and
static-routed Ethernet avionics networks."""

from .configio import (
    ConfigParseError,
    ConfigSchemaError,
    ReportDocument,
    parse_config,
    serialize_config,
    write_report,
    write_run_files,
)
from .engine import RunOptions, SimulationResult, run
from .metrics import FomStats, fit_linear, summarize
from .netmodel import (
    LinkDecl,
    NetworkConfig,
    NetworkValidationError,
    NodeDecl,
    NodeKind,
    Protocol,
    SwitchDecl,
    ValidatedNetwork,
    VlDecl,
    analytic_min_delay_ns,
    build_routing_tables,
    propagation_delay_ns,
    transmission_time_ns,
    validate_network,
)

__all__ = [
    "ConfigParseError",
    "ConfigSchemaError",
    "FomStats",
    "LinkDecl",
    "NetworkConfig",
    "NetworkValidationError",
    "NodeDecl",
    "NodeKind",
    "Protocol",
    "ReportDocument",
    "RunOptions",
    "SimulationResult",
    "SwitchDecl",
    "ValidatedNetwork",
    "VlDecl",
    "analytic_min_delay_ns",
    "build_routing_tables",
    "fit_linear",
    "parse_config",
    "propagation_delay_ns",
    "run",
    "serialize_config",
    "summarize",
    "transmission_time_ns",
    "validate_network",
    "write_report",
    "write_run_files",
]

__version__ = "0.1.0"
