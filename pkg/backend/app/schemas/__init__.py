# Schemas Package
from .run import (
    DiagnosticStats,
    FinalState,
    PropertyResult,
    ReconstructionSummary,
    RunConfig,
    RunSummary,
    VerificationReport,
    parse_config,
)

__all__ = [
    # Run configuration
    "RunConfig",
    "parse_config",

    # Run results
    "DiagnosticStats",
    "FinalState",
    "ReconstructionSummary",
    "RunSummary",

    # Verification
    "PropertyResult",
    "VerificationReport",
]
