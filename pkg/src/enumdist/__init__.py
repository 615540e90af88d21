"""Stage-indexed universal distributions, randomness tests and information bounds."""

from .core import INF, ONE, ZERO, Dyadic, ElemFn, Lattice, lognorm, lognorm_or_inf
from .machine import ISA_VERSION, MachineConfig, RunOutcome, Status, Variant, run_monotone, run_prefix

__all__ = [
    "INF", "ONE", "ZERO", "Dyadic", "ElemFn", "Lattice", "lognorm", "lognorm_or_inf",
    "ISA_VERSION", "MachineConfig", "RunOutcome", "Status", "Variant", "run_monotone", "run_prefix",
]
