"""Exception types mapped to CLI exit codes (validation=2, numerical=3, io=4)."""

from __future__ import annotations


class ValidationError(ValueError):
    """Input data or configuration violates a documented precondition."""


class SchemaError(ValidationError):
    """Input file does not match the expected column schema."""


class NumericalAbortError(RuntimeError):
    """A sampler block produced non-finite values."""

    def __init__(self, sweep: int, arm: int, block: str):
        self.sweep = sweep
        self.arm = arm
        self.block = block
        super().__init__(
            f"non-finite values in block '{block}' (arm {arm}, sweep {sweep})"
        )


class DegenerateAllocationError(NumericalAbortError):
    """Cluster allocation hit an all-zero probability row."""

    def __init__(self, unit: int, factor: int, sweep: int = -1, arm: int = -1):
        self.unit = unit
        self.factor = factor
        RuntimeError.__init__(
            self,
            f"degenerate cluster-allocation probabilities for unit {unit}, "
            f"factor {factor} (arm {arm}, sweep {sweep})",
        )
        self.sweep = sweep
        self.arm = arm
        self.block = "allocation"
