"""Exception types shared across the package."""


class NsauditError(Exception):
    """Base class for all package errors."""


class ConfigError(NsauditError):
    """Malformed or incomplete run configuration."""


class SnapshotFormatError(NsauditError):
    """Corrupt or unsupported snapshot / table file."""


class NumericalBlowupError(NsauditError):
    """NaN or Inf appeared during time integration."""

    def __init__(self, t, detail=""):
        self.t = t
        super().__init__(f"non-finite value at t={t:.6g}" + (f" ({detail})" if detail else ""))


class NotContractiveError(NsauditError):
    """Neumann iteration diverged (operator not a contraction)."""


class DecayError(NsauditError):
    """Sampled line function does not decay toward the window edges."""
