"""Exception types shared across the toolkit.

Every error carries a short machine-readable code so the CLI can serialize
failures as structured JSON on stderr.
"""


class ThermidentError(Exception):
    """Base class for all toolkit errors."""

    code = "E_GENERIC"

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self)}


class SchemaError(ThermidentError):
    """Building description (or other input file) violates its schema."""

    code = "E_SCHEMA"


class NetworkError(ThermidentError):
    """RC network cannot be assembled (disconnected node, bad capacitance)."""

    code = "E_NETWORK"


class SimulationError(ThermidentError):
    """Rollout produced NaN/inf or dimensions do not match."""

    code = "E_SIM"


class EstimationError(ThermidentError):
    """Estimator failure (singular solve, covariance loss, non-convergence)."""

    code = "E_ESTIM"


class ConfigError(ThermidentError):
    """Run configuration invalid or referenced paths missing."""

    code = "E_CONFIG"
