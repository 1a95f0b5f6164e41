"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class GeoredError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class DomainError(GeoredError):
    code = "domain"


class StepExitsDomainError(DomainError):
    code = "fd_step_exits_domain"


class SingularMetricError(GeoredError):
    code = "singular_metric"


class InvariantError(GeoredError):
    """A construction-time or runtime invariant was violated."""

    code = "invariant"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

    def to_dict(self):
        out = super().to_dict()
        if self.residual is not None:
            out["residual"] = float(self.residual)
        return out


class RankDeficiencyError(GeoredError):
    code = "rank_deficient"


class DomainExitError(GeoredError):
    code = "domain_exit"

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time

    def to_dict(self):
        out = super().to_dict()
        out["time"] = self.time
        return out


class DivergenceError(DomainExitError):
    code = "divergence"


class FrameDegenerationError(DomainExitError):
    code = "frame_degenerate"


class NotAdaptedError(GeoredError):
    code = "frame_not_adapted"


class ConfigError(GeoredError):
    code = "config"


class GateFailure(GeoredError):
    """The reduced field does not reproduce the projected full dynamics."""

    code = "reduction_gate"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report

    def to_dict(self):
        out = super().to_dict()
        if self.report is not None:
            out["report"] = self.report.to_dict()
        return out


class ExpressionError(GeoredError):
    code = "expression"

    def __init__(self, message, offset=None, text=None):
        self.offset = offset
        self.text = text
        loc = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{loc}")

    def to_dict(self):
        out = super().to_dict()
        out["offset"] = self.offset
        return out


class ExpressionSyntaxError(ExpressionError):
    code = "syntax"


class UnknownIdentifierError(ExpressionError):
    code = "unknown_identifier"


class EvaluationError(ExpressionError):
    code = "evaluation"
