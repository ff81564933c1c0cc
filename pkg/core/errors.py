"""Exception hierarchy shared by every package.

Each error carries a stable ``code`` (the class name) used in the CLI's
machine-readable error JSON.
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class NodalRectError(Exception):
    """Base class for all solver errors."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": self.code, "message": self.message}
        payload.update({k: v for k, v in self.details.items() if v is not None})
        return payload


class ConfigError(NodalRectError):
    """Malformed run configuration. ``key`` names the offending entry."""

    def __init__(self, key: Optional[str], message: str):
        super().__init__(message, key=key)
        self.key = key


# geometry
class InvalidParameter(NodalRectError):
    pass


class NonEvaluableCurve(NodalRectError):
    pass


class OutOfRange(NodalRectError):
    pass


class OutsideDomain(NodalRectError):
    pass


class DegenerateFoot(NodalRectError):
    pass


# discretize / eigensolve
class FoldedMesh(NodalRectError):
    pass


class FactorizationFailure(NodalRectError):
    pass


class NoConvergence(NodalRectError):
    pass


class DimensionMismatch(NodalRectError):
    pass


class InvalidVector(NodalRectError):
    pass


# adiabatic
class ResonantDenominator(NodalRectError):
    pass


class NoRoot(NodalRectError):
    pass


class MultipleRoots(NodalRectError):
    pass


# nodal
class DisconnectedNodalSet(NodalRectError):
    pass


class ClosedLoopDetected(NodalRectError):
    pass


class VanishingTransversal(NodalRectError):
    pass


# certify / partition
class NoValidInterval(NodalRectError):
    pass


class NotFlat(NodalRectError):
    pass


class NonGraphCurve(NodalRectError):
    pass
