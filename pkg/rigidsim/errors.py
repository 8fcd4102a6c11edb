"""
Exception hierarchy for rigidsim.
Library code raises these; only the CLI turns them into exit codes.
"""

from typing import Any, Dict, List, Optional


class RigidSimError(RuntimeError):
    def __init__(self, message: str, *, hint: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.hint = hint
        self.details = details or {}
        # Filled in by the simulators when a run aborts part way
        self.trajectory: List[Any] = []

    def __str__(self) -> str:
        base = super().__str__()
        if self.hint:
            return f"{base}\nHint: {self.hint}"
        return base


class SingularMatrix(RigidSimError):
    pass


class DomainError(RigidSimError):
    """Coordinates outside the chart domain (e.g. reduced quaternion with |v| >= 1)."""


class GimbalLock(RigidSimError):
    """The kinematic matrix S(q) is singular (|det S| <= gimbal tolerance)."""

    def __init__(self, message: str, *, t: Optional[float] = None, det: Optional[float] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.t = t
        self.det = det


class AmbiguousAttitude(GimbalLock):
    """The target Euler chart cannot split the attitude into unique angles."""


class InvalidInertia(RigidSimError):
    pass


class NonFiniteDerivative(RigidSimError):
    pass


class GridMismatch(RigidSimError):
    pass


class ConfigError(RigidSimError):
    pass
