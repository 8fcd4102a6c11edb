"""
Rotational equations of motion.

Body frame (Euler's equation):
    J ω̇ + ω × J ω = τ

Generalized coordinates, from the Lagrangian T = ½ q̇ᵀ SᵀJS q̇ with Q = Sᵀτ:
    SᵀJS q̈ + SᵀJṠq̇ + ṠᵀJSq̇ − [q̇ᵀ(∂ᵢS)ᵀJSq̇]ᵢ = Sᵀτ

When S is nonsingular the two agree: S q̈ + Ṡ q̇ = ω̇. The generalized form is
solved directly with a Cholesky factorization of the mass matrix SᵀJS.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.transform import Rotation

from rigidsim.charts import GenCoords, KinematicsEval, evaluate_kinematics, rotation_matrix
from rigidsim.constants import GIMBAL_TOL, INERTIA_SYMMETRY_TOL
from rigidsim.errors import GimbalLock, InvalidInertia
from rigidsim.lin3 import as_mat3, as_vec3, is_finite3, max_abs

logger = logging.getLogger(__name__)

_ZERO3 = np.zeros(3)


def validate_inertia(J, warn: bool = False) -> np.ndarray:
    """
    Check J is symmetric (relative slack INERTIA_SYMMETRY_TOL) and positive
    definite via its leading principal minors. Raises InvalidInertia.
    """
    try:
        J = as_mat3(J)
    except ValueError as exc:
        raise InvalidInertia(str(exc)) from exc
    if not is_finite3(J):
        raise InvalidInertia("Inertia matrix has non-finite entries")
    scale = max_abs(J)
    asym = max_abs(J - J.T)
    if asym > INERTIA_SYMMETRY_TOL * scale:
        raise InvalidInertia(
            f"Inertia matrix is not symmetric (max |J - Jᵀ| = {asym:.3e})",
            details={"asymmetry": asym},
        )
    minors = (J[0, 0], J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0], float(np.linalg.det(J)))
    if any(m <= 0.0 for m in minors):
        raise InvalidInertia(
            "Inertia matrix is not positive definite",
            hint="Leading principal minors must all be positive.",
            details={"minors": [float(m) for m in minors]},
        )
    if warn:
        p = np.linalg.eigvalsh(J)
        if p[0] + p[1] < p[2] * (1.0 - 1e-12):
            logger.warning("Principal moments %s violate the triangle inequality (not a physical body)", p.tolist())
    return J


@dataclass(frozen=True, eq=False)
class TorqueProfile:
    """Body-frame torque τ(t). Build with the classmethods."""

    kind: str = "zero"
    value: np.ndarray = field(default_factory=lambda: _ZERO3.copy())
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    axis: np.ndarray = field(default_factory=lambda: _ZERO3.copy())
    magnitude: float = 0.0
    t_on: float = 0.0
    t_off: float = 0.0

    @classmethod
    def zero(cls) -> "TorqueProfile":
        return cls()

    @classmethod
    def constant(cls, value) -> "TorqueProfile":
        v = as_vec3(value)
        if not is_finite3(v):
            raise ValueError("Constant torque must be finite")
        return cls(kind="constant", value=v.copy())

    @classmethod
    def piecewise_linear(cls, points: Sequence[Tuple[float, Sequence[float]]]) -> "TorqueProfile":
        if not points:
            raise ValueError("Piecewise-linear torque needs at least one (t, tau) point")
        times = np.array([float(t) for t, _ in points])
        values = np.array([as_vec3(v) for _, v in points])
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("Piecewise-linear torque times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("Piecewise-linear torque must be finite")
        return cls(kind="piecewise_linear", times=times, values=values)

    @classmethod
    def spin_up(cls, axis, magnitude: float, t_on: float, t_off: float) -> "TorqueProfile":
        a = as_vec3(axis)
        n = float(np.linalg.norm(a))
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("Spin-up axis must be a finite non-zero vector")
        if not math.isfinite(magnitude):
            raise ValueError("Spin-up magnitude must be finite")
        if t_off < t_on:
            raise ValueError("Spin-up needs t_off >= t_on")
        return cls(kind="spin_up", axis=a / n, magnitude=float(magnitude), t_on=float(t_on), t_off=float(t_off))

    def at(self, t: float) -> np.ndarray:
        if self.kind == "zero":
            return _ZERO3
        if self.kind == "constant":
            return self.value
        if self.kind == "piecewise_linear":
            # np.interp holds the end values outside the breakpoints
            return np.array([np.interp(t, self.times, self.values[:, i]) for i in range(3)])
        if self.kind == "spin_up":
            if self.t_on <= t < self.t_off:
                return self.magnitude * self.axis
            return _ZERO3
        raise ValueError(f"Unknown torque kind '{self.kind}'")


@dataclass(frozen=True, eq=False)
class RigidBodyParams:
    J: np.ndarray
    torque: TorqueProfile = field(default_factory=TorqueProfile.zero)

    def __post_init__(self):
        object.__setattr__(self, "J", validate_inertia(self.J, warn=True).copy())


@dataclass(frozen=True, eq=False)
class LagrangianTerms:
    mass_matrix: np.ndarray      # SᵀJS
    velocity_terms: np.ndarray   # SᵀJṠq̇ + ṠᵀJSq̇
    config_gradient: np.ndarray  # ∂T/∂q = [q̇ᵀ(∂ᵢS)ᵀJSq̇]ᵢ


def euler_rhs(J, omega, tau) -> np.ndarray:
    """ω̇ = J⁻¹(τ − ω × Jω)."""
    J = validate_inertia(J)
    return _euler_rhs(J, as_vec3(omega), as_vec3(tau))


def _euler_rhs(J: np.ndarray, omega: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return np.linalg.solve(J, tau - np.cross(omega, J @ omega))


def kinetic_energy(J, omega) -> float:
    J = validate_inertia(J)
    omega = as_vec3(omega)
    return 0.5 * float(omega @ J @ omega)


def generalized_force(c: GenCoords, tau) -> np.ndarray:
    return evaluate_kinematics(c).S.T @ as_vec3(tau)


def generalized_momentum(c: GenCoords, qdot, J) -> np.ndarray:
    J = validate_inertia(J)
    S = evaluate_kinematics(c).S
    return S.T @ (J @ (S @ as_vec3(qdot)))


def _lagrangian_terms(k: KinematicsEval, qdot: np.ndarray, J: np.ndarray) -> LagrangianTerms:
    S = k.S
    Sdot = k.sdot(qdot)
    h = J @ (S @ qdot)
    mass = S.T @ J @ S
    return LagrangianTerms(
        mass_matrix=0.5 * (mass + mass.T),
        velocity_terms=S.T @ (J @ (Sdot @ qdot)) + Sdot.T @ h,
        config_gradient=k.partial_columns(qdot).T @ h,
    )


def lagrangian_terms(c: GenCoords, qdot, J) -> LagrangianTerms:
    J = validate_inertia(J)
    return _lagrangian_terms(evaluate_kinematics(c), as_vec3(qdot), J)


def solve_generalized_accel(k: KinematicsEval, qdot: np.ndarray, J: np.ndarray, tau: np.ndarray,
                            t: Optional[float] = None) -> np.ndarray:
    """q̈ from the generalized equation of motion, given evaluated kinematics."""
    if abs(k.det) <= GIMBAL_TOL:
        raise GimbalLock(f"S(q) is singular (det S = {k.det:.3e})", t=t, det=k.det)
    S, dS = k.S, k.dS
    JS = J @ S
    h = JS @ qdot
    sdot_qdot = (qdot[0] * dS[0] + qdot[1] * dS[1] + qdot[2] * dS[2]) @ qdot
    # D[i, c] = (∂ᵢS)[:, c]·h, so Ṡᵀh = q̇ᵀD and [q̇ᵀ(∂ᵢS)ᵀh]ᵢ = D q̇
    D = np.array([dS[0].T @ h, dS[1].T @ h, dS[2].T @ h])
    rhs = S.T @ (tau - J @ sdot_qdot) + D @ qdot - qdot @ D
    mass = S.T @ JS
    try:
        factor = cho_factor(0.5 * (mass + mass.T), check_finite=False)
    except LinAlgError as exc:
        raise GimbalLock(
            f"Mass matrix SᵀJS is not positive definite (det S = {k.det:.3e})", t=t, det=k.det
        ) from exc
    return cho_solve(factor, rhs, check_finite=False)


def generalized_accel(c: GenCoords, qdot, params: RigidBodyParams, t: float) -> np.ndarray:
    qdot = as_vec3(qdot)
    return solve_generalized_accel(evaluate_kinematics(c), qdot, params.J, params.torque.at(t), t=t)


def angular_momentum(c: GenCoords, qdot, J) -> Tuple[np.ndarray, np.ndarray]:
    """(body components J S q̇, inertial components Rᵀ J S q̇)."""
    J = validate_inertia(J)
    body = J @ (evaluate_kinematics(c).S @ as_vec3(qdot))
    return body, rotation_matrix(c).T @ body


def torque_free_axisymmetric(J1: float, J3: float, omega0, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Closed-form torque-free motion of J = diag(J1, J1, J3) released from the
    identity attitude with body rate omega0. Returns (ω(t), R(t)).

    ω₁ + iω₂ rotates at λ = (J3 − J1) ω₃ / J1 while ω₃ stays constant. The
    attitude is a rotation about the fixed momentum direction n at Ω = ‖h‖/J1
    composed with a body spin about e₃ at ν = (1 − J3/J1) ω₃.
    """
    w0 = as_vec3(omega0)
    lam = (J3 - J1) * w0[2] / J1
    c, s = math.cos(lam * t), math.sin(lam * t)
    omega = np.array([w0[0] * c - w0[1] * s, w0[0] * s + w0[1] * c, w0[2]])

    h0 = np.array([J1 * w0[0], J1 * w0[1], J3 * w0[2]])
    hn = float(np.linalg.norm(h0))
    n = h0 / hn if hn > 0.0 else np.array([0.0, 0.0, 1.0])
    big_omega = hn / J1
    nu = (1.0 - J3 / J1) * w0[2]
    active = Rotation.from_rotvec(big_omega * t * n) * Rotation.from_rotvec(nu * t * np.array([0.0, 0.0, 1.0]))
    return omega, active.as_matrix().T
