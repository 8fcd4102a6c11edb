"""
Attitude charts: generalized coordinates q, kinematic matrix S(q) with
ω = S(q) q̇ (body-frame angular velocity), analytic partials ∂S/∂qᵢ, closed-form
det S, and conversion to and from direction-cosine matrices.

Rotation matrices R map inertial components to body components and satisfy
Ṙ = −ω^× R along any path q(t) with ω = S(q) q̇.

Charts:
  euler321  q = [Φ, Θ, Ψ]     R = R₁(Φ) R₂(Θ) R₃(Ψ)        det S = cos Θ
  euler313  q = [Ψ, Θ, Φ]     R = R₃(Ψ) R₁(Θ) R₃(Φ)        det S = sin Θ
  quat      q = [q₂, q₃, q₄]  q₁ = √(1 − ‖q‖²) > 0          det S = 8 / q₁
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from rigidsim.constants import GIMBAL_TOL, QUAT_MIN_SCALAR
from rigidsim.errors import AmbiguousAttitude, DomainError, GimbalLock
from rigidsim.lin3 import IDENTITY3, as_vec3, is_finite3, skew, solve3

logger = logging.getLogger(__name__)

_BASIS = (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]))


class Chart(str, Enum):
    EULER321 = "euler321"
    EULER313 = "euler313"
    QUAT = "quat"


_CHART_ALIASES = {
    "euler321": Chart.EULER321,
    "321": Chart.EULER321,
    "euler313": Chart.EULER313,
    "313": Chart.EULER313,
    "quat": Chart.QUAT,
    "quatreduced": Chart.QUAT,
    "quaternion": Chart.QUAT,
}


def parse_chart(name) -> Chart:
    if isinstance(name, Chart):
        return name
    key = str(name).strip().lower().replace("_", "").replace("-", "")
    if key not in _CHART_ALIASES:
        raise ValueError(f"Unknown chart '{name}'. Use euler321, euler313 or quat.")
    return _CHART_ALIASES[key]


@dataclass(frozen=True, eq=False)
class GenCoords:
    chart: Chart
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "chart", parse_chart(self.chart))
        object.__setattr__(self, "q", as_vec3(self.q).copy())

    def with_q(self, q) -> "GenCoords":
        return GenCoords(self.chart, q)


@dataclass(frozen=True, eq=False)
class KinematicsEval:
    S: np.ndarray
    dS: Tuple[np.ndarray, np.ndarray, np.ndarray]
    det: float

    def column(self, i: int) -> np.ndarray:
        return self.S[:, i]

    def sdot(self, qdot) -> np.ndarray:
        # Ṡ = Σᵢ q̇ᵢ ∂S/∂qᵢ
        return qdot[0] * self.dS[0] + qdot[1] * self.dS[1] + qdot[2] * self.dS[2]

    def partial_columns(self, qdot) -> np.ndarray:
        # [∂₁S q̇  ∂₂S q̇  ∂₃S q̇]
        return np.column_stack([d @ qdot for d in self.dS])


def elementary_rotation(axis: int, angle: float) -> np.ndarray:
    """Frame rotation Rᵢ(α) about body axis 1, 2 or 3."""
    c = math.cos(angle)
    s = math.sin(angle)
    if axis == 1:
        return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])
    if axis == 2:
        return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
    if axis == 3:
        return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError("`axis` must be 1, 2 or 3.")


def wrap_angle(a: float) -> float:
    """Map an angle into (−π, π]."""
    return a - 2.0 * math.pi * math.ceil((a - math.pi) / (2.0 * math.pi))


def quat_from_rotation(R) -> np.ndarray:
    """Scalar-first unit quaternion [q₁, q₂, q₃, q₄] with q₁ ≥ 0 for a frame rotation R."""
    # scipy works with active rotations; our frame rotation is the transpose
    x, y, z, w = Rotation.from_matrix(np.asarray(R, dtype=float).T).as_quat()
    quat = np.array([w, x, y, z])
    if quat[0] < 0.0:
        quat = -quat
    return quat / np.linalg.norm(quat)


def rotation_from_quat(quat) -> np.ndarray:
    """Frame rotation (q₁² − ‖v‖²) I + 2 v vᵀ − 2 q₁ v^× of a scalar-first quaternion."""
    q1 = float(quat[0])
    v = np.asarray(quat[1:], dtype=float)
    return (q1 * q1 - v @ v) * IDENTITY3 + 2.0 * np.outer(v, v) - 2.0 * q1 * skew(v)


class ChartModel:
    """Kinematics of one attitude parameterization."""

    chart: Chart

    def validate(self, q: np.ndarray) -> None:
        if not is_finite3(q):
            raise DomainError(f"Non-finite {self.chart.value} coordinates: {q}")

    def s_matrix(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def s_partials(self, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def s_det(self, q: np.ndarray) -> float:
        raise NotImplementedError

    def rotation_matrix(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def from_rotation(self, R: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def wrap(self, q: np.ndarray) -> np.ndarray:
        return q


class Euler321Model(ChartModel):
    chart = Chart.EULER321

    def s_matrix(self, q):
        sphi, cphi = math.sin(q[0]), math.cos(q[0])
        sth, cth = math.sin(q[1]), math.cos(q[1])
        return np.array([
            [1.0, 0.0, -sth],
            [0.0, cphi, sphi * cth],
            [0.0, -sphi, cphi * cth],
        ])

    def s_partials(self, q):
        sphi, cphi = math.sin(q[0]), math.cos(q[0])
        sth, cth = math.sin(q[1]), math.cos(q[1])
        d_phi = np.array([
            [0.0, 0.0, 0.0],
            [0.0, -sphi, cphi * cth],
            [0.0, -cphi, -sphi * cth],
        ])
        d_theta = np.array([
            [0.0, 0.0, -cth],
            [0.0, 0.0, -sphi * sth],
            [0.0, 0.0, -cphi * sth],
        ])
        return d_phi, d_theta, np.zeros((3, 3))

    def s_det(self, q):
        return math.cos(q[1])

    def rotation_matrix(self, q):
        return elementary_rotation(1, q[0]) @ elementary_rotation(2, q[1]) @ elementary_rotation(3, q[2])

    def from_rotation(self, R):
        cth = math.hypot(R[0, 0], R[0, 1])
        if cth <= GIMBAL_TOL:
            raise AmbiguousAttitude(
                "3-2-1 angles are not unique at this attitude (cos Θ = 0)",
                det=cth,
                hint="Bank and azimuth cannot be separated at ±90° elevation; use the quat chart.",
            )
        return np.array([
            math.atan2(R[1, 2], R[2, 2]),
            math.atan2(-R[0, 2], cth),
            math.atan2(R[0, 1], R[0, 0]),
        ])

    def wrap(self, q):
        return np.array([wrap_angle(q[0]), q[1], wrap_angle(q[2])])


class Euler313Model(ChartModel):
    chart = Chart.EULER313

    def s_matrix(self, q):
        spsi, cpsi = math.sin(q[0]), math.cos(q[0])
        sth, cth = math.sin(q[1]), math.cos(q[1])
        return np.array([
            [0.0, cpsi, spsi * sth],
            [0.0, -spsi, cpsi * sth],
            [1.0, 0.0, cth],
        ])

    def s_partials(self, q):
        spsi, cpsi = math.sin(q[0]), math.cos(q[0])
        sth, cth = math.sin(q[1]), math.cos(q[1])
        d_psi = np.array([
            [0.0, -spsi, cpsi * sth],
            [0.0, -cpsi, -spsi * sth],
            [0.0, 0.0, 0.0],
        ])
        d_theta = np.array([
            [0.0, 0.0, spsi * cth],
            [0.0, 0.0, cpsi * cth],
            [0.0, 0.0, -sth],
        ])
        return d_psi, d_theta, np.zeros((3, 3))

    def s_det(self, q):
        return math.sin(q[1])

    def rotation_matrix(self, q):
        return elementary_rotation(3, q[0]) @ elementary_rotation(1, q[1]) @ elementary_rotation(3, q[2])

    def from_rotation(self, R):
        sth = math.hypot(R[2, 0], R[2, 1])
        if sth <= GIMBAL_TOL:
            raise AmbiguousAttitude(
                "3-1-3 angles are not unique at this attitude (sin Θ = 0)",
                det=sth,
                hint="Precession and spin cannot be separated at zero nutation; use the quat chart.",
            )
        return np.array([
            math.atan2(R[0, 2], R[1, 2]),
            math.atan2(sth, R[2, 2]),
            math.atan2(R[2, 0], -R[2, 1]),
        ])

    def wrap(self, q):
        return np.array([wrap_angle(q[0]), q[1], wrap_angle(q[2])])


class QuatReducedModel(ChartModel):
    chart = Chart.QUAT

    def validate(self, q):
        super().validate(q)
        n2 = float(q @ q)
        if n2 >= 1.0:
            raise DomainError(
                f"Reduced Euler parameters need q2²+q3²+q4² < 1, got {n2:.17g}",
                hint="The chart excludes the eigenangle θ = π (q1 = 0).",
                details={"norm_sq": n2},
            )

    @staticmethod
    def scalar(q) -> float:
        return math.sqrt(1.0 - float(q @ q))

    def s_matrix(self, q):
        q1 = self.scalar(q)
        return 2.0 * (q1 * IDENTITY3 + np.outer(q, q) / q1 - skew(q))

    def s_partials(self, q):
        q1 = self.scalar(q)
        vvT = np.outer(q, q)
        out = []
        for i in range(3):
            e = _BASIS[i]
            # ∂q₁/∂qᵢ = −qᵢ/q₁
            d = (
                -(q[i] / q1) * IDENTITY3
                + (np.outer(e, q) + np.outer(q, e)) / q1
                + vvT * (q[i] / q1 ** 3)
                - skew(e)
            )
            out.append(2.0 * d)
        return tuple(out)

    def s_det(self, q):
        return 8.0 / self.scalar(q)

    def lift(self, q) -> np.ndarray:
        return np.concatenate(([self.scalar(q)], q))

    def rotation_matrix(self, q):
        return rotation_from_quat(self.lift(q))

    def from_rotation(self, R):
        quat = quat_from_rotation(R)
        if quat[0] < QUAT_MIN_SCALAR:
            raise DomainError(
                f"Attitude is a half-turn (q1 = {quat[0]:.3e}); reduced Euler parameters exclude θ = π",
                hint="Pick another chart or perturb the initial attitude.",
            )
        return quat[1:].copy()


_MODELS: Dict[Chart, ChartModel] = {
    Chart.EULER321: Euler321Model(),
    Chart.EULER313: Euler313Model(),
    Chart.QUAT: QuatReducedModel(),
}


def chart_model(chart) -> ChartModel:
    return _MODELS[parse_chart(chart)]


def _resolve(c: GenCoords, model: Optional[ChartModel]) -> ChartModel:
    m = model if model is not None else _MODELS[c.chart]
    m.validate(c.q)
    return m


def evaluate_kinematics(c: GenCoords, model: Optional[ChartModel] = None) -> KinematicsEval:
    m = _resolve(c, model)
    return KinematicsEval(S=m.s_matrix(c.q), dS=tuple(m.s_partials(c.q)), det=m.s_det(c.q))


def s_matrix(c: GenCoords) -> np.ndarray:
    return _resolve(c, None).s_matrix(c.q)


def s_partials(c: GenCoords) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return tuple(_resolve(c, None).s_partials(c.q))


def s_det(c: GenCoords) -> float:
    return _resolve(c, None).s_det(c.q)


def omega_from(c: GenCoords, qdot) -> np.ndarray:
    return s_matrix(c) @ as_vec3(qdot)


def qdot_from_omega(c: GenCoords, omega) -> np.ndarray:
    m = _resolve(c, None)
    det = m.s_det(c.q)
    if abs(det) <= GIMBAL_TOL:
        raise GimbalLock(
            f"S(q) is singular for {c.chart.value} at q = {c.q.tolist()} (det S = {det:.3e})",
            det=det,
        )
    return solve3(m.s_matrix(c.q), as_vec3(omega))


def rotation_matrix(c: GenCoords) -> np.ndarray:
    return _resolve(c, None).rotation_matrix(c.q)


def quat_lift(c: GenCoords) -> np.ndarray:
    if c.chart is not Chart.QUAT:
        raise ValueError(f"quat_lift needs quat coordinates, got {c.chart.value}")
    m = _resolve(c, None)
    return m.lift(c.q)


def wrap_coords(c: GenCoords) -> GenCoords:
    return c.with_q(_MODELS[c.chart].wrap(c.q))


def chart_convert(c: GenCoords, target) -> GenCoords:
    target = parse_chart(target)
    R = rotation_matrix(c)
    q = _MODELS[target].from_rotation(R)
    logger.debug("Converted %s %s -> %s %s", c.chart.value, c.q.tolist(), target.value, q.tolist())
    return GenCoords(target, q)
