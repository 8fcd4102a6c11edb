"""
Fixed-step RK4 for the two formulations of rotational dynamics:

- generalized coordinates: state x = [q, q̇], q̈ from dynamics.generalized_accel
- body frame: state x = [quaternion (scalar first), ω], ω̇ from Euler's equation

Both emit one TrajectorySample per step, including the initial state.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from rigidsim.charts import Chart, GenCoords, KinematicsEval, chart_model, rotation_from_quat
from rigidsim.constants import GIMBAL_TOL
from rigidsim.dynamics import RigidBodyParams, _euler_rhs, solve_generalized_accel
from rigidsim.errors import DomainError, GimbalLock, GridMismatch, NonFiniteDerivative
from rigidsim.lin3 import as_mat3, as_vec3, max_abs
from rigidsim.output_utils import format_time

logger = logging.getLogger(__name__)

Derivative = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    coords: GenCoords
    qdot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "qdot", as_vec3(self.qdot).copy())


@dataclass(frozen=True, eq=False)
class BodyState:
    t: float
    quat: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        quat = np.asarray(self.quat, dtype=float)
        if quat.shape != (4,):
            raise ValueError(f"Expected a 4-element quaternion, got shape {quat.shape}")
        n = float(np.linalg.norm(quat))
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("Attitude quaternion must be finite and non-zero")
        object.__setattr__(self, "quat", quat / n)
        object.__setattr__(self, "omega", as_vec3(self.omega).copy())


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    t: float
    q: np.ndarray
    qdot: np.ndarray
    omega: np.ndarray
    R: np.ndarray
    energy: float
    h_inertial: np.ndarray

    def as_row(self) -> List[float]:
        """Values in TRAJECTORY_COLUMNS order."""
        return [float(self.t), *map(float, self.q), *map(float, self.qdot), *map(float, self.omega),
                *map(float, self.R.reshape(-1)), float(self.energy), *map(float, self.h_inertial)]


@dataclass
class TrajectoryComparison:
    max_rotation_angle_rad: float
    max_omega_diff: float
    t_max_rotation: float
    t_max_omega: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "max_rotation_angle_rad": self.max_rotation_angle_rad,
            "max_omega_diff": self.max_omega_diff,
            "t_max_rotation": self.t_max_rotation,
            "t_max_omega": self.t_max_omega,
        }


def rk4_step(deriv: Derivative, t: float, x, dt: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k1 = _stage(deriv, t, x)
    k2 = _stage(deriv, t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = _stage(deriv, t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = _stage(deriv, t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _stage(deriv: Derivative, t: float, x: np.ndarray) -> np.ndarray:
    k = np.asarray(deriv(t, x), dtype=float)
    if not np.all(np.isfinite(k)):
        raise NonFiniteDerivative(f"Non-finite derivative at t = {t:.17g}", details={"t": t})
    return k


def geodesic_angle(Ra, Rb) -> float:
    """Angle of the relative rotation Raᵀ Rb, in [0, π]."""
    c = 0.5 * (float(np.trace(as_mat3(Ra).T @ as_mat3(Rb))) - 1.0)
    return math.acos(min(1.0, max(-1.0, c)))


def _energy_and_momentum(J: np.ndarray, omega: np.ndarray, R: np.ndarray):
    h = J @ omega
    return 0.5 * float(omega @ h), R.T @ h


def sample_generalized(state: SimState, params: RigidBodyParams) -> TrajectorySample:
    c = state.coords
    model = chart_model(c.chart)
    model.validate(c.q)
    omega = model.s_matrix(c.q) @ state.qdot
    R = model.rotation_matrix(c.q)
    energy, h = _energy_and_momentum(params.J, omega, R)
    return TrajectorySample(t=state.t, q=c.q.copy(), qdot=state.qdot.copy(), omega=omega, R=R, energy=energy, h_inertial=h)


def _quat_rate(quat: np.ndarray, omega: np.ndarray) -> np.ndarray:
    q1, v = quat[0], quat[1:]
    return np.concatenate(([-0.5 * float(v @ omega)], 0.5 * (q1 * omega + np.cross(v, omega))))


def sample_body(state: BodyState, params: RigidBodyParams) -> TrajectorySample:
    # q and qdot carry the vector part so CSV columns read like the quat chart
    R = rotation_from_quat(state.quat)
    energy, h = _energy_and_momentum(params.J, state.omega, R)
    return TrajectorySample(
        t=state.t,
        q=state.quat[1:].copy(),
        qdot=_quat_rate(state.quat, state.omega)[1:],
        omega=state.omega.copy(),
        R=R,
        energy=energy,
        h_inertial=h,
    )


def _check_grid(dt: float, t_final: float) -> int:
    if not dt > 0.0 or not math.isfinite(dt):
        raise ValueError("dt must be a positive finite number")
    if not t_final >= 0.0:
        raise ValueError("t_final must be non-negative")
    return int(round(t_final / dt))


def simulate_generalized(initial: SimState, params: RigidBodyParams, dt: float, t_final: float) -> List[TrajectorySample]:
    """
    Integrate [q, q̇] until t_final. When S(q) becomes singular the run stops
    with GimbalLock; the samples up to the last completed step ride along on
    exc.trajectory.
    """
    n_steps = _check_grid(dt, t_final)
    chart = initial.coords.chart
    model = chart_model(chart)
    J = params.J

    def deriv(t: float, x: np.ndarray) -> np.ndarray:
        q = x[:3]
        model.validate(q)
        k = KinematicsEval(S=model.s_matrix(q), dS=model.s_partials(q), det=model.s_det(q))
        qdd = solve_generalized_accel(k, x[3:], J, params.torque.at(t), t=t)
        return np.concatenate((x[3:], qdd))

    t0 = float(initial.t)
    x = np.concatenate((initial.coords.q, initial.qdot))
    det = model.s_det(x[:3])
    samples = [sample_generalized(initial, params)]
    if abs(det) <= GIMBAL_TOL:
        _abort(GimbalLock(f"Initial attitude is singular in {chart.value} (det S = {det:.3e})", t=t0, det=det), samples)

    started = time.time()
    for step in range(n_steps):
        t = t0 + step * dt
        try:
            x_new = rk4_step(deriv, t, x, dt)
            model.validate(x_new[:3])
            det_new = model.s_det(x_new[:3])
        except (GimbalLock, NonFiniteDerivative):
            _abort(_singularity_error(chart, *_localize_singularity(deriv, model, t, x, dt, det)), samples)
        except DomainError as exc:
            exc.details.setdefault("t", t)
            _abort(exc, samples)

        if abs(det_new) <= GIMBAL_TOL or (det_new > 0.0) != (det > 0.0):
            _abort(_singularity_error(chart, *_localize_singularity(deriv, model, t, x, dt, det)), samples)

        # Euler angles other than Θ are carried in (−π, π]
        x, det = np.concatenate((model.wrap(x_new[:3]), x_new[3:])), det_new
        samples.append(sample_generalized(SimState(t0 + (step + 1) * dt, GenCoords(chart, x[:3]), x[3:]), params))

    logger.info("Simulated %s: %d steps in %s", chart.value, n_steps, format_time(time.time() - started))
    return samples


def _abort(exc: Exception, samples: List[TrajectorySample]) -> None:
    exc.trajectory = samples
    logger.warning("Run aborted after %d samples: %s", len(samples), exc)
    raise exc


def _singularity_error(chart: Chart, t_hit: float, det_hit: Optional[float]) -> Exception:
    # det S = 8/q₁ never vanishes; a reduced-quaternion breakdown is the q₁ → 0 domain edge
    if chart is Chart.QUAT or det_hit is None:
        return DomainError(
            f"{chart.value} left its chart domain near t = {t_hit:.9f}",
            hint="Use a chart whose singular set the motion avoids, or the body-frame formulation.",
            details={"t": t_hit},
        )
    return GimbalLock(f"{chart.value} reached a singular attitude at t = {t_hit:.9f}", t=t_hit, det=det_hit)


def _localize_singularity(deriv: Derivative, model, t: float, x: np.ndarray, dt: float, det0: float):
    """Bisect the sub-step length until |det S| <= GIMBAL_TOL; returns (t, det)."""
    lo, hi = 0.0, dt
    det_hi = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        try:
            xm = rk4_step(deriv, t, x, mid)
            model.validate(xm[:3])
            d = model.s_det(xm[:3])
        except (GimbalLock, NonFiniteDerivative, DomainError):
            hi = mid
            continue
        if abs(d) <= GIMBAL_TOL:
            return t + mid, d
        if (d > 0.0) == (det0 > 0.0):
            lo = mid
        else:
            hi, det_hi = mid, d
    return t + hi, det_hi


def simulate_body(initial: BodyState, params: RigidBodyParams, dt: float, t_final: float) -> List[TrajectorySample]:
    n_steps = _check_grid(dt, t_final)
    J = params.J

    def deriv(t: float, x: np.ndarray) -> np.ndarray:
        omega = x[4:]
        return np.concatenate((_quat_rate(x[:4], omega), _euler_rhs(J, omega, params.torque.at(t))))

    t0 = float(initial.t)
    x = np.concatenate((initial.quat, initial.omega))
    samples = [sample_body(initial, params)]
    started = time.time()
    for step in range(n_steps):
        try:
            x = rk4_step(deriv, t0 + step * dt, x, dt)
        except NonFiniteDerivative as exc:
            _abort(exc, samples)
        x[:4] /= np.linalg.norm(x[:4])
        samples.append(sample_body(BodyState(t0 + (step + 1) * dt, x[:4], x[4:]), params))

    logger.info("Simulated body frame: %d steps in %s", n_steps, format_time(time.time() - started))
    return samples


def compare_trajectories(a: Sequence[TrajectorySample], b: Sequence[TrajectorySample],
                         time_tol: float = 1e-9) -> TrajectoryComparison:
    if len(a) != len(b) or not a:
        raise GridMismatch(f"Trajectories have {len(a)} and {len(b)} samples")
    best_angle, best_omega = (-1.0, 0.0), (-1.0, 0.0)
    for sa, sb in zip(a, b):
        if abs(sa.t - sb.t) > time_tol * max(1.0, abs(sa.t)):
            raise GridMismatch(
                f"Time grids differ at t = {sa.t:.17g} vs {sb.t:.17g}",
                hint="Run both formulations with the same dt and t_final.",
            )
        angle = geodesic_angle(sa.R, sb.R)
        if angle > best_angle[0]:
            best_angle = (angle, sa.t)
        dw = max_abs(sa.omega - sb.omega)
        if dw > best_omega[0]:
            best_omega = (dw, sa.t)
    return TrajectoryComparison(
        max_rotation_angle_rad=best_angle[0],
        max_omega_diff=best_omega[0],
        t_max_rotation=best_angle[1],
        t_max_omega=best_omega[1],
    )
