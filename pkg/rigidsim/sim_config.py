"""
Simulation config files (JSON), stored as configs/<id>/config.json:

    {
      "id": "axisymmetric",
      "chart": "quat",                                  # euler321 | euler313 | quat | body
      "inertia": {"principal": [1, 1, 2]},              # or {"matrix": [9 reals, row-major]}
      "initial": {"q": [0, 0, 0]},                      # or {"attitude_quat": [q1, q2, q3, q4]}
      "initial_rate": {"omega": [1, 0, 2]},             # or {"qdot": [...]}
      "torque": {"kind": "zero"},
      "dt": 0.001,
      "t_final": 5.0,
      "seed": 42
    }

For chart "body", initial.q and initial_rate.qdot are reduced Euler
parameters and their rates.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from rigidsim.charts import (
    Chart,
    GenCoords,
    chart_model,
    omega_from,
    parse_chart,
    qdot_from_omega,
    quat_from_rotation,
    rotation_from_quat,
    rotation_matrix,
)
from rigidsim.dynamics import RigidBodyParams, TorqueProfile
from rigidsim.errors import ConfigError, DomainError, InvalidInertia
from rigidsim.integrate import BodyState, SimState

BODY = "body"


@dataclass(frozen=True, eq=False)
class SimConfig:
    chart: str
    J: np.ndarray
    dt: float
    t_final: float
    q: Optional[np.ndarray] = None
    attitude_quat: Optional[np.ndarray] = None
    qdot: Optional[np.ndarray] = None
    omega: Optional[np.ndarray] = None
    torque: TorqueProfile = field(default_factory=TorqueProfile.zero)
    seed: Optional[int] = None
    id: Optional[str] = None

    @property
    def native_chart(self) -> Chart:
        """Chart in which initial.q and initial_rate.qdot are expressed."""
        return Chart.QUAT if self.chart == BODY else parse_chart(self.chart)

    def params(self) -> RigidBodyParams:
        return RigidBodyParams(J=self.J, torque=self.torque)


def _vector(value: Any, key: str, size: int = 3) -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{key}' must be a list of {size} numbers") from exc
    if v.shape != (size,):
        raise ConfigError(f"'{key}' must be a list of {size} numbers, got {value!r}")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"'{key}' must be finite")
    return v


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(f"'{key}' must be finite")
    return x


def _exactly_one(section: Dict[str, Any], keys, name: str) -> str:
    if not isinstance(section, dict):
        raise ConfigError(f"'{name}' must be an object")
    present = [k for k in keys if k in section]
    if len(present) != 1:
        raise ConfigError(f"'{name}' needs exactly one of {', '.join(keys)}; got {present or 'none'}")
    return present[0]


def parse_inertia(data: Dict[str, Any]) -> np.ndarray:
    key = _exactly_one(data, ("principal", "matrix"), "inertia")
    if key == "principal":
        J = np.diag(_vector(data["principal"], "inertia.principal"))
    else:
        J = _vector(data["matrix"], "inertia.matrix", size=9).reshape(3, 3)
    try:
        RigidBodyParams(J=J)
    except InvalidInertia as exc:
        raise ConfigError(f"'inertia' is invalid: {exc}", hint=exc.hint) from exc
    return J


def parse_torque(data: Optional[Dict[str, Any]]) -> TorqueProfile:
    if data is None:
        return TorqueProfile.zero()
    if not isinstance(data, dict):
        raise ConfigError("'torque' must be an object")
    kind = str(data.get("kind", "zero")).lower()
    try:
        if kind == "zero":
            return TorqueProfile.zero()
        if kind == "constant":
            return TorqueProfile.constant(_vector(data.get("value"), "torque.value"))
        if kind == "piecewise_linear":
            points = data.get("points")
            if not isinstance(points, list) or not points:
                raise ConfigError("'torque.points' must be a non-empty list of [t, [tx, ty, tz]]")
            parsed = []
            for i, p in enumerate(points):
                if not isinstance(p, (list, tuple)) or len(p) != 2:
                    raise ConfigError(f"'torque.points[{i}]' must be [t, [tx, ty, tz]]")
                parsed.append((_number(p[0], f"torque.points[{i}][0]"), _vector(p[1], f"torque.points[{i}][1]")))
            return TorqueProfile.piecewise_linear(parsed)
        if kind == "spin_up":
            return TorqueProfile.spin_up(
                _vector(data.get("axis"), "torque.axis"),
                _number(data.get("magnitude"), "torque.magnitude"),
                _number(data.get("t_on"), "torque.t_on"),
                _number(data.get("t_off"), "torque.t_off"),
            )
    except ValueError as exc:
        raise ConfigError(f"'torque' is invalid: {exc}") from exc
    raise ConfigError(f"Unknown torque kind '{kind}'", hint="Use zero, constant, piecewise_linear or spin_up.")


def parse_sim_config(data: Dict[str, Any]) -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object")

    chart = str(data.get("chart", "")).strip().lower()
    if chart != BODY:
        try:
            chart = parse_chart(chart).value
        except ValueError as exc:
            raise ConfigError(f"'chart': {exc}", hint="Use euler321, euler313, quat or body.") from exc

    if "inertia" not in data:
        raise ConfigError("Missing 'inertia'")
    J = parse_inertia(data["inertia"])

    dt = _number(data.get("dt"), "dt")
    t_final = _number(data.get("t_final"), "t_final")
    if dt <= 0.0:
        raise ConfigError(f"'dt' must be > 0, got {dt}")
    if t_final < dt:
        raise ConfigError(f"'t_final' must be >= dt, got {t_final}")

    initial = data.get("initial")
    init_key = _exactly_one(initial, ("q", "attitude_quat"), "initial")
    q = attitude_quat = None
    if init_key == "q":
        q = _vector(initial["q"], "initial.q")
    else:
        attitude_quat = _vector(initial["attitude_quat"], "initial.attitude_quat", size=4)
        if np.linalg.norm(attitude_quat) == 0.0:
            raise ConfigError("'initial.attitude_quat' must be non-zero")

    rate = data.get("initial_rate")
    rate_key = _exactly_one(rate, ("qdot", "omega"), "initial_rate")
    qdot = omega = None
    if rate_key == "qdot":
        qdot = _vector(rate["qdot"], "initial_rate.qdot")
    else:
        omega = _vector(rate["omega"], "initial_rate.omega")

    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"'seed' must be an integer, got {seed!r}")

    cfg = SimConfig(
        chart=chart,
        J=J,
        dt=dt,
        t_final=t_final,
        q=q,
        attitude_quat=attitude_quat,
        qdot=qdot,
        omega=omega,
        torque=parse_torque(data.get("torque")),
        seed=seed,
        id=data.get("id"),
    )
    if q is not None:
        try:
            chart_model(cfg.native_chart).validate(q)
        except DomainError as exc:
            raise ConfigError(f"'initial.q' is outside the {cfg.native_chart.value} chart: {exc}") from exc
    return cfg


def load_sim_config(path: str) -> SimConfig:
    """Raises OSError when the file can't be read, ConfigError when it is not a valid config."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Invalid JSON in {path}: {exc}") from exc
    return parse_sim_config(data)


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------

def _native_coords(cfg: SimConfig) -> GenCoords:
    if cfg.q is not None:
        return GenCoords(cfg.native_chart, cfg.q)
    R = initial_attitude(cfg)
    return GenCoords(cfg.native_chart, chart_model(cfg.native_chart).from_rotation(R))


def initial_attitude(cfg: SimConfig) -> np.ndarray:
    if cfg.q is not None:
        return rotation_matrix(GenCoords(cfg.native_chart, cfg.q))
    return rotation_from_quat(cfg.attitude_quat / np.linalg.norm(cfg.attitude_quat))


def initial_omega(cfg: SimConfig) -> np.ndarray:
    if cfg.omega is not None:
        return cfg.omega.copy()
    return omega_from(_native_coords(cfg), cfg.qdot)


def initial_sim_state(cfg: SimConfig, chart=None) -> SimState:
    """
    Initial (q, q̇) in `chart` (default: the config's chart). Values given in
    that chart are used as-is; anything else goes through the rotation matrix
    and qdot_from_omega, which raise when the attitude is not expressible.
    """
    chart = cfg.native_chart if chart is None else parse_chart(chart)
    if chart is cfg.native_chart and cfg.q is not None:
        c = GenCoords(chart, cfg.q)
    else:
        c = GenCoords(chart, chart_model(chart).from_rotation(initial_attitude(cfg)))
    if chart is cfg.native_chart and cfg.qdot is not None:
        qdot = cfg.qdot
    else:
        qdot = qdot_from_omega(c, initial_omega(cfg))
    return SimState(0.0, c, qdot)


def initial_body_state(cfg: SimConfig) -> BodyState:
    if cfg.attitude_quat is not None:
        quat = cfg.attitude_quat
    elif cfg.native_chart is Chart.QUAT:
        quat = chart_model(Chart.QUAT).lift(cfg.q)
    else:
        quat = quat_from_rotation(initial_attitude(cfg))
    return BodyState(0.0, quat, initial_omega(cfg))
