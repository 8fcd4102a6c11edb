"""
Numerical verification of the kinematic identities behind Euler's equation in
generalized coordinates.

For a chart with ω = S(q) q̇ and P(q̇) = [∂₁S q̇  ∂₂S q̇  ∂₃S q̇] the following
hold at every in-domain q (and every q̇ where it appears):

    Prop1a      Ṡ + (S q̇)^× S − P(q̇) = 0
    Prop1b      Ṡ + [S₂×S₃  S₃×S₁  S₁×S₂] q̇^× − P(q̇) = 0
    Prop1c      ∂ⱼSᵢ − ∂ᵢSⱼ = Sᵢ × Sⱼ                       (i < j)
    IdentShort  Sᵀ [∂₃S₂−∂₂S₃  ∂₁S₃−∂₃S₁  ∂₂S₁−∂₁S₂] = (det S) I
    Coriolis    S⁻ᵀ(ṠᵀJSq̇ − [q̇ᵀ(∂ᵢS)ᵀJSq̇]ᵢ) = ω × Jω
    QuatMS      M(q)ᵀ S(q) = (8/q₁) I                       (quat chart only)

Each residual_* function returns the raw residual. The suite divides the
∞-norm of every residual by an operand-norm scale before comparing it to the
tolerance, so one tolerance covers charts whose S entries differ in size.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from rigidsim.charts import Chart, ChartModel, GenCoords, KinematicsEval, chart_model, evaluate_kinematics, parse_chart, rotation_from_quat
from rigidsim.constants import FD_STEP, GIMBAL_TOL, SAMPLE_MIN_DET
from rigidsim.dynamics import validate_inertia
from rigidsim.errors import GimbalLock
from rigidsim.lin3 import (
    IDENTITY3,
    as_vec3,
    cofactor_columns,
    lemma1_residual,
    lemma2_adjugate_residual,
    lemma2_cross_residual,
    max_abs,
    random_matrix,
    skew,
)

logger = logging.getLogger(__name__)

IDENTITY_FAMILIES = ("Prop1a", "Prop1b", "Prop1c", "IdentShort", "Coriolis")
LEMMA_FAMILIES = ("Lemma1", "Lemma2Adjugate", "Lemma2Cross")
CHART_ORDER = (Chart.EULER321, Chart.EULER313, Chart.QUAT)


@dataclass
class IdentityReport:
    identity_id: str
    chart: Optional[str]
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    worst_case_q: Optional[List[float]] = None
    worst_case_qdot: Optional[List[float]] = None

    def to_dict(self) -> Dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------

def residual_prop1a(c: GenCoords, qdot, model: Optional[ChartModel] = None) -> np.ndarray:
    k = evaluate_kinematics(c, model)
    qdot = as_vec3(qdot)
    return k.sdot(qdot) + skew(k.S @ qdot) @ k.S - k.partial_columns(qdot)


def residual_prop1b(c: GenCoords, qdot, model: Optional[ChartModel] = None) -> np.ndarray:
    k = evaluate_kinematics(c, model)
    qdot = as_vec3(qdot)
    return k.sdot(qdot) + cofactor_columns(k.S) @ skew(qdot) - k.partial_columns(qdot)


def residual_prop1c(c: GenCoords, model: Optional[ChartModel] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = evaluate_kinematics(c, model)
    d = k.dS
    s1, s2, s3 = k.column(0), k.column(1), k.column(2)
    # d[j][:, i] is ∂ⱼ Sᵢ
    return (
        d[1][:, 0] - d[0][:, 1] - np.cross(s1, s2),
        d[2][:, 0] - d[0][:, 2] - np.cross(s1, s3),
        d[2][:, 1] - d[1][:, 2] - np.cross(s2, s3),
    )


def _curl_columns(k: KinematicsEval) -> np.ndarray:
    d = k.dS
    return np.column_stack((
        d[2][:, 1] - d[1][:, 2],
        d[0][:, 2] - d[2][:, 0],
        d[1][:, 0] - d[0][:, 1],
    ))


def residual_identshort(c: GenCoords, model: Optional[ChartModel] = None) -> np.ndarray:
    k = evaluate_kinematics(c, model)
    return k.S.T @ _curl_columns(k) - k.det * IDENTITY3


def _require_invertible(c: GenCoords, k: KinematicsEval) -> None:
    if abs(k.det) <= GIMBAL_TOL:
        raise GimbalLock(
            f"S(q) is singular for {c.chart.value} at q = {c.q.tolist()} (det S = {k.det:.3e})",
            det=k.det,
        )


def residual_coriolis(c: GenCoords, qdot, J, model: Optional[ChartModel] = None) -> np.ndarray:
    J = validate_inertia(J)
    k = evaluate_kinematics(c, model)
    _require_invertible(c, k)
    qdot = as_vec3(qdot)
    omega = k.S @ qdot
    h = J @ omega
    inner = k.sdot(qdot).T @ h - k.partial_columns(qdot).T @ h
    return np.linalg.solve(k.S.T, inner) - np.cross(omega, h)


def residual_ident_j4(c: GenCoords, qdot, model: Optional[ChartModel] = None) -> np.ndarray:
    """S⁻ᵀ(Ṡᵀ − P(q̇)ᵀ) − (S q̇)^×, the J-free form the Coriolis identity follows from."""
    k = evaluate_kinematics(c, model)
    _require_invertible(c, k)
    qdot = as_vec3(qdot)
    return np.linalg.solve(k.S.T, k.sdot(qdot).T - k.partial_columns(qdot).T) - skew(k.S @ qdot)


def quat_m_matrix(c: GenCoords) -> np.ndarray:
    """M(q) = (4/q₁)(q₁ I − v^×) for reduced Euler parameters v = q."""
    if c.chart is not Chart.QUAT:
        raise ValueError(f"quat_m_matrix needs quat coordinates, got {c.chart.value}")
    model = chart_model(Chart.QUAT)
    model.validate(c.q)
    q1 = model.scalar(c.q)
    return (4.0 / q1) * (q1 * IDENTITY3 - skew(c.q))


def residual_quat_ms(c: GenCoords) -> np.ndarray:
    m = quat_m_matrix(c)
    k = evaluate_kinematics(c)
    q1 = chart_model(Chart.QUAT).scalar(c.q)
    return m.T @ k.S - (8.0 / q1) * IDENTITY3


def finite_diff_partials(c: GenCoords, h: float = FD_STEP,
                         model: Optional[ChartModel] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if h <= 0.0:
        raise ValueError("Finite-difference step must be positive")
    m = model if model is not None else chart_model(c.chart)
    out = []
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        qp, qm = c.q + step, c.q - step
        m.validate(qp)
        m.validate(qm)
        out.append((m.s_matrix(qp) - m.s_matrix(qm)) / (2.0 * h))
    return tuple(out)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_coords(chart, rng: np.random.Generator) -> GenCoords:
    chart = parse_chart(chart)
    if chart is Chart.QUAT:
        theta = rng.uniform(-0.9 * math.pi, 0.9 * math.pi)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        return GenCoords(chart, math.sin(0.5 * theta) * axis)
    model = chart_model(chart)
    while True:
        if chart is Chart.EULER321:
            q = np.array([rng.uniform(-math.pi, math.pi), rng.uniform(-0.5 * math.pi, 0.5 * math.pi), rng.uniform(-math.pi, math.pi)])
        else:
            q = np.array([rng.uniform(-math.pi, math.pi), rng.uniform(0.0, math.pi), rng.uniform(-math.pi, math.pi)])
        if abs(model.s_det(q)) >= SAMPLE_MIN_DET:
            return GenCoords(chart, q)


def sample_rates(rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=3)


def sample_inertia(rng: np.random.Generator) -> np.ndarray:
    """Rᵀ diag(d) R with d in [0.5, 5]³ and R a uniformly random rotation."""
    d = rng.uniform(0.5, 5.0, size=3)
    quat = rng.normal(size=4)
    R = rotation_from_quat(quat / np.linalg.norm(quat))
    J = R.T @ np.diag(d) @ R
    return 0.5 * (J + J.T)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def _operand_norm(k: KinematicsEval) -> float:
    return max_abs(k.S) + max(max_abs(d) for d in k.dS)


def normalized_residuals(c: GenCoords, qdot, J, model: Optional[ChartModel] = None) -> Dict[str, float]:
    """Scaled ∞-norm residual of every identity family at one sample point."""
    k = evaluate_kinematics(c, model)
    qdot = as_vec3(qdot)
    s = _operand_norm(k)
    nq = max_abs(qdot)
    nj = max_abs(J)
    out = {
        "Prop1a": max_abs(residual_prop1a(c, qdot, model)) / (1.0 + s * s * nq),
        "Prop1b": max_abs(residual_prop1b(c, qdot, model)) / (1.0 + s * s * nq),
        "Prop1c": max(max_abs(r) for r in residual_prop1c(c, model)) / (1.0 + s * s),
        "IdentShort": max_abs(residual_identshort(c, model)) / (1.0 + s ** 3),
    }
    s_inv = max_abs(np.linalg.inv(k.S))
    out["Coriolis"] = max_abs(residual_coriolis(c, qdot, J, model)) / ((1.0 + nj * s * s * nq * nq) * (1.0 + s_inv))
    if c.chart is Chart.QUAT and model is None:
        out["QuatMS"] = max_abs(residual_quat_ms(c)) / (1.0 + max_abs(quat_m_matrix(c)) * max_abs(k.S))
    return out


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def _chart_reports(chart: Chart, samples: int, seed: int, tol: float) -> List[IdentityReport]:
    rng = np.random.default_rng([seed, CHART_ORDER.index(chart)])
    families = IDENTITY_FAMILIES + (("QuatMS",) if chart is Chart.QUAT else ())
    worst: Dict[str, Tuple[float, List[float], Optional[List[float]]]] = {f: (-1.0, [], None) for f in families}

    for _ in range(samples):
        c = sample_coords(chart, rng)
        qdot = sample_rates(rng)
        J = sample_inertia(rng)
        for family, value in normalized_residuals(c, qdot, J).items():
            if value > worst[family][0]:
                uses_rate = family in ("Prop1a", "Prop1b", "Coriolis")
                worst[family] = (value, c.q.tolist(), qdot.tolist() if uses_rate else None)

    reports = []
    for family in families:
        value, q, qdot = worst[family]
        reports.append(IdentityReport(
            identity_id=family,
            chart=chart.value,
            samples=samples,
            max_residual=value,
            tolerance=tol,
            passed=value <= tol,
            worst_case_q=q,
            worst_case_qdot=qdot,
        ))
        logger.debug("%s/%s: max residual %.3e over %d samples", chart.value, family, value, samples)
    return reports


def run_identity_suite(charts: Iterable, samples: int, seed: int, tol: float, workers: int = 0) -> List[IdentityReport]:
    """
    Evaluate every identity family at `samples` random points per chart.
    Each chart draws from its own generator, so the result does not depend
    on `workers`.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    charts = [parse_chart(c) for c in charts]
    if workers > 1 and len(charts) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(charts))) as pool:
            per_chart = list(pool.map(_chart_reports, charts, [samples] * len(charts), [seed] * len(charts), [tol] * len(charts)))
    else:
        per_chart = [_chart_reports(c, samples, seed, tol) for c in charts]
    reports = [r for chunk in per_chart for r in chunk]
    logger.info("Identity suite: %d/%d reports passed", sum(r.passed for r in reports), len(reports))
    return reports


def run_lemma_suite(samples: int, seed: int, tol: float, n_singular: int = 50) -> List[IdentityReport]:
    """Random 3x3 sweep of the cross-product-matrix lemmas; the first n_singular matrices have rank <= 2."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng([seed, len(CHART_ORDER)])
    # lemma inputs are matrices, not chart points: worst_case_q stays None
    worst = dict.fromkeys(LEMMA_FAMILIES, -1.0)
    for n in range(samples):
        a = random_matrix(rng, singular=n < n_singular)
        x = rng.uniform(-10.0, 10.0, size=3)
        na, nx = max_abs(a), max_abs(x)
        values = {
            "Lemma1": max_abs(lemma1_residual(a, x)) / (1.0 + na ** 3 * nx),
            "Lemma2Adjugate": max_abs(lemma2_adjugate_residual(a)) / (1.0 + na ** 3),
            "Lemma2Cross": max_abs(lemma2_cross_residual(a, x)) / (1.0 + na * na * nx),
        }
        for family, value in values.items():
            worst[family] = max(worst[family], value)

    return [
        IdentityReport(
            identity_id=family,
            chart=None,
            samples=samples,
            max_residual=worst[family],
            tolerance=tol,
            passed=worst[family] <= tol,
        )
        for family in LEMMA_FAMILIES
    ]
