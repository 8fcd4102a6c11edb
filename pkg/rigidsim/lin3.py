"""
Fixed-size 3D linear algebra on numpy arrays.

Vectors are float arrays of shape (3,), matrices of shape (3, 3). The two
cross-product-matrix identities used by the kinematics layer are exposed as
residual functions so they can be swept numerically:

    Aᵀ (Ax)^× A = (det A) x^×                      (lemma1_residual)
    Aᵀ C = (det A) I,  C x^× = (Ax)^× A            (cofactor_columns)

where C = [A₂×A₃  A₃×A₁  A₁×A₂] is built from the columns of A.
"""

import numpy as np

from rigidsim.constants import SINGULAR_TOL
from rigidsim.errors import SingularMatrix

IDENTITY3 = np.eye(3)


def as_vec3(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"Expected a 3-vector, got shape {v.shape}")
    return v


def as_mat3(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"Expected a 3x3 matrix, got shape {m.shape}")
    return m


def is_finite3(x) -> bool:
    return bool(np.all(np.isfinite(x)))


def max_abs(x) -> float:
    """Largest absolute entry; the residual norm used throughout."""
    return float(np.max(np.abs(x)))


def skew(x) -> np.ndarray:
    x = as_vec3(x)
    return np.array([
        [0.0, -x[2], x[1]],
        [x[2], 0.0, -x[0]],
        [-x[1], x[0], 0.0],
    ])


def cross(x, y) -> np.ndarray:
    return np.cross(as_vec3(x), as_vec3(y))


def det3(a) -> float:
    return float(np.linalg.det(as_mat3(a)))


def transpose3(a) -> np.ndarray:
    return as_mat3(a).T.copy()


def matmul3(a, b) -> np.ndarray:
    return as_mat3(a) @ as_mat3(b)


def matvec3(a, x) -> np.ndarray:
    return as_mat3(a) @ as_vec3(x)


def solve3(a, b, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    a = as_mat3(a)
    d = det3(a)
    if abs(d) <= singular_tol:
        raise SingularMatrix(
            f"Cannot solve 3x3 system: |det A| = {abs(d):.3e} <= {singular_tol:.1e}",
            details={"det": d},
        )
    return np.linalg.solve(a, as_vec3(b))


def lemma1_residual(a, x) -> np.ndarray:
    """Aᵀ (Ax)^× A − (det A) x^×; zero for every A and x."""
    a = as_mat3(a)
    x = as_vec3(x)
    return a.T @ skew(a @ x) @ a - det3(a) * skew(x)


def cofactor_columns(a) -> np.ndarray:
    """[A₂×A₃  A₃×A₁  A₁×A₂] as columns (the transposed adjugate of Aᵀ)."""
    a = as_mat3(a)
    a1, a2, a3 = a[:, 0], a[:, 1], a[:, 2]
    return np.column_stack((np.cross(a2, a3), np.cross(a3, a1), np.cross(a1, a2)))


def lemma2_adjugate_residual(a) -> np.ndarray:
    a = as_mat3(a)
    return a.T @ cofactor_columns(a) - det3(a) * IDENTITY3


def lemma2_cross_residual(a, x) -> np.ndarray:
    a = as_mat3(a)
    x = as_vec3(x)
    return cofactor_columns(a) @ skew(x) - skew(a @ x) @ a


def random_matrix(rng: np.random.Generator, singular: bool = False, bound: float = 10.0) -> np.ndarray:
    """
    Uniform entries in [-bound, bound]. With singular=True the last row is a
    random combination of the first two, so rank <= 2.
    """
    a = rng.uniform(-bound, bound, size=(3, 3))
    if singular:
        w = rng.uniform(-1.0, 1.0, size=2)
        a[2] = w[0] * a[0] + w[1] * a[1]
    return a
