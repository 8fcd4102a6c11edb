import math
import os
import sys
import unittest

import numpy as np

# Add project root
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from rigidsim.charts import Chart, GenCoords, evaluate_kinematics, omega_from, qdot_from_omega
from rigidsim.dynamics import (
    RigidBodyParams,
    TorqueProfile,
    angular_momentum,
    euler_rhs,
    generalized_accel,
    generalized_force,
    generalized_momentum,
    kinetic_energy,
    lagrangian_terms,
    solve_generalized_accel,
    torque_free_axisymmetric,
    validate_inertia,
)
from rigidsim.errors import GimbalLock, InvalidInertia
from rigidsim.identities import sample_coords, sample_inertia, sample_rates
from rigidsim.lin3 import max_abs, skew

ALL_CHARTS = (Chart.EULER321, Chart.EULER313, Chart.QUAT)


class TestInertia(unittest.TestCase):
    def test_rejects_bad_matrices(self):
        with self.assertRaises(InvalidInertia):
            validate_inertia([[1, 0.1, 0], [0, 1, 0], [0, 0, 1]])
        with self.assertRaises(InvalidInertia):
            validate_inertia(np.diag([1.0, 2.0, -3.0]))
        with self.assertRaises(InvalidInertia):
            validate_inertia(np.diag([1.0, np.nan, 3.0]))
        with self.assertRaises(InvalidInertia):
            validate_inertia(np.eye(2))

    def test_accepts_spd(self):
        J = sample_inertia(np.random.default_rng(0))
        np.testing.assert_array_equal(validate_inertia(J), J)

    def test_triangle_inequality_warning(self):
        with self.assertLogs('rigidsim.dynamics', level='WARNING'):
            RigidBodyParams(J=np.diag([1.0, 1.0, 3.0]))


class TestTorqueProfile(unittest.TestCase):
    def test_kinds(self):
        np.testing.assert_array_equal(TorqueProfile.zero().at(3.0), np.zeros(3))
        np.testing.assert_array_equal(TorqueProfile.constant([1, 2, 3]).at(-1.0), [1, 2, 3])
        pulse = TorqueProfile.spin_up([0, 0, 2], 0.5, 1.0, 2.0)
        np.testing.assert_array_equal(pulse.at(0.5), np.zeros(3))
        np.testing.assert_array_equal(pulse.at(1.0), [0, 0, 0.5])
        np.testing.assert_array_equal(pulse.at(2.0), np.zeros(3))

    def test_piecewise_linear(self):
        tau = TorqueProfile.piecewise_linear([(0.0, [0, 0, 0]), (2.0, [2, 0, -2])])
        np.testing.assert_allclose(tau.at(1.0), [1, 0, -1])
        np.testing.assert_allclose(tau.at(-5.0), [0, 0, 0])
        np.testing.assert_allclose(tau.at(10.0), [2, 0, -2])
        with self.assertRaises(ValueError):
            TorqueProfile.piecewise_linear([(1.0, [0, 0, 0]), (1.0, [1, 1, 1])])

    def test_spin_up_validation(self):
        with self.assertRaises(ValueError):
            TorqueProfile.spin_up([0, 0, 0], 1.0, 0.0, 1.0)
        with self.assertRaises(ValueError):
            TorqueProfile.spin_up([0, 0, 1], 1.0, 2.0, 1.0)


class TestEulerEquation(unittest.TestCase):
    def test_principal_spin_is_equilibrium(self):
        np.testing.assert_allclose(euler_rhs(np.diag([1.0, 2.0, 3.0]), [0, 0, 5], np.zeros(3)), np.zeros(3), atol=1e-15)

    def test_unit_inertia(self):
        np.testing.assert_allclose(euler_rhs(np.eye(3), [1, 2, 3], [0.1, 0.2, 0.3]), [0.1, 0.2, 0.3], atol=1e-15)

    def test_energy(self):
        self.assertAlmostEqual(kinetic_energy(np.diag([1.0, 2.0, 3.0]), [1, 1, 1]), 3.0)


class TestGeneralizedDynamics(unittest.TestCase):
    def test_generalized_force_at_identity(self):
        np.testing.assert_allclose(generalized_force(GenCoords('quat', [0, 0, 0]), [1, -2, 3]), [2, -4, 6])

    def test_reproduces_euler_equation(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            c = sample_coords(ALL_CHARTS[rng.integers(3)], rng)
            qdot = sample_rates(rng)
            tau = rng.uniform(-1, 1, 3)
            # principal moments need not satisfy the triangle inequality here
            J = np.diag(rng.uniform(0.5, 5.0, 3))
            k = evaluate_kinematics(c)
            qdd = solve_generalized_accel(k, qdot, J, tau)
            omega_dot = k.S @ qdd + k.sdot(qdot) @ qdot
            expected = euler_rhs(J, k.S @ qdot, tau)
            bound = 1e-9 * (1 + np.linalg.norm(qdot) ** 2 + np.linalg.norm(tau))
            self.assertLessEqual(max_abs(omega_dot - expected), bound, c)

    def test_matches_lagrangian_terms(self):
        rng = np.random.default_rng(3)
        for chart in ALL_CHARTS:
            for _ in range(50):
                c = sample_coords(chart, rng)
                qdot = sample_rates(rng)
                J = sample_inertia(rng)
                tau = rng.uniform(-1, 1, 3)
                terms = lagrangian_terms(c, qdot, J)
                rhs = generalized_force(c, tau) - terms.velocity_terms + terms.config_gradient
                expected = np.linalg.solve(terms.mass_matrix, rhs)
                qdd = solve_generalized_accel(evaluate_kinematics(c), qdot, J, tau)
                np.testing.assert_allclose(qdd, expected, rtol=1e-9, atol=1e-9 * (1 + max_abs(expected)))

    def test_principal_spin_through_quat_chart(self):
        c = GenCoords('quat', [0, 0, 0])
        qdot = qdot_from_omega(c, [0, 0, 5])
        params = RigidBodyParams(J=np.diag([1.0, 2.0, 3.0]))
        qdd = generalized_accel(c, qdot, params, 0.0)
        k = evaluate_kinematics(c)
        np.testing.assert_allclose(k.S @ qdd + k.sdot(qdot) @ qdot, np.zeros(3), atol=1e-12)

    def test_mass_matrix_and_energy(self):
        rng = np.random.default_rng(8)
        for chart in ALL_CHARTS:
            c = sample_coords(chart, rng)
            qdot = sample_rates(rng)
            J = sample_inertia(rng)
            terms = lagrangian_terms(c, qdot, J)
            np.testing.assert_array_equal(terms.mass_matrix, terms.mass_matrix.T)
            self.assertGreater(np.linalg.eigvalsh(terms.mass_matrix)[0], 0.0)
            quad = 0.5 * qdot @ terms.mass_matrix @ qdot
            self.assertAlmostEqual(kinetic_energy(J, omega_from(c, qdot)), quad, delta=1e-12 * (1 + quad))
            np.testing.assert_allclose(generalized_momentum(c, qdot, J), terms.mass_matrix @ qdot, rtol=1e-10, atol=1e-10)

    def test_gimbal_lock(self):
        params = RigidBodyParams(J=np.diag([1.0, 2.0, 3.0]))
        with self.assertRaises(GimbalLock) as ctx:
            generalized_accel(GenCoords('euler321', [0, math.pi / 2, 0]), [0, 1, 0], params, 1.5)
        self.assertEqual(ctx.exception.t, 1.5)

    def test_momentum_at_identity(self):
        body, inertial = angular_momentum(GenCoords('euler321', [0, 0, 0]), [1, 2, 3], np.diag([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(body, [1, 4, 9])
        np.testing.assert_allclose(inertial, body)


class TestAxisymmetricSolution(unittest.TestCase):
    def test_initial_value(self):
        omega, R = torque_free_axisymmetric(1.0, 2.0, [1, 0, 2], 0.0)
        np.testing.assert_allclose(omega, [1, 0, 2])
        np.testing.assert_allclose(R, np.eye(3), atol=1e-15)

    def test_rates(self):
        for t in (0.3, 1.0, 4.2):
            omega, _ = torque_free_axisymmetric(1.0, 2.0, [1, 0, 2], t)
            np.testing.assert_allclose(omega, [math.cos(2 * t), math.sin(2 * t), 2], atol=1e-14)

    def test_satisfies_equations_of_motion(self):
        J1, J3, w0 = 1.5, 0.7, [0.4, -0.3, 1.2]
        J = np.diag([J1, J1, J3])
        h = 1e-6
        for t in (0.5, 2.0, 7.0):
            omega, R = torque_free_axisymmetric(J1, J3, w0, t)
            w_p, R_p = torque_free_axisymmetric(J1, J3, w0, t + h)
            w_m, R_m = torque_free_axisymmetric(J1, J3, w0, t - h)
            np.testing.assert_allclose((w_p - w_m) / (2 * h), euler_rhs(J, omega, np.zeros(3)), atol=1e-7)
            np.testing.assert_allclose((R_p - R_m) / (2 * h), -skew(omega) @ R, atol=1e-7)
            np.testing.assert_allclose(R.T @ (J @ omega), J @ np.asarray(w0), atol=1e-12)


if __name__ == '__main__':
    unittest.main()
