import copy
import json
import os
import shutil
import sys
import tempfile
import unittest

import numpy as np

# Add project root
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from rigidsim.charts import Chart, GenCoords, qdot_from_omega, rotation_matrix
from rigidsim.errors import AmbiguousAttitude, ConfigError, DomainError
from rigidsim.integrate import simulate_generalized
from rigidsim.sim_config import (
    initial_body_state,
    initial_omega,
    initial_sim_state,
    load_sim_config,
    parse_inertia,
    parse_sim_config,
    parse_torque,
)

CONFIG_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'configs'))

BASE = {
    "chart": "euler321",
    "inertia": {"principal": [1.0, 2.0, 3.0]},
    "initial": {"q": [0.6, 0.5, 0.2]},
    "initial_rate": {"omega": [0.1, -0.05, 0.1]},
    "dt": 0.01,
    "t_final": 0.5,
}


def with_changes(**changes):
    data = copy.deepcopy(BASE)
    data.update(changes)
    return data


class TestParsing(unittest.TestCase):
    def test_valid(self):
        cfg = parse_sim_config(BASE)
        self.assertEqual(cfg.chart, "euler321")
        self.assertIs(cfg.native_chart, Chart.EULER321)
        np.testing.assert_array_equal(cfg.J, np.diag([1.0, 2.0, 3.0]))
        self.assertIsNone(cfg.qdot)
        np.testing.assert_array_equal(cfg.torque.at(0.0), np.zeros(3))

    def test_rejections(self):
        bad = [
            with_changes(chart="rodrigues"),
            with_changes(dt=0.0),
            with_changes(dt="fast"),
            with_changes(t_final=0.001),
            with_changes(initial={"q": [0, 0, 0], "attitude_quat": [1, 0, 0, 0]}),
            with_changes(initial={}),
            with_changes(initial_rate={"qdot": [0, 0, 0], "omega": [0, 0, 0]}),
            with_changes(inertia={"principal": [1.0, -2.0, 3.0]}),
            with_changes(inertia={"matrix": [1, 0, 0, 0, 1, 0, 0, 0]}),
            with_changes(torque={"kind": "wobble"}),
            with_changes(seed=1.5),
            with_changes(chart="quat", initial={"q": [0.8, 0.6, 0.1]}),
        ]
        for data in bad:
            with self.assertRaises(ConfigError, msg=json.dumps(data)):
                parse_sim_config(data)
        no_inertia = copy.deepcopy(BASE)
        del no_inertia["inertia"]
        with self.assertRaises(ConfigError):
            parse_sim_config(no_inertia)

    def test_inertia_forms(self):
        J = parse_inertia({"matrix": [2, 0.1, 0, 0.1, 3, 0, 0, 0, 4]})
        self.assertEqual(J[0, 1], 0.1)
        with self.assertRaises(ConfigError):
            parse_inertia({"matrix": [2, 0.5, 0, 0.1, 3, 0, 0, 0, 4]})

    def test_torque_forms(self):
        self.assertEqual(parse_torque(None).kind, "zero")
        tau = parse_torque({"kind": "piecewise_linear", "points": [[0, [0, 0, 0]], [1, [1, 0, 0]]]})
        np.testing.assert_allclose(tau.at(0.5), [0.5, 0, 0])
        tau = parse_torque({"kind": "spin_up", "axis": [0, 0, 1], "magnitude": 2, "t_on": 0, "t_off": 1})
        np.testing.assert_allclose(tau.at(0.5), [0, 0, 2])
        with self.assertRaises(ConfigError):
            parse_torque({"kind": "piecewise_linear", "points": [[1, [0, 0, 0]], [0, [1, 0, 0]]]})
        with self.assertRaises(ConfigError):
            parse_torque({"kind": "constant"})


class TestInitialConditions(unittest.TestCase):
    def test_native_chart_values_are_used_as_given(self):
        cfg = parse_sim_config(with_changes(initial_rate={"qdot": [0.3, 0.2, 0.1]}))
        state = initial_sim_state(cfg)
        np.testing.assert_array_equal(state.coords.q, [0.6, 0.5, 0.2])
        np.testing.assert_array_equal(state.qdot, [0.3, 0.2, 0.1])

    def test_other_charts_share_attitude_and_rate(self):
        cfg = parse_sim_config(BASE)
        R = rotation_matrix(GenCoords('euler321', [0.6, 0.5, 0.2]))
        for chart in ('euler313', 'quat'):
            state = initial_sim_state(cfg, chart)
            np.testing.assert_allclose(rotation_matrix(state.coords), R, atol=1e-12)
            np.testing.assert_allclose(qdot_from_omega(state.coords, [0.1, -0.05, 0.1]), state.qdot, atol=1e-12)
        body = initial_body_state(cfg)
        np.testing.assert_allclose(body.omega, [0.1, -0.05, 0.1])

    def test_omega_and_qdot_configs_give_identical_runs(self):
        by_omega = parse_sim_config(BASE)
        qdot = initial_sim_state(by_omega).qdot
        by_qdot = parse_sim_config(with_changes(initial_rate={"qdot": [float(x) for x in qdot]}))
        a = simulate_generalized(initial_sim_state(by_omega), by_omega.params(), by_omega.dt, by_omega.t_final)
        b = simulate_generalized(initial_sim_state(by_qdot), by_qdot.params(), by_qdot.dt, by_qdot.t_final)
        for sa, sb in zip(a, b):
            np.testing.assert_array_equal(sa.q, sb.q)
            np.testing.assert_array_equal(sa.qdot, sb.qdot)

    def test_body_chart_reads_reduced_parameters(self):
        cfg = parse_sim_config(with_changes(chart="body", initial={"q": [0.1, 0.2, 0.3]}, initial_rate={"qdot": [0.0, 0.0, 0.5]}))
        state = initial_body_state(cfg)
        np.testing.assert_allclose(state.quat[1:], [0.1, 0.2, 0.3])
        np.testing.assert_allclose(initial_omega(cfg), state.omega)

    def test_inexpressible_attitudes(self):
        half_turn = parse_sim_config(with_changes(chart="body", initial={"attitude_quat": [0, 1, 0, 0]}))
        with self.assertRaises(DomainError):
            initial_sim_state(half_turn, 'quat')
        level = parse_sim_config(with_changes(initial={"q": [0, 0, 0]}))
        with self.assertRaises(AmbiguousAttitude):
            initial_sim_state(level, 'euler313')


class TestConfigFiles(unittest.TestCase):
    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_shipped_configs_parse(self):
        with open(os.path.join(CONFIG_ROOT, 'index.json')) as f:
            index = json.load(f)
        self.assertTrue(index["configs"])
        for entry in index["configs"]:
            cfg = load_sim_config(os.path.join(CONFIG_ROOT, entry["id"], 'config.json'))
            self.assertEqual(cfg.id, entry["id"])

    def test_invalid_json(self):
        path = os.path.join(self.test_dir, 'config.json')
        with open(path, 'w') as f:
            f.write('{"chart": ')
        with self.assertRaises(ConfigError):
            load_sim_config(path)

    def test_missing_file(self):
        with self.assertRaises(OSError):
            load_sim_config(os.path.join(self.test_dir, 'missing.json'))


if __name__ == '__main__':
    unittest.main()
