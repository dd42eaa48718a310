import json
import math

import numpy as np
import pytest

import clusterkit as ck


def test_graph_counts():
    assert ck.count(2, 1, "two") == 1
    assert ck.count(2, 1, "af") == 2
    assert ck.count(4, 0, "conn") == 38
    assert sorted(map(len, ck.enumerate(2, 1, "af"))) == [2, 3]


def test_cancellation_and_census():
    assert ck.cancellation_sum(2, 1, [(1, 2), (1, 3), (2, 3)]) == 1
    assert ck.cancellation_sum(2, 1, [(3, 1), (1, 2)]) == 0
    assert ck.census_identity(2)["articulation_free"] == 16


def test_exact_rod_values():
    rod = ck.PairPotential.hard_rod(1.0)
    assert ck.virial_beta(1, rod)["exact_value"] == "-2"
    assert ck.virial_beta(2, rod)["exact_value"] == "-3/2"
    assert ck.dissymmetry_exact_hard_rod(3) == ["0", "0", "0", "0"]


def test_hard_sphere_coefficients():
    hs = ck.PairPotential.hard_sphere()
    assert ck.c2_coefficient(0, 1.5, hs)["value"] == 0.0
    assert ck.h_coefficient(0, 0.5, hs)["value"] == -0.5
    assert hs.c_beta() == pytest.approx(4 * math.pi / 3)


def test_py_solve_contact_value():
    rod = ck.PairPotential.hard_rod(1.0)
    res = ck.py_solve(rod, 0.3, dr=0.005, n_points=2048)
    assert isinstance(res["g"], np.ndarray)
    assert res["residual"] < 1e-8
    np.testing.assert_allclose(res["h"], res["c"] + res["t"], atol=1e-12)


def test_oz_solve_zero_density():
    c = -np.ones(64)
    h = ck.oz_solve_h(c, 0.05, 0.0)
    np.testing.assert_array_equal(h, c)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        ck.PairPotential.hard_sphere(-1.0)
    with pytest.raises(ArithmeticError):
        ck.py_solve(ck.PairPotential.hard_sphere(), 3.0)


def test_cli_in_process():
    code, out, err = ck.run_cli(["verify", "oz", "--k", "0"])
    assert code == 0
    assert json.loads(out)["pass"] is True
    code, out, err = ck.run_cli(["coeff", "c2", "--potential", "/nonexistent.ini"])
    assert code == 2
    assert json.loads(err)["error"] == "config"
