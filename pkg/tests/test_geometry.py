import numpy as np
import pytest

from flatdpp.geometry import (
    PointSet,
    distance_matrix,
    distance_power_matrix,
    grid_points,
    uniform_points,
)


def test_power_zero_gives_ones():
    ps = PointSet([[0.3, 0.1], [0.9, 0.4], [0.2, 0.8]])
    assert np.array_equal(distance_power_matrix(ps, 0), np.ones((3, 3)))


def test_line_points_power_one_and_three():
    ps = PointSet([0.0, 1.0, 3.0])
    np.testing.assert_array_equal(
        distance_power_matrix(ps, 1), [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    np.testing.assert_array_equal(
        distance_power_matrix(ps, 3), [[0, 1, 27], [1, 0, 8], [27, 8, 0]])


def test_even_powers_are_elementwise_powers_of_squared():
    rng = np.random.default_rng(0)
    ps = PointSet(rng.uniform(size=(7, 3)))
    D2 = distance_power_matrix(ps, 2)
    for p in range(4):
        assert np.array_equal(distance_power_matrix(ps, 2 * p), D2**p)


def test_symmetric_to_bit_equality_and_nonnegative():
    rng = np.random.default_rng(1)
    ps = PointSet(rng.standard_normal((9, 2)))
    for p in (1, 2, 5):
        D = distance_power_matrix(ps, p)
        assert np.array_equal(D, D.T)
        assert np.all(D >= 0)
        assert np.all(np.diag(D) == 0)


def test_negative_or_fractional_power_rejected():
    ps = PointSet([0.0, 1.0])
    with pytest.raises(ValueError):
        distance_power_matrix(ps, -1)


def test_coincident_points_rejected():
    with pytest.raises(ValueError, match="distinct"):
        PointSet([[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="distinct"):
        PointSet([0.5, 0.5 + 1e-13])


def test_shape_validation():
    with pytest.raises(ValueError):
        PointSet(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        PointSet(np.zeros((0, 1)))
    with pytest.raises(ValueError):
        PointSet([[np.nan]])


def test_coords_immutable():
    ps = PointSet([0.0, 1.0])
    with pytest.raises(ValueError):
        ps.coords[0] = 5.0


def test_csv_round_trip(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0.25,0.5\n0.75,0.125\n0.1,0.9\n")
    ps = PointSet.from_csv(path)
    assert (ps.n, ps.d) == (3, 2)
    np.testing.assert_array_equal(ps.coords[1], [0.75, 0.125])


def test_one_dimensional_input_promoted():
    ps = PointSet([0.1, 0.4, 0.9])
    assert (ps.n, ps.d) == (3, 1)


def test_generators():
    ps = uniform_points(10, 2, seed=3)
    assert (ps.n, ps.d) == (10, 2)
    assert np.array_equal(ps.coords, uniform_points(10, 2, seed=3).coords)
    gp = grid_points(9, 2)
    assert (gp.n, gp.d) == (9, 2)


def test_distance_matrix_matches_power_one():
    ps = uniform_points(6, 3, seed=5)
    assert np.array_equal(distance_matrix(ps), distance_power_matrix(ps, 1))
