import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srsg.data import Dataset, KnnGraph, build_knn_graph
from srsg.errors import ParameterError
from srsg.support import (
    ObjectiveParams,
    SupportCoefficients,
    coefficient_matrix,
    column_objective,
    column_regularizer,
    exact_coefficient_shift,
    full_objective,
    regularizer,
    simplified_objective,
    support_coefficients,
    support_distance,
)

from conftest import random_dataset
from oracles import coefficients_loop, objective_loop, support_distance_loop


def graph_from(S):
    S = np.asarray(S, dtype=np.int8)
    return KnnGraph(adjacency=S, k=int(S.sum(axis=1).max()))


def random_codes(rng, n, density=0.4):
    Z = rng.standard_normal((n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(Z, 0.0)
    return Z


def random_graph(rng, n, k):
    S = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        S[i, rng.choice([j for j in range(n) if j != i], size=k, replace=False)] = 1
    return graph_from(S)


def test_support_distance_example():
    # 1-indexed i=1, j=3 -> 0-indexed 0, 2
    assert support_distance([0, 1, 0, 2], [0, 0, 3, 2], 0, 2) == 1


def test_support_distance_identical():
    z = np.array([0.0, 1.0, 2.0, 0.0])
    assert support_distance(z, z, 0, 3) == 0


@given(st.integers(0, 10_000))
def test_support_distance_bitsets(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, 12).astype(float)
    b = rng.integers(0, 2, 12).astype(float)
    i, j = rng.choice(12, 2, replace=False)
    assert support_distance(a, b, i, j) == support_distance_loop(a, b, i, j)


@given(st.integers(0, 10_000))
def test_support_distance_pseudometric(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.integers(0, 2, 10) * rng.standard_normal(10) for _ in range(3))
    i, j = 1, 6
    assert support_distance(a, b, i, j) == support_distance(b, a, i, j)
    assert support_distance(a, c, i, j) <= support_distance(a, b, i, j) + support_distance(b, c, i, j)
    assert support_distance(a, a * 3.0, i, j) == 0


def test_support_distance_threshold():
    assert support_distance([1e-11, 0.0, 0.0], [0.0, 0.0, 0.0], 1, 2) == 0
    assert support_distance([1e-9, 0.0, 0.0], [0.0, 0.0, 0.0], 1, 2) == 1


def test_coefficients_example():
    # 1-indexed: i=1, neighbors {2,3}; Z^2=(0.5,0,0.1,0), Z^3=(0.2,0.4,0,0)
    Z = np.zeros((4, 4))
    Z[:, 1] = [0.5, 0.0, 0.1, 0.0]
    Z[:, 2] = [0.2, 0.4, 0.0, 0.0]
    S = np.zeros((4, 4))
    S[0, [1, 2]] = 1
    c = support_coefficients(Z, graph_from(S), 0)
    assert c[1] == 0.0
    assert c[3] == 2.0


def test_coefficients_dense_neighbors():
    n, k = 6, 3
    Z = np.ones((n, n)) - np.eye(n)
    S = np.zeros((n, n))
    S[0, [1, 2, 3]] = 1
    c = support_coefficients(Z, graph_from(S), 0)
    # row 4 is nonzero in every neighbor column
    assert c[4] == -k


@given(st.integers(0, 10_000))
def test_coefficients_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    n, k = 9, 3
    Z = random_codes(rng, n)
    knn = random_graph(rng, n, k)
    C = coefficient_matrix(Z, knn)
    for i in range(n):
        c = support_coefficients(Z, knn, i)
        np.testing.assert_array_equal(c, coefficients_loop(Z, knn.adjacency, i))
        np.testing.assert_array_equal(C.column(i), c)
        # counting identity and range
        used = (np.abs(Z[:, knn.neighbors[i]]) > 1e-10).sum(axis=1)
        np.testing.assert_array_equal(c + 2 * used, k)
        assert np.all(np.abs(c) <= k) and np.all(c == np.round(c))
        np.testing.assert_array_equal(C.positive_set(i), np.flatnonzero(c > 0))
        np.testing.assert_array_equal(C.negative_set(i), np.flatnonzero(c < 0))
        # tau >= gamma whenever C is nonempty
        if np.any(c > 0):
            assert 0.1 * c[c > 0].min() >= 0.1


def test_objective_params_validation():
    knn = graph_from(np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        ObjectiveParams(gamma=0.0, knn=knn)


def test_full_objective_zero_codes(small_data):
    knn = build_knn_graph(small_data, 3)
    val = full_objective(np.zeros((8, 8)), small_data, ObjectiveParams(0.1, knn))
    assert val == pytest.approx(8.0, abs=1e-12)


def test_full_objective_two_points():
    data = Dataset(points=np.array([[1.0, 1.0], [0.0, 0.0]]))
    knn = build_knn_graph(data, 1)
    Z = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert full_objective(Z, data, ObjectiveParams(0.1, knn)) == pytest.approx(0.0, abs=1e-15)


@given(st.integers(0, 10_000))
def test_full_objective_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    data = random_dataset(seed, d=4, n=6)
    Z = random_codes(rng, 6, 0.5)
    knn = random_graph(rng, 6, 2)
    val = full_objective(Z, data, ObjectiveParams(0.7, knn))
    assert val == pytest.approx(objective_loop(Z, data.points, knn.adjacency, 0.7), rel=1e-12)
    # regularizer equals the sum of one-directional column terms
    total = sum(column_regularizer(Z[:, i], i, Z, knn) for i in range(6))
    assert regularizer(Z, knn) == total


def test_full_objective_gamma_zero_limit(small_data):
    rng = np.random.default_rng(2)
    Z = random_codes(rng, 8)
    knn = build_knn_graph(small_data, 3)
    R = small_data.points - small_data.points @ Z
    val = full_objective(Z, small_data, ObjectiveParams(1e-300, knn))
    assert val == pytest.approx(float(np.sum(R * R)), rel=1e-14)


def test_column_objective_examples(small_data):
    c = np.array([2.0, -1.0, 0.0, 3.0, 1.0, -3.0, 1.0, 0.0])
    assert column_objective(np.zeros(8), 0, small_data, c, 0.1) == pytest.approx(1.0)
    z = np.zeros(8)
    base = column_objective(z, 0, small_data, c, 0.1)
    z[3] = 1e-6
    fit_change = float(np.sum((small_data.points[:, 0] - small_data.points @ z) ** 2)) - 1.0
    assert column_objective(z, 0, small_data, c, 0.1) - base - fit_change == pytest.approx(0.3, abs=1e-12)


def test_column_objective_accepts_matrix(small_data):
    C = SupportCoefficients(c=np.arange(64, dtype=float).reshape(8, 8) - 30)
    z = np.zeros(8)
    z[2] = 0.5
    assert column_objective(z, 1, small_data, C, 0.1) == column_objective(z, 1, small_data, C.column(1), 0.1)


@given(st.integers(0, 10_000))
def test_column_objective_differences_match_exact_form(seed):
    """Differences of the coefficient form equal differences of the direct
    one-directional regularizer once the neighbor shift is removed."""
    rng = np.random.default_rng(seed)
    n = 8
    data = random_dataset(seed, d=5, n=n)
    Z = random_codes(rng, n)
    knn = random_graph(rng, n, 3)
    i = int(rng.integers(n))
    c = support_coefficients(Z, knn, i) - exact_coefficient_shift(knn, i)
    z1, z2 = (random_codes(rng, n)[:, i] for _ in range(2))
    z1[i] = z2[i] = 0.0

    def direct(z):
        return float(np.sum((data.points[:, i] - data.points @ z) ** 2)) + 0.3 * column_regularizer(z, i, Z, knn)

    lhs = column_objective(z1, i, data, c, 0.3) - column_objective(z2, i, data, c, 0.3)
    assert lhs == pytest.approx(direct(z1) - direct(z2), abs=1e-10)


def test_simplified_examples(small_data):
    z = np.zeros(8)
    z[[2, 5]] = 0.3
    c_neg = -np.ones(8)
    fit = float(np.sum((small_data.points[:, 0] - small_data.points @ z) ** 2))
    assert simplified_objective(z, 0, small_data, c_neg, 0.1) == pytest.approx(fit)
    c = np.array([0, 1, -2, 1, 1, 0, 1, 1.0])
    assert simplified_objective(z, 0, small_data, c, 0.1) == pytest.approx(fit)


@given(st.integers(0, 10_000))
def test_simplified_vs_column_objective(seed):
    rng = np.random.default_rng(seed)
    data = random_dataset(seed)
    c = rng.integers(-3, 4, 8).astype(float)
    z = rng.standard_normal(8) * (rng.random(8) < 0.5)
    z[0] = 0.0
    neg = (c < 0) & (z != 0)
    diff = simplified_objective(z, 0, data, c, 0.2) - column_objective(z, 0, data, c, 0.2)
    assert diff == pytest.approx(0.2 * np.abs(c[neg]).sum(), abs=1e-12)


def test_exact_shift_is_adjacency_row():
    S = np.zeros((4, 4))
    S[1, [0, 3]] = 1
    np.testing.assert_array_equal(exact_coefficient_shift(graph_from(S), 1), [1, 0, 0, 1])
