import numpy as np
import pytest
from numpy.linalg import matrix_power
from numpy.testing import assert_allclose, assert_array_equal

from errors import DimensionMismatch, NonFiniteValue
from filter_engine import FilterTaps, apply_filter, filter_matrix, krylov_stack, shift_krylov
from graph_engine import Gso, SignalMatrix, expand
from tests.conftest import path_plus_random_support


def explicit_filter(taps, s, x):
    return sum(h * matrix_power(s, k) @ x for k, h in enumerate(taps))


def test_filter_taps_validation():
    with pytest.raises(DimensionMismatch):
        FilterTaps([])
    with pytest.raises(NonFiniteValue):
        FilterTaps([1.0, np.nan])
    assert FilterTaps([1, 2, 3]).order == 2


def test_identity_filter(two_node_adjacency):
    x = SignalMatrix([[1.0, 2.0], [3.0, 4.0]])
    assert_array_equal(apply_filter(FilterTaps([1.0]), two_node_adjacency, x).values, x.values)


def test_single_shift(two_node_adjacency):
    x = SignalMatrix([[1.0], [0.0]])
    y = apply_filter(FilterTaps([0.0, 1.0]), two_node_adjacency, x)
    assert_array_equal(y.values, [[0.0], [1.0]])


def test_matches_explicit_powers(rng):
    support = path_plus_random_support(rng, 3)
    gso = Gso("L", support, rng.uniform(0.5, 1.5, support.n_edges))
    x = SignalMatrix(rng.standard_normal((3, 4)))
    taps = [1.0, 2.0, 3.0]
    got = apply_filter(FilterTaps(taps), gso, x).values
    want = explicit_filter(taps, expand(gso), x.values)
    assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-12


def test_krylov_matches_explicit_powers(rng):
    support = path_plus_random_support(rng, 4)
    gso = Gso("W", support, rng.uniform(0.5, 1.5, support.n_edges))
    x = SignalMatrix(rng.standard_normal((4, 6)))
    stack = shift_krylov(gso, x, 3)
    s = expand(gso)
    assert len(stack) == 4
    for k, z in enumerate(stack):
        want = matrix_power(s, k) @ x.values
        assert_allclose(z.values, want, rtol=1e-12, atol=1e-12 * np.max(np.abs(want)))


def test_columns_filtered_independently(rng):
    support = path_plus_random_support(rng, 5)
    gso = Gso("L", support, rng.uniform(0.5, 1.5, support.n_edges))
    taps = FilterTaps(rng.standard_normal(4))
    x = rng.standard_normal((5, 7))
    full = apply_filter(taps, gso, SignalMatrix(x)).values
    for t in range(7):
        col = apply_filter(taps, gso, SignalMatrix(x[:, [t]])).values
        assert_allclose(col[:, 0], full[:, t], rtol=1e-13, atol=1e-13)


def test_filter_matrix_matches_apply(rng):
    support = path_plus_random_support(rng, 4)
    gso = Gso("L", support, rng.uniform(0.5, 1.5, support.n_edges))
    taps = FilterTaps([0.5, -1.0, 0.25])
    x = SignalMatrix(rng.standard_normal((4, 3)))
    assert_allclose(filter_matrix(taps, gso) @ x.values, apply_filter(taps, gso, x).values, atol=1e-12)


def test_dimension_mismatch(two_node_adjacency):
    with pytest.raises(DimensionMismatch):
        apply_filter(FilterTaps([1.0]), two_node_adjacency, SignalMatrix(np.ones((3, 2))))


def test_overflow_reported():
    s = np.array([[0.0, 1e200], [1e200, 0.0]])
    with pytest.raises(NonFiniteValue):
        krylov_stack(s, np.ones((2, 1)), 3)


def test_signal_matrix_rejects_nan():
    with pytest.raises(NonFiniteValue):
        SignalMatrix([[1.0, np.inf]])


@pytest.mark.parametrize("kind", ["W", "L"])
def test_filter_is_linear_in_the_signal(rng, kind):
    support = path_plus_random_support(rng, 6)
    gso = Gso(kind, support, rng.uniform(0.5, 1.5, support.n_edges))
    taps = FilterTaps(rng.standard_normal(4))
    x1, x2 = rng.standard_normal((6, 9)), rng.standard_normal((6, 9))
    a, b = 1.7, -0.4
    combined = apply_filter(taps, gso, SignalMatrix(a * x1 + b * x2)).values
    separate = a * apply_filter(taps, gso, SignalMatrix(x1)).values + b * apply_filter(taps, gso, SignalMatrix(x2)).values
    assert np.max(np.abs(combined - separate)) <= 1e-10 * np.max(np.abs(separate))


def test_filter_is_additive_in_the_taps(rng):
    support = path_plus_random_support(rng, 5)
    gso = Gso("L", support, rng.uniform(0.5, 1.5, support.n_edges))
    x = SignalMatrix(rng.standard_normal((5, 7)))
    h, g = rng.standard_normal(3), rng.standard_normal(3)
    total = apply_filter(FilterTaps(h + g), gso, x).values
    parts = apply_filter(FilterTaps(h), gso, x).values + apply_filter(FilterTaps(g), gso, x).values
    assert_allclose(total, parts, rtol=1e-10, atol=1e-10 * np.max(np.abs(parts)))
