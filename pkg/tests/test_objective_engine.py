import numpy as np
import pytest
from numpy.linalg import matrix_power
from numpy.testing import assert_allclose

from filter_engine import FilterTaps
from graph_engine import Gso, SignalMatrix, expand
from objective_engine import (
    cost,
    cost_from_matrix,
    edge_gradient,
    grad_edges,
    grad_matrix,
    reduce_signals,
    structured_gradient,
    unstructured_derivative,
)
from tests.conftest import make_instance, path_plus_random_support


def _noisy_instance(seed, n_nodes, order, kind):
    """Instancia con residuo no nulo: taps y GSO perturbados respecto a los generadores."""
    rng = np.random.default_rng(seed + 1000)
    support, gso, taps, x, y = make_instance(seed, n_nodes=n_nodes, n_samples=6, order=order, kind=kind)
    gso = gso.with_weights(gso.weights * rng.uniform(0.7, 1.3, gso.weights.size))
    taps = FilterTaps(taps.taps + 0.1 * rng.standard_normal(taps.taps.size))
    return taps, gso, x, y


def _rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-12)


def naive_derivative(h, s, x, y):
    """Expansión por trazas con potencias explícitas."""
    n = s.shape[0]
    p = [matrix_power(s, k) for k in range(2 * len(h))]
    d = np.zeros((n, n))
    for k in range(1, len(h)):
        for r in range(k):
            d -= 2 * h[k] * (p[r] @ x @ y.T @ p[k - r - 1]).T
    for k1 in range(len(h)):
        for k2 in range(len(h)):
            for r in range(k1 + k2):
                d += h[k1] * h[k2] * (p[r] @ x @ x.T @ p[k1 + k2 - r - 1]).T
    return d


def test_cost_zero_at_generator():
    _, gso, taps, x, y = make_instance(0, order=3)
    assert cost(taps, gso, x, y) < 1e-20 * np.sum(y.values ** 2) + 1e-20


def test_cost_from_matrix_agrees(rng):
    taps, gso, x, y = _noisy_instance(1, 4, 2, "L")
    assert cost(taps, gso, x, y) == cost_from_matrix(taps.taps, expand(gso), x.values, y.values)


@pytest.mark.parametrize("seed", range(5))
def test_derivative_matches_trace_expansion(seed):
    taps, gso, x, y = _noisy_instance(seed, 4, 3, "W")
    s = expand(gso)
    got = unstructured_derivative(taps.taps, s, x.values, y.values)
    want = naive_derivative(taps.taps, s, x.values, y.values)
    assert _rel_err(got, want) < 1e-10


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("kind", ["W", "L"])
def test_grad_edges_finite_differences(seed, kind):
    rng = np.random.default_rng(seed)
    n_nodes = int(rng.integers(3, 6))
    order = int(rng.integers(1, 5))
    taps, gso, x, y = _noisy_instance(seed, n_nodes, order, kind)
    g = grad_edges(taps, gso, x, y)
    fd = np.empty_like(g)
    w = gso.weights
    for e in range(w.size):
        step = 1e-5 * (1 + abs(w[e]))
        up, dn = w.copy(), w.copy()
        up[e] += step
        dn[e] -= step
        fd[e] = (cost(taps, gso.with_weights(up), x, y) - cost(taps, gso.with_weights(dn), x, y)) / (2 * step)
    assert _rel_err(g, fd) < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_grad_matrix_symmetric_pair_finite_differences(seed):
    taps, gso, x, y = _noisy_instance(seed, 4, 3, "W")
    s = expand(gso)
    g = grad_matrix(taps, gso, x, y)
    assert_allclose(g, g.T, atol=0)
    h, xv, yv = taps.taps, x.values, y.values
    for i in range(4):
        for j in range(i + 1, 4):
            step = 1e-5 * (1 + abs(s[i, j]))
            up, dn = s.copy(), s.copy()
            up[i, j] += step
            up[j, i] += step
            dn[i, j] -= step
            dn[j, i] -= step
            fd = (cost_from_matrix(h, up, xv, yv) - cost_from_matrix(h, dn, xv, yv)) / (2 * step)
            assert abs(g[i, j] - fd) <= 1e-6 * max(abs(fd), np.max(np.abs(g)))


def test_adjacency_edge_gradient_is_structured_entry():
    taps, gso, x, y = _noisy_instance(3, 5, 2, "W")
    g_mat = grad_matrix(taps, gso, x, y)
    g_e = grad_edges(taps, gso, x, y)
    assert_allclose(g_e, g_mat[gso.support.rows, gso.support.cols], rtol=1e-12)


def test_order_zero_gradient_vanishes():
    taps, gso, x, y = _noisy_instance(0, 4, 0, "L")
    assert not np.any(grad_edges(taps, gso, x, y))


def test_zero_residual_gradient_vanishes():
    _, gso, taps, x, y = make_instance(4, n_nodes=4, order=3, kind="W")
    g = grad_edges(taps, gso, x, y)
    scale = max(1.0, float(np.sum(y.values ** 2)))
    assert np.max(np.abs(g)) < 1e-9 * scale
    assert np.max(np.abs(grad_matrix(taps, gso, x, y))) < 1e-9 * scale


def test_directional_derivative():
    taps, gso, x, y = _noisy_instance(7, 5, 3, "L")
    rng = np.random.default_rng(0)
    v = rng.standard_normal(gso.weights.size)
    want = float(grad_edges(taps, gso, x, y) @ v)
    errs = []
    for eps in (1e-4, 1e-5, 1e-6):
        up = gso.with_weights(np.maximum(gso.weights + eps * v, 0))
        dn = gso.with_weights(np.maximum(gso.weights - eps * v, 0))
        fd = (cost(taps, up, x, y) - cost(taps, dn, x, y)) / (2 * eps)
        errs.append(abs(fd - want) / abs(want))
    assert min(errs) < 1e-6


def test_structured_gradient_formula(rng):
    d = rng.standard_normal((4, 4))
    g = structured_gradient(d)
    assert_allclose(g, d + d.T - np.diag(np.diag(d)))


def test_laplacian_edge_gradient_formula(rng):
    support = path_plus_random_support(rng, 4)
    gso = Gso("L", support, np.ones(support.n_edges))
    d = rng.standard_normal((4, 4))
    g = edge_gradient(d, gso)
    for e, (i, j) in enumerate(support.edges):
        assert g[e] == pytest.approx(d[i, i] + d[j, j] - d[i, j] - d[j, i])


def test_cost_dimension_check(two_node_adjacency):
    from errors import DimensionMismatch
    with pytest.raises(DimensionMismatch):
        cost(FilterTaps([1.0]), two_node_adjacency, SignalMatrix(np.ones((2, 3))), SignalMatrix(np.ones((2, 4))))


@pytest.mark.parametrize("kind", ["W", "L"])
def test_qr_reduction_preserves_cost_and_derivative(kind):
    rng = np.random.default_rng(21)
    _, gso, taps, x, y = make_instance(21, n_nodes=5, n_samples=40, order=3, kind=kind)
    y = SignalMatrix(y.values + 0.3 * rng.standard_normal(y.values.shape))
    s = expand(gso.with_weights(gso.weights * 1.2))
    reduced = reduce_signals(x, y)
    assert reduced.x.shape == (5, 5) and reduced.y.shape == (5, 5)
    assert reduced.offset > 0

    full = cost_from_matrix(taps.taps, s, x.values, y.values)
    assert reduced.cost(taps.taps, s) == pytest.approx(full, rel=1e-10)
    d_full = unstructured_derivative(taps.taps, s, x.values, y.values)
    assert _rel_err(reduced.derivative(taps.taps, s), d_full) < 1e-9


def test_qr_reduction_skipped_for_short_records():
    x = SignalMatrix(np.arange(12.0).reshape(4, 3))
    y = SignalMatrix(np.ones((4, 3)))
    reduced = reduce_signals(x, y)
    assert reduced.offset == 0.0
    assert_allclose(reduced.x, x.values, atol=0)
    assert_allclose(reduced.y, y.values, atol=0)
