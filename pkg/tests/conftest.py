import numpy as np
import pytest

from filter_engine import FilterTaps, apply_filter
from graph_engine import Gso, GsoKind, SignalMatrix, SupportSet


def path_plus_random_support(rng, n_nodes, extra_prob=0.4):
    """Camino 0-1-…-(N-1) más aristas aleatorias: siempre conexo."""
    pairs = {(i, i + 1) for i in range(n_nodes - 1)}
    for i in range(n_nodes):
        for j in range(i + 2, n_nodes):
            if rng.random() < extra_prob:
                pairs.add((i, j))
    return SupportSet.from_pairs(n_nodes, pairs)


def make_instance(seed, n_nodes=5, n_samples=None, order=2, kind=GsoKind.LAPLACIAN,
                  weight_range=(0.5, 1.5), tap_scale=1.0):
    rng = np.random.default_rng(seed)
    support = path_plus_random_support(rng, n_nodes)
    gso = Gso(kind, support, rng.uniform(*weight_range, support.n_edges))
    taps = FilterTaps(tap_scale * rng.standard_normal(order + 1))
    x = SignalMatrix(rng.standard_normal((n_nodes, n_samples or 10 * n_nodes)))
    y = apply_filter(taps, gso, x)
    return support, gso, taps, x, y


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def instance():
    return make_instance


@pytest.fixture
def two_node_adjacency():
    return Gso(GsoKind.ADJACENCY, SupportSet(2, ((0, 1),)), [1.0])
