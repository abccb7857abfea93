# =============================================================================
# SYNTH_ENGINE.PY: GENERADOR DE EXPERIMENTOS SINTÉTICOS
# -----------------------------------------------------------------------------
# PRNG: numpy Generator sobre PCG64 (64 bits), semilla = spec.seed.
# Orden fijo del flujo aleatorio:
#   1. grafo (cada reintento consume su bloque)
#        ER : N(N-1)/2 uniformes, triángulo superior fila por fila
#        RGG: N x 2 posiciones uniformes en [0, 1)²
#   2. pesos de arista uniformes en weight_range (orden del soporte)
#   3. taps h_k ~ Normal(0, sigma²), k = 0..K
#   4. X ~ Normal(0, 1), columna por columna
#   5. ruido de observación (solo si noise_sigma > 0)
# =============================================================================

from __future__ import annotations

import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np

from config import Config
from errors import GraphGenerationFailed
from filter_engine import FilterTaps, apply_filter
from graph_engine import Gso, SignalMatrix, SupportSet
from solver_config import ErdosRenyi, ExperimentSpec, RandomGeometric

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Experiment:
    support: SupportSet
    gso_true: Gso
    taps_true: FilterTaps
    x: SignalMatrix
    y: SignalMatrix


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def _sample_graph(model, n_nodes: int, rng: np.random.Generator) -> nx.Graph:
    if isinstance(model, ErdosRenyi):
        iu, ju = np.triu_indices(n_nodes, k=1)
        keep = rng.random(iu.size) < model.p
        g = nx.Graph()
        g.add_nodes_from(range(n_nodes))
        g.add_edges_from(zip(iu[keep].tolist(), ju[keep].tolist()))
        return g
    if isinstance(model, RandomGeometric):
        coords = rng.random((n_nodes, 2))
        pos = {i: tuple(coords[i]) for i in range(n_nodes)}
        return nx.random_geometric_graph(n_nodes, model.radius, pos=pos)
    raise ValueError(f"Modelo de grafo no soportado: {model!r}")


def sample_connected_support(model, n_nodes: int, rng: np.random.Generator,
                             max_tries: int = Config.MAX_GRAPH_RESAMPLES) -> SupportSet:
    for attempt in range(1, max_tries + 1):
        g = _sample_graph(model, n_nodes, rng)
        if nx.is_connected(g):
            logger.debug("Grafo conexo en el intento %d (%d aristas)", attempt, g.number_of_edges())
            return SupportSet.from_pairs(n_nodes, g.edges())
    raise GraphGenerationFailed(
        f"Sin grafo conexo tras {max_tries} intentos ({model!r}, N={n_nodes}); aumente p o radius"
    )


def generate_experiment(spec: ExperimentSpec) -> Experiment:
    rng = make_rng(spec.seed)

    support = sample_connected_support(spec.graph_model, spec.n_nodes, rng)
    lo, hi = spec.weight_range
    weights = rng.uniform(lo, hi, support.n_edges)
    gso_true = Gso(spec.generating_kind, support, weights)

    taps_true = FilterTaps(rng.normal(0.0, spec.tap_sigma, spec.filter_order + 1))
    x = SignalMatrix(rng.standard_normal((spec.n_samples, spec.n_nodes)).T)

    y = apply_filter(taps_true, gso_true, x)
    if spec.noise_sigma > 0:
        noise = rng.standard_normal((spec.n_samples, spec.n_nodes)).T
        y = SignalMatrix(y.values + spec.noise_sigma * noise)

    logger.info("Experimento: N=%d T=%d K=%d |E|=%d tipo=%s semilla=%d",
                spec.n_nodes, spec.n_samples, spec.filter_order, support.n_edges,
                spec.generating_kind.value, spec.seed)
    return Experiment(support, gso_true, taps_true, x, y)
