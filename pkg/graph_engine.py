# =============================================================================
# GRAPH_ENGINE.PY: DOMINIO DEL GRAFO
# -----------------------------------------------------------------------------
# Soporte a priori, GSO estructural (adyacencia W / Laplaciano L) y la
# biyección pesos-de-arista <-> matriz simétrica N x N.
#
# Representación canónica: el vector de pesos por arista. Las matrices densas
# son vistas derivadas; así S ∈ 𝒮 y supp(S) ⊆ 𝒜 se cumplen por construcción.
# =============================================================================

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import networkx as nx
import numpy as np

from config import Config
from errors import DimensionMismatch, NonFiniteValue, StructuralViolation


# =============================================================================
# TIPOS
# =============================================================================
class GsoKind(str, Enum):
    ADJACENCY = "W"
    LAPLACIAN = "L"

    @classmethod
    def parse(cls, value) -> "GsoKind":
        if isinstance(value, GsoKind):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"Tipo de GSO no soportado: {value!r} (usar 'W' o 'L')") from None


@dataclass(frozen=True)
class SupportSet:
    """
    Conjunto de aristas 𝒜 permitidas. Aristas (i, j) con i < j, sin
    duplicados, ordenadas lexicográficamente.
    """
    n_nodes: int
    edges: tuple = ()

    def __post_init__(self):
        if int(self.n_nodes) <= 0:
            raise StructuralViolation(f"n_nodes debe ser positivo (recibido {self.n_nodes})")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise StructuralViolation(f"Auto-lazo no permitido: ({i}, {j})")
            if i > j:
                raise StructuralViolation(f"Arista no canónica (i > j): ({i}, {j})")
            if i < 0 or j >= self.n_nodes:
                raise StructuralViolation(f"Nodo fuera de rango en ({i}, {j}) para N={self.n_nodes}")
        if any(a >= b for a, b in zip(edges, edges[1:])):
            raise StructuralViolation("Aristas duplicadas o no ordenadas")
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_pairs(cls, n_nodes, pairs) -> "SupportSet":
        """Canoniza pares arbitrarios: (j, i) -> (i, j), orden y sin repetidos."""
        canon = set()
        for i, j in pairs:
            i, j = int(i), int(j)
            if i == j:
                raise StructuralViolation(f"Auto-lazo no permitido: ({i}, {j})")
            pair = (min(i, j), max(i, j))
            if pair in canon:
                raise StructuralViolation(f"Arista duplicada: {pair}")
            canon.add(pair)
        return cls(n_nodes, tuple(sorted(canon)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def rows(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=np.intp)

    @cached_property
    def cols(self) -> np.ndarray:
        return np.array([e[1] for e in self.edges], dtype=np.intp)

    @cached_property
    def mask(self) -> np.ndarray:
        """Máscara booleana simétrica de las posiciones fuera de la diagonal permitidas."""
        m = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        m[self.rows, self.cols] = True
        m[self.cols, self.rows] = True
        return m

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(self.edges)
        return g


def _frozen_array(values, ndim) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"Se esperaba un arreglo de {ndim} dimensiones, recibido {arr.ndim}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Gso:
    kind: GsoKind
    support: SupportSet
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "kind", GsoKind.parse(self.kind))
        w = np.zeros(self.support.n_edges) if self.weights is None else self.weights
        w = _frozen_array(w, 1)
        if w.shape[0] != self.support.n_edges:
            raise DimensionMismatch(
                f"weights tiene {w.shape[0]} entradas; el soporte tiene {self.support.n_edges} aristas"
            )
        if not np.all(np.isfinite(w)):
            raise NonFiniteValue("Pesos de arista no finitos")
        if np.any(w < 0):
            raise StructuralViolation(f"Peso negativo en la arista {int(np.argmin(w))}: {w.min()}")
        object.__setattr__(self, "weights", w)

    @property
    def n_nodes(self) -> int:
        return self.support.n_nodes

    def with_weights(self, weights) -> "Gso":
        return Gso(self.kind, self.support, weights)

    def with_kind(self, kind) -> "Gso":
        """Mismas magnitudes de arista, reinterpretadas bajo otro tipo de GSO."""
        return Gso(kind, self.support, self.weights)

    def matrix(self) -> np.ndarray:
        return expand(self)


@dataclass(frozen=True, eq=False)
class SignalMatrix:
    """Señales apiladas por columnas: N x T, columna t = señal en la muestra t."""
    values: np.ndarray

    def __post_init__(self):
        v = _frozen_array(self.values, 2)
        if v.shape[0] == 0 or v.shape[1] == 0:
            raise DimensionMismatch(f"Dimensiones de señal no positivas: {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue("La matriz de señales contiene NaN/Inf")
        object.__setattr__(self, "values", v)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


# =============================================================================
# OPERACIONES
# =============================================================================
def expand(gso: Gso) -> np.ndarray:
    """
    Pesos -> matriz densa simétrica.
      W: S_ij = S_ji = w_e, diagonal cero.
      L: S_ij = S_ji = -w_e, S_ii = suma de pesos incidentes.
    La simetría es exacta (se escribe el mismo valor en ambas posiciones).
    """
    n = gso.support.n_nodes
    rows, cols, w = gso.support.rows, gso.support.cols, gso.weights
    s = np.zeros((n, n))
    if gso.kind is GsoKind.ADJACENCY:
        s[rows, cols] = w
        s[cols, rows] = w
    else:
        s[rows, cols] = -w
        s[cols, rows] = -w
        deg = np.zeros(n)
        np.add.at(deg, rows, w)
        np.add.at(deg, cols, w)
        s[np.diag_indices(n)] = deg
    return s


def contract(matrix, kind, support: SupportSet, tol: float = Config.STRUCTURAL_TOL) -> Gso:
    """
    Inversa de expand sobre matrices estructurales. El diagonal del
    Laplaciano se recalcula desde los pesos, no se lee de la matriz.
    """
    kind = GsoKind.parse(kind)
    m = np.asarray(matrix, dtype=float)
    n = support.n_nodes
    if m.shape != (n, n):
        raise DimensionMismatch(f"Matriz {m.shape} incompatible con N={n}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteValue("Matriz con NaN/Inf")
    asym = np.max(np.abs(m - m.T)) if n > 1 else 0.0
    if asym > tol:
        raise StructuralViolation(f"Matriz no simétrica (máx |M - Mᵀ| = {asym:.3e})")
    if not validate_support_subset(m, support, tol):
        raise StructuralViolation("Entradas fuera de la diagonal no nulas fuera del soporte")
    if kind is GsoKind.ADJACENCY:
        diag = np.max(np.abs(np.diag(m))) if n else 0.0
        if diag > tol:
            raise StructuralViolation(f"Adyacencia con auto-lazos (|S_ii| = {diag:.3e})")
        w = m[support.rows, support.cols].copy()
    else:
        w = -m[support.rows, support.cols]

    if np.any(w < -Config.NEGATIVE_WEIGHT_TOL):
        e = int(np.argmin(w))
        raise StructuralViolation(
            f"Peso negativo {w[e]:.3e} en la arista {support.edges[e]} para tipo {kind.value}"
        )
    return Gso(kind, support, np.maximum(w, 0.0))


def validate_support_subset(matrix, support: SupportSet, tol: float) -> bool:
    """True si toda entrada fuera de la diagonal con |valor| > tol cae en el soporte."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Se esperaba una matriz cuadrada, recibido {m.shape}")
    off = ~np.eye(m.shape[0], dtype=bool)
    if m.shape[0] == support.n_nodes:
        off &= ~support.mask
    elif support.n_edges:
        raise DimensionMismatch(f"Matriz {m.shape} incompatible con N={support.n_nodes}")
    return bool(np.all(np.abs(m[off]) <= tol))


# =============================================================================
# PUNTOS DE PARTIDA POR DEFECTO
# =============================================================================
def binary_start(support: SupportSet, kind) -> Gso:
    """Todos los pesos a 1: adyacencia binaria (W) o Laplaciano combinatorio (L)."""
    return Gso(kind, support, np.ones(support.n_edges))


def default_starts(support: SupportSet, kind) -> list:
    """
    Par por defecto ("A", "L") expresado en el tipo hipotetizado. En
    coordenadas de arista ambos tienen pesos unitarios.
    """
    kind = GsoKind.parse(kind)
    a = binary_start(support, GsoKind.ADJACENCY).with_kind(kind)
    lap = binary_start(support, GsoKind.LAPLACIAN).with_kind(kind)
    return [("A", a), ("L", lap)]


def check_same_structure(a: Gso, b: Gso):
    if a.support != b.support:
        raise StructuralViolation("Los GSO no comparten soporte")
    if a.kind is not b.kind:
        raise StructuralViolation(f"Los GSO no comparten tipo ({a.kind.value} vs {b.kind.value})")
