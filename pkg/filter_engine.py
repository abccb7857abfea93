# =============================================================================
# FILTER_ENGINE.PY: FILTROS POLINÓMICOS SOBRE GRAFOS
# -----------------------------------------------------------------------------
# H(h, S) = Σ_k h_k S^k aplicado por desplazamientos iterados:
#   z_0 = X ; z_{k+1} = S z_k ; Y = Σ_k h_k z_k
# Nunca se forma S^k explícitamente.
# =============================================================================

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from errors import DimensionMismatch, NonFiniteValue
from graph_engine import Gso, SignalMatrix, expand


@dataclass(frozen=True, eq=False)
class FilterTaps:
    taps: np.ndarray
    # Marcado por tap_engine cuando el diseño LLS tuvo rango deficiente
    degenerate: bool = False

    def __post_init__(self):
        h = np.array(self.taps, dtype=float, copy=True).reshape(-1)
        if h.size < 1:
            raise DimensionMismatch("Se requiere al menos un coeficiente (h0)")
        if not np.all(np.isfinite(h)):
            raise NonFiniteValue("Coeficientes del filtro no finitos")
        h.setflags(write=False)
        object.__setattr__(self, "taps", h)

    @property
    def order(self) -> int:
        return self.taps.size - 1


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, SignalMatrix) else np.asarray(x, dtype=float)


def check_dims(gso: Gso, *signals):
    n = gso.support.n_nodes
    for s in signals:
        v = _values(s)
        if v.ndim != 2 or v.shape[0] != n:
            raise DimensionMismatch(f"La señal tiene {v.shape[0] if v.ndim else 0} nodos; el GSO tiene N={n}")
    shapes = {_values(s).shape for s in signals}
    if len(shapes) > 1:
        raise DimensionMismatch(f"Dimensiones de señales inconsistentes: {sorted(shapes)}")


def krylov_stack(s: np.ndarray, x: np.ndarray, depth: int) -> np.ndarray:
    """[X, SX, …, S^depth X] como arreglo (depth+1, N, T)."""
    if depth < 0:
        raise ValueError(f"depth debe ser >= 0 (recibido {depth})")
    out = np.empty((depth + 1,) + x.shape)
    out[0] = x
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, depth + 1):
            out[k] = s @ out[k - 1]
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue(f"Desbordamiento al calcular S^k X hasta k={depth}")
    return out


def combine(taps: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """Σ_k h_k z_k acumulando en orden de k."""
    with np.errstate(over="ignore", invalid="ignore"):
        y = taps[0] * stack[0]
        for k in range(1, taps.size):
            y = y + taps[k] * stack[k]
    if not np.all(np.isfinite(y)):
        raise NonFiniteValue("Salida del filtro no finita")
    return y


def shift_krylov(gso: Gso, x: SignalMatrix, depth: int) -> list:
    check_dims(gso, x)
    stack = krylov_stack(expand(gso), _values(x), depth)
    return [SignalMatrix(z) for z in stack]


def apply_filter(taps: FilterTaps, gso: Gso, x: SignalMatrix) -> SignalMatrix:
    check_dims(gso, x)
    stack = krylov_stack(expand(gso), _values(x), taps.order)
    return SignalMatrix(combine(taps.taps, stack))


def filter_matrix(taps: FilterTaps, gso: Gso) -> np.ndarray:
    """H(h, S) densa (inspección y pruebas)."""
    n = gso.support.n_nodes
    return combine(taps.taps, krylov_stack(expand(gso), np.eye(n), taps.order))
