# =============================================================================
# METRICS_ENGINE.PY: MÉTRICAS DE EVALUACIÓN
# SOLO LECTURA: NO INTERFIERE CON EL ESTIMADOR
# =============================================================================

import math

import numpy as np
from scipy import stats

from errors import DegenerateInput, DimensionMismatch, LengthMismatch, SupportMismatch, ZeroReference
from graph_engine import Gso, SignalMatrix


def _values(s):
    return s.values if isinstance(s, SignalMatrix) else np.asarray(s, dtype=float)


# =============================================================================
# NMSE
# =============================================================================
def nmse(y_hat: SignalMatrix, y: SignalMatrix) -> float:
    """Σ_t ‖ŷ_t − y_t‖² / Σ_t ‖y_t‖²."""
    a, b = _values(y_hat), _values(y)
    if a.shape != b.shape:
        raise DimensionMismatch(f"Dimensiones distintas: {a.shape} vs {b.shape}")
    ref = float(np.sum(b * b))
    if ref == 0:
        raise ZeroReference("‖Y‖²_F = 0: NMSE indefinido")
    diff = a - b
    return float(np.sum(diff * diff)) / ref


def nmse_from_cost(cost_value: float, y: SignalMatrix) -> float:
    b = _values(y)
    ref = float(np.sum(b * b))
    if ref == 0:
        raise ZeroReference("‖Y‖²_F = 0: NMSE indefinido")
    return cost_value / ref


# =============================================================================
# CORRELACIÓN DE SPEARMAN
# =============================================================================
def spearman(a, b) -> float:
    """
    Pearson sobre rangos; empates con rango promedio (scipy.stats.spearmanr).
    Vector constante -> DegenerateInput (no se reporta 0 en silencio).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"Longitudes distintas: {a.size} vs {b.size}")
    if a.size < 2:
        raise DegenerateInput("Spearman requiere al menos 2 observaciones")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise DegenerateInput("Vector constante: correlación de rangos indefinida")
    r = float(stats.spearmanr(a, b)[0])
    if math.isnan(r):
        raise DegenerateInput("Correlación de rangos indefinida")
    return max(-1.0, min(1.0, r))


# =============================================================================
# PESOS DE ARISTA Y CUANTILES
# =============================================================================
def edge_weight_vectors(gso_a: Gso, gso_b: Gso):
    """Magnitudes |w_e| alineadas en el orden del soporte (tipos pueden diferir)."""
    if gso_a.support != gso_b.support:
        raise SupportMismatch("Los GSO no comparten soporte")
    return np.abs(gso_a.weights).copy(), np.abs(gso_b.weights).copy()


def qq_pairs(a, b) -> list:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"Longitudes distintas: {a.size} vs {b.size}")
    return list(zip(np.sort(a).tolist(), np.sort(b).tolist()))
