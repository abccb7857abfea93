# =============================================================================
# TAP_ENGINE.PY: PASO DE COEFICIENTES (LLS CERRADO)
# -----------------------------------------------------------------------------
# h = argmin_h ‖Y − Σ_k h_k S^k X‖²_F con S fijo.
# Diseño (NT) x (K+1), columna k = vec(S^k X). Se resuelve con SVD
# (scipy.linalg.lstsq / gelsd), que devuelve la solución de norma mínima
# cuando el rango cae por debajo de K+1.
# =============================================================================

from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy import linalg

from config import Config
from errors import DegenerateDesignWarning
from filter_engine import FilterTaps, _values, check_dims, krylov_stack
from graph_engine import Gso, SignalMatrix, expand

logger = logging.getLogger(__name__)


def lstsq_min_norm(design: np.ndarray, target: np.ndarray, rank_tol: float = Config.RANK_TOL,
                   equilibrate: bool = False):
    """
    Mínimos cuadrados de norma mínima. Devuelve (solución, rango, deficiente).

    Con `equilibrate` cada columna se normaliza a norma 1 antes de resolver
    y la solución se desescala; el corte de rango se aplica entonces al
    diseño equilibrado (norma mínima en las coordenadas escaladas).
    """
    n_cols = design.shape[1]
    if n_cols == 0:
        return np.zeros(0), 0, False
    if not np.any(design):
        return np.zeros(n_cols), 0, True
    scale = np.ones(n_cols)
    if equilibrate:
        norms = np.linalg.norm(design, axis=0)
        scale = np.where(norms > 0, norms, 1.0)
        design = design / scale
    sol, _, rank, _ = linalg.lstsq(design, target, cond=rank_tol, lapack_driver="gelsd")
    return np.asarray(sol, dtype=float) / scale, int(rank), int(rank) < n_cols


def design_matrix(gso: Gso, x: SignalMatrix, order: int) -> np.ndarray:
    check_dims(gso, x)
    stack = krylov_stack(expand(gso), _values(x), order)
    # vec columna-mayor de cada S^k X
    return np.stack([z.ravel(order="F") for z in stack], axis=1)


def solve_taps(gso: Gso, x: SignalMatrix, y: SignalMatrix, order: int,
               log_level: int = logging.WARNING) -> FilterTaps:
    if order < 0:
        raise ValueError(f"El orden del filtro debe ser >= 0 (recibido {order})")
    check_dims(gso, x, y)
    phi = design_matrix(gso, x, order)
    target = _values(y).ravel(order="F")

    h, rank, degenerate = lstsq_min_norm(phi, target)
    if degenerate:
        msg = f"Diseño de taps con rango {rank} < {order + 1}; se usa la solución de norma mínima"
        logger.log(log_level, msg)
        warnings.warn(msg, DegenerateDesignWarning, stacklevel=2)
    return FilterTaps(h, degenerate=degenerate)
