# =============================================================================
# SCP_ENGINE.PY: PASO DE GSO POR PROGRAMACIÓN CONVEXA SECUENCIAL
# -----------------------------------------------------------------------------
# Por iteración l:
#   1. rho = rho(l-1)                                  (caja uniforme)
#   2. g   = ∂f/∂w en S^[l-1]                          (objective_engine)
#   3. ŵ   = argmin de la aproximación lineal en la caja ∩ {w >= 0}
#            -> vértice por signo de g, arista por arista
#   4. α*  = argmin_{α∈[0,1]} f(w + αΔ), Δ = ŵ − w     (malla + sección áurea)
#            sobre el costo reducido por QR, confirmado con el costo exacto
#   5. w   = w + α*Δ                                   (combinación convexa)
# α = 0 está en la malla: el costo nunca sube.
# =============================================================================

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from config import Config
from errors import NonFiniteValue
from filter_engine import FilterTaps, _values, check_dims
from graph_engine import Gso, SignalMatrix, check_same_structure, expand
from objective_engine import cost_from_matrix, edge_gradient, reduce_signals
from solver_config import ScpConfig

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2          # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2   # 1 / phi^2


@dataclass(frozen=True)
class ScpRecord:
    iteration: int
    cost: float
    alpha: float
    rho: float
    step_inf: float     # ‖Δ‖∞ de la dirección propuesta


# =============================================================================
# SUBPROBLEMA LINEAL (CERRADO)
# =============================================================================
def surrogate_minimize(gso_current: Gso, edge_grad, rho: float) -> Gso:
    g = np.asarray(edge_grad, dtype=float)
    w = gso_current.weights
    if g.shape != w.shape:
        raise ValueError(f"edge_grad tiene {g.size} entradas; el soporte tiene {w.size} aristas")
    if not rho > 0:
        raise ValueError(f"rho debe ser positivo (recibido {rho})")
    lower = np.maximum(0.0, w - rho)
    upper = w + rho
    # g == 0 conserva el peso actual
    w_hat = np.where(g > 0, lower, np.where(g < 0, upper, w))
    return gso_current.with_weights(w_hat)


# =============================================================================
# BÚSQUEDA LINEAL
# =============================================================================
def _step_weights(w, delta, alpha):
    return np.maximum(w + alpha * delta, 0.0)


def _segment_cost(taps, s_from, s_to, signals):
    """α -> f(h, (1−α)S + αŜ) sobre las señales reducidas; no finito -> inf."""
    ds = s_to - s_from

    def evaluate(alpha):
        try:
            return signals.cost(taps, s_from + alpha * ds)
        except NonFiniteValue:
            logger.warning("Costo no finito en alpha=%.6g; se descarta", alpha)
            return math.inf
    return evaluate


def _grid_costs(taps, s_from, s_to, alphas, signals) -> np.ndarray:
    """Costo reducido en toda la malla de una vez: pila (G, N, N) de GSOs."""
    h = np.asarray(taps, dtype=float)
    s = s_from + alphas[:, None, None] * (s_to - s_from)
    z = np.broadcast_to(signals.x, (alphas.size,) + signals.x.shape)
    with np.errstate(over="ignore", invalid="ignore"):
        out = h[0] * z
        for k in range(1, h.size):
            z = s @ z
            out = out + h[k] * z
        resid = signals.y - out
        values = np.sum(resid * resid, axis=(1, 2)) + signals.offset
    bad = ~np.isfinite(values)
    if np.any(bad):
        logger.warning("Costo no finito en %d puntos de la malla; se descartan", int(np.sum(bad)))
    return np.where(bad, math.inf, values)


def _golden_refine(f, a, b, steps, best):
    """
    Sección áurea de `steps` pasos sobre [a, b]. `best` = (alpha, valor) ya
    evaluado; solo se reemplaza ante una mejora estricta.
    """
    if steps <= 0 or b <= a:
        return best

    def keep(alpha, value):
        nonlocal best
        if value < best[1] or (value == best[1] and alpha < best[0]):
            best = (alpha, value)

    h = b - a
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    keep(c, yc)
    keep(d, yd)
    for _ in range(steps - 1):
        if yc <= yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
            keep(c, yc)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
            keep(d, yd)
    return best


def _search(h, gso_current, gso_hat, xv, yv, signals, f0, grid, refines):
    """
    Malla + sección áurea sobre el costo reducido; el α elegido se confirma
    con el costo exacto en los pesos que se aceptarían. Si no mejora a f0
    se devuelve α = 0.
    """
    w = gso_current.weights
    delta = gso_hat.weights - w
    if not np.any(delta):
        return 0.0, f0

    s_from, s_to = expand(gso_current), expand(gso_hat)
    f = _segment_cost(h, s_from, s_to, signals)
    alphas = np.linspace(0.0, 1.0, grid)
    values = _grid_costs(h, s_from, s_to, alphas, signals)
    i = int(np.argmin(values))   # primera ocurrencia -> alpha menor
    best = (float(alphas[i]), float(values[i]))
    lo = alphas[max(i - 1, 0)]
    hi = alphas[min(i + 1, grid - 1)]
    alpha, _ = _golden_refine(f, float(lo), float(hi), refines, best)
    if alpha == 0.0:
        return 0.0, f0

    s_new = expand(gso_current.with_weights(_step_weights(w, delta, alpha)))
    try:
        value = cost_from_matrix(h, s_new, xv, yv)
    except NonFiniteValue:
        logger.warning("Costo exacto no finito en alpha=%.6g; se conserva el iterado", alpha)
        return 0.0, f0
    if value >= f0:
        return 0.0, f0
    return alpha, value


def line_search(taps: FilterTaps, gso_current: Gso, gso_hat: Gso, x: SignalMatrix, y: SignalMatrix,
                grid: int = Config.LINE_SEARCH_GRID,
                refines: int = Config.LINE_SEARCH_REFINES):
    """
    Devuelve (alpha*, costo en alpha*). Malla inclusiva {0, 1/(grid-1), …, 1},
    luego refinamiento áureo sobre el intervalo que rodea al mejor punto.
    Empates -> alpha menor. El costo devuelto es el exacto.
    """
    check_same_structure(gso_current, gso_hat)
    check_dims(gso_current, x, y)
    if grid < 2:
        raise ValueError(f"grid debe ser >= 2 (recibido {grid})")
    xv, yv = _values(x), _values(y)
    f0 = _current_cost(taps.taps, gso_current, xv, yv)
    return _search(taps.taps, gso_current, gso_hat, xv, yv, reduce_signals(xv, yv), f0, grid, refines)


def _current_cost(h, gso, xv, yv) -> float:
    try:
        return cost_from_matrix(h, expand(gso), xv, yv)
    except NonFiniteValue:
        raise NonFiniteValue("Costo no finito en el iterado actual (alpha=0)") from None


# =============================================================================
# BUCLE SCP
# =============================================================================
def scp_solve(taps: FilterTaps, gso_init: Gso, x: SignalMatrix, y: SignalMatrix, config: ScpConfig):
    """
    Minimiza f(h, ·) sobre el conjunto estructural con h fijo.
    Devuelve (Gso final, lista de ScpRecord). Nunca devuelve un iterado
    infactible; los NonFiniteValue se propagan.
    """
    check_dims(gso_init, x, y)
    xv, yv = _values(x), _values(y)
    signals = reduce_signals(xv, yv)
    h = taps.taps
    gso = gso_init
    f_prev = _current_cost(h, gso, xv, yv)
    records = []

    for l in range(1, config.max_iters + 1):
        rho = config.trust.rho(l - 1)
        g = edge_gradient(signals.derivative(h, expand(gso)), gso)
        gso_hat = surrogate_minimize(gso, g, rho)
        delta = gso_hat.weights - gso.weights

        alpha, f_new = _search(h, gso, gso_hat, xv, yv, signals, f_prev,
                               config.line_search_grid, config.line_search_refines)
        if alpha > 0:
            gso = gso.with_weights(_step_weights(gso.weights, delta, alpha))

        step_inf = float(np.max(np.abs(delta))) if delta.size else 0.0
        records.append(ScpRecord(l, f_new, alpha, rho, step_inf))
        logger.debug("SCP l=%d costo=%.6e alpha=%.4f rho=%.4g |Δ|∞=%.3e", l, f_new, alpha, rho, step_inf)

        decrease = (f_prev - f_new) / max(f_prev, Config.COST_FLOOR)
        f_prev = f_new
        if decrease < config.eps:
            break

    return gso, records
