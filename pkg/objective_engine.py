# =============================================================================
# OBJECTIVE_ENGINE.PY: COSTO CONJUNTO f(h, S) Y SU GRADIENTE
# -----------------------------------------------------------------------------
#   f(h, S) = ‖Y − Σ_k h_k S^k X‖²_F
#
# Derivada no estructurada D = ∂f/∂S (expansión por trazas):
#   D = −2 Σ_{k≥1} h_k Σ_{r<k} (S^r X Yᵀ S^{k−r−1})ᵀ
#       + Σ_{k1,k2≥0} h_k1 h_k2 Σ_{r<k1+k2} (S^r X Xᵀ S^{k1+k2−r−1})ᵀ
# Gradiente estructurado (S simétrica): D + Dᵀ − diag(D).
# Gradiente en pesos de arista:
#   W: g_e = D_ij + D_ji
#   L: g_e = D_ii + D_jj − D_ij − D_ji
# =============================================================================

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from errors import NonFiniteValue
from filter_engine import FilterTaps, _values, check_dims, combine, krylov_stack
from graph_engine import Gso, GsoKind, SignalMatrix, expand


# =============================================================================
# NÚCLEO MATRICIAL (S densa)
# =============================================================================
def cost_from_matrix(taps, s, x, y) -> float:
    h = np.asarray(taps, dtype=float)
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    resid = y - combine(h, krylov_stack(s, x, h.size - 1))
    with np.errstate(over="ignore", invalid="ignore"):
        c = float(np.sum(resid * resid))
    if not np.isfinite(c):
        raise NonFiniteValue("Residuo no finito")
    return c


def unstructured_derivative(taps, s, x, y) -> np.ndarray:
    """
    D = ∂f/∂S tal cual la expansión por trazas. Los productos
    (S^r X Yᵀ S^q)ᵀ = (S^q Y)(S^r X)ᵀ se agrupan por potencia izquierda usando
    las pilas de Krylov de X y de Y.
    """
    h = np.asarray(taps, dtype=float)
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    n = s.shape[0]
    order = h.size - 1
    if order == 0:
        return np.zeros((n, n))

    px = krylov_stack(s, x, 2 * order - 1)
    qy = krylov_stack(s, y, order - 1)

    with np.errstate(over="ignore", invalid="ignore"):
        # término cruzado: Σ_k h_k Σ_{a+b=k-1} (S^a Y)(S^b X)ᵀ
        cross = np.zeros((n, n))
        for a in range(order):
            coef = h[a + 1:order + 1]                     # h_{a+b+1}, b = 0..order-1-a
            right = np.tensordot(coef, px[:coef.size], axes=1)
            cross += qy[a] @ right.T

        # término cuadrático: c_m = Σ_{k1+k2=m} h_k1 h_k2
        c = np.convolve(h, h)
        quad = np.zeros((n, n))
        top = 2 * order
        for a in range(top):
            coef = c[a + 1:top + 1]                       # c_{a+r+1}, r = 0..top-1-a
            right = np.tensordot(coef, px[:coef.size], axes=1)
            quad += px[a] @ right.T

        d = -2.0 * cross + quad
    if not np.all(np.isfinite(d)):
        raise NonFiniteValue("Gradiente no finito")
    return d


def structured_gradient(d: np.ndarray) -> np.ndarray:
    g = d + d.T
    g[np.diag_indices_from(g)] -= np.diag(d)
    return g


def edge_gradient(d: np.ndarray, gso: Gso) -> np.ndarray:
    i, j = gso.support.rows, gso.support.cols
    off = d[i, j] + d[j, i]
    if gso.kind is GsoKind.ADJACENCY:
        return off
    return d[i, i] + d[j, j] - off


# =============================================================================
# OPERACIONES SOBRE GSO ESTRUCTURAL
# =============================================================================
def cost(taps: FilterTaps, gso: Gso, x: SignalMatrix, y: SignalMatrix) -> float:
    check_dims(gso, x, y)
    return cost_from_matrix(taps.taps, expand(gso), _values(x), _values(y))


def grad_matrix(taps: FilterTaps, gso: Gso, x: SignalMatrix, y: SignalMatrix) -> np.ndarray:
    check_dims(gso, x, y)
    d = unstructured_derivative(taps.taps, expand(gso), _values(x), _values(y))
    return structured_gradient(d)


def grad_edges(taps: FilterTaps, gso: Gso, x: SignalMatrix, y: SignalMatrix) -> np.ndarray:
    check_dims(gso, x, y)
    d = unstructured_derivative(taps.taps, expand(gso), _values(x), _values(y))
    return edge_gradient(d, gso)


# =============================================================================
# REDUCCIÓN POR QR (T > N)
# -----------------------------------------------------------------------------
# Xᵀ = Q R (QR económica)  =>  X = Rᵀ Qᵀ y H X vive en el espacio de filas de X:
#   f(h, S) = ‖Y Q − H Rᵀ‖²_F + ‖Y − Y Q Qᵀ‖²_F
# El segundo término no depende de (h, S); costo y gradiente se evalúan
# sobre bloques N x N en lugar de N x T.
# =============================================================================
@dataclass(frozen=True, eq=False)
class ReducedSignals:
    x: np.ndarray
    y: np.ndarray
    offset: float

    def cost(self, taps, s) -> float:
        return cost_from_matrix(taps, s, self.x, self.y) + self.offset

    def derivative(self, taps, s) -> np.ndarray:
        return unstructured_derivative(taps, s, self.x, self.y)


def reduce_signals(x, y) -> ReducedSignals:
    xv, yv = np.asarray(_values(x), dtype=float), np.asarray(_values(y), dtype=float)
    n, t = xv.shape
    if t <= n:
        return ReducedSignals(xv, yv, 0.0)
    q, r = linalg.qr(xv.T, mode="economic")
    yq = yv @ q
    perp = yv - yq @ q.T
    return ReducedSignals(r.T, yq, float(np.sum(perp * perp)))
