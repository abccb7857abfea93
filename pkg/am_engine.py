# =============================================================================
# AM_ENGINE.PY: MINIMIZACIÓN ALTERNADA (h, S)
# -----------------------------------------------------------------------------
# Bucle externo:
#   h^(n) = LLS con S^(n-1) fijo            (tap_engine)
#   S^(n) = SCP con h^(n) fijo               (scp_engine)
# La traza acumula cada paso de taps y cada iteración SCP (contador
# "cumulative_iter"); el costo es no creciente en toda la traza.
#
# Además: generación de candidatos iniciales por ajustes LLS de orden
# creciente con h1 = 1, y orquestación multi-arranque.
# =============================================================================

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from config import Config
from errors import AllStartsFailed, DegenerateDesignWarning, FitAborted, IdentificationError, NonFiniteValue
from filter_engine import FilterTaps, _values, check_dims, krylov_stack
from graph_engine import Gso, GsoKind, SignalMatrix, SupportSet, check_same_structure, expand
from objective_engine import cost
from scp_engine import scp_solve
from solver_config import AmConfig
from tap_engine import lstsq_min_norm, solve_taps

logger = logging.getLogger(__name__)


# =============================================================================
# TRAZA
# =============================================================================
class Phase(str, Enum):
    TAP = "TapStep"
    SCP = "ScpStep"


@dataclass(frozen=True)
class TraceRecord:
    cumulative_iter: int
    phase: Phase
    cost: float
    nmse: float
    # solo en pasos SCP
    alpha: float = None
    rho: float = None


@dataclass(frozen=True)
class IterationTrace:
    records: tuple = ()

    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    def nmses(self) -> np.ndarray:
        return np.array([r.nmse for r in self.records])

    @property
    def initial_nmse(self) -> float:
        return self.records[0].nmse if self.records else math.nan

    @property
    def final_cost(self) -> float:
        return self.records[-1].cost if self.records else math.nan

    @property
    def final_nmse(self) -> float:
        return self.records[-1].nmse if self.records else math.nan


class _TraceBuilder:

    def __init__(self, y_energy: float):
        self.y_energy = y_energy
        self.records = []

    def add(self, phase: Phase, value: float, alpha: float = None, rho: float = None):
        nmse = value / self.y_energy if self.y_energy > 0 else math.nan
        self.records.append(TraceRecord(len(self.records) + 1, phase, float(value), nmse, alpha, rho))

    def freeze(self) -> IterationTrace:
        return IterationTrace(tuple(self.records))


# =============================================================================
# ALGORITMO PRINCIPAL
# =============================================================================
def am_fit(gso_init: Gso, x: SignalMatrix, y: SignalMatrix, config: AmConfig):
    """Devuelve (FilterTaps, Gso, IterationTrace)."""
    if gso_init.kind is not config.hypothesis_kind:
        raise ValueError(
            f"gso_init es de tipo {gso_init.kind.value}; la hipótesis es {config.hypothesis_kind.value}"
        )
    check_dims(gso_init, x, y)
    yv = _values(y)
    trace = _TraceBuilder(float(np.sum(yv * yv)))

    taps, gso = None, gso_init
    f_outer = None
    degenerate_steps = 0
    for n in range(1, config.outer_max_iters + 1):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateDesignWarning)
                new_taps = solve_taps(gso, x, y, config.filter_order, log_level=logging.DEBUG)
            degenerate_steps += new_taps.degenerate
            f_tap = cost(new_taps, gso, x, y)
            # el paso LLS nunca debe subir el costo; ante ruido de redondeo se conservan los taps
            if taps is not None and f_tap > f_outer:
                new_taps, f_tap = taps, f_outer
            taps = new_taps
            trace.add(Phase.TAP, f_tap)

            gso_new, scp_records = scp_solve(taps, gso, x, y, config.scp)
        except NonFiniteValue as e:
            raise FitAborted(f"Fallo numérico en la iteración externa {n}: {e}",
                             taps=taps, gso=gso, trace=trace.freeze()) from e

        gso = gso_new
        for rec in scp_records:
            trace.add(Phase.SCP, rec.cost, rec.alpha, rec.rho)
        f_end = scp_records[-1].cost if scp_records else f_tap

        baseline = f_tap if f_outer is None else f_outer
        decrease = (baseline - f_end) / max(baseline, Config.COST_FLOOR)
        logger.info("AM n=%d costo=%.6e (taps %.6e) iter_scp=%d", n, f_end, f_tap, len(scp_records))
        f_outer = f_end
        if decrease < config.outer_eps:
            break

    if degenerate_steps:
        logger.warning("AM: %d de %d pasos de taps con diseño de rango deficiente (norma mínima)", degenerate_steps, n)
    return taps, gso, trace.freeze()


# =============================================================================
# GENERACIÓN DE CANDIDATOS (h1 = 1)
# =============================================================================
@dataclass(frozen=True, eq=False)
class CandidateFit:
    gso: Gso
    h0: float
    higher_taps: np.ndarray      # ĥ_2 … ĥ_m
    residual: float              # ‖y − A·sol‖² antes del recorte
    degenerate: bool


def _edge_columns(support: SupportSet, kind: GsoKind, xv: np.ndarray) -> np.ndarray:
    """Columna e = vec(B_e X), con B_e la matriz base de la arista e."""
    n, t = xv.shape
    cols = np.zeros((support.n_edges, n, t))
    for e, (i, j) in enumerate(support.edges):
        if kind is GsoKind.ADJACENCY:
            cols[e, i] = xv[j]
            cols[e, j] = xv[i]
        else:
            diff = xv[i] - xv[j]
            cols[e, i] = diff
            cols[e, j] = -diff
    return cols.reshape(support.n_edges, -1, order="C").T if support.n_edges else np.zeros((n * t, 0))


def fit_candidate(x: SignalMatrix, y: SignalMatrix, support: SupportSet, kind, order: int,
                  previous: Gso = None) -> CandidateFit:
    """
    Ajuste de orden m:  y ≈ (ĥ0 I + Ŝ_m + Σ_{j=2}^{m} ĥ_j P^j) x,  P = candidato m-1.
    Un único LLS sobre (ĥ0, pesos de Ŝ_m, ĥ_2..ĥ_m), columnas equilibradas a
    norma 1. Los pesos negativos se recortan a 0 después del ajuste.
    """
    kind = GsoKind.parse(kind)
    if order < 1:
        raise ValueError(f"El orden del candidato debe ser >= 1 (recibido {order})")
    if order >= 2 and previous is None:
        raise ValueError("Los candidatos de orden >= 2 requieren el candidato previo")
    xv, yv = _values(x), _values(y)
    if xv.shape != yv.shape or xv.shape[0] != support.n_nodes:
        raise ValueError(f"Dimensiones incompatibles: X {xv.shape}, Y {yv.shape}, N={support.n_nodes}")

    # vec en orden C (fila-mayor) para todas las columnas
    blocks = [xv.reshape(-1, 1), _edge_columns(support, kind, xv)]
    if order >= 2:
        stack = krylov_stack(expand(previous), xv, order)
        blocks.append(np.stack([stack[j].ravel() for j in range(2, order + 1)], axis=1))
    design = np.hstack(blocks)
    target = yv.ravel()
    sol, rank, degenerate = lstsq_min_norm(design, target, equilibrate=True)
    resid = target - design @ sol
    residual = float(resid @ resid)
    if degenerate:
        msg = f"Candidato de orden {order}: diseño con rango {rank} < {design.shape[1]}"
        logger.warning(msg)
        warnings.warn(msg, DegenerateDesignWarning, stacklevel=2)

    e = support.n_edges
    weights = np.maximum(sol[1:1 + e], 0.0)
    logger.debug("Candidato de orden %d: residuo %.6e, rango %d/%d", order, residual, rank, design.shape[1])
    return CandidateFit(Gso(kind, support, weights), float(sol[0]), sol[1 + e:].copy(),
                        residual, degenerate)


def generate_candidates(x: SignalMatrix, y: SignalMatrix, support: SupportSet, kind, order: int) -> list:
    """[S_1^(0), …, S_K^(0)] por ajustes secuenciales de orden 1..K."""
    if order < 1:
        raise ValueError(f"generate_candidates requiere K >= 1 (recibido {order})")
    candidates = []
    previous = None
    for m in range(1, order + 1):
        fit = fit_candidate(x, y, support, kind, m, previous)
        candidates.append(fit.gso)
        previous = fit.gso
    return candidates


# =============================================================================
# MULTI-ARRANQUE
# =============================================================================
@dataclass(frozen=True, eq=False)
class RunOutcome:
    index: int
    label: str
    start: Gso
    taps: FilterTaps = None
    gso: Gso = None
    trace: IterationTrace = None
    error: str = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def final_cost(self) -> float:
        return self.trace.final_cost if self.ok else math.inf


@dataclass(frozen=True)
class MultiStartResult:
    runs: tuple
    best_index: int

    @property
    def best(self) -> RunOutcome:
        return self.runs[self.best_index]


def _start_key(gso: Gso):
    return gso.kind, gso.support, gso.weights.tobytes()


def multi_start(starts, x: SignalMatrix, y: SignalMatrix, config: AmConfig, max_workers: int = 1) -> MultiStartResult:
    """
    am_fit por cada arranque. `starts` admite Gso o pares (etiqueta, Gso).
    Arranques idénticos se calculan una sola vez. Mejor = costo final mínimo,
    empates al índice menor.
    """
    labelled = [s if isinstance(s, tuple) else (f"S{i}", s) for i, s in enumerate(starts)]
    if not labelled:
        raise ValueError("multi_start requiere al menos un arranque")
    for _, g in labelled[1:]:
        check_same_structure(labelled[0][1], g)
    if labelled[0][1].kind is not config.hypothesis_kind:
        raise ValueError(
            f"Los arranques son de tipo {labelled[0][1].kind.value}; la hipótesis es {config.hypothesis_kind.value}"
        )

    unique = {}
    for _, g in labelled:
        unique.setdefault(_start_key(g), g)

    def run(gso):
        try:
            return am_fit(gso, x, y, config), None
        except IdentificationError as e:
            return None, f"{type(e).__name__}: {e}"

    keys = list(unique)
    if max_workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = dict(zip(keys, pool.map(lambda k: run(unique[k]), keys)))
    else:
        results = {k: run(unique[k]) for k in keys}

    runs = []
    for i, (label, g) in enumerate(labelled):
        fitted, error = results[_start_key(g)]
        if error is not None:
            logger.warning("Arranque %d (%s) falló: %s", i, label, error)
            runs.append(RunOutcome(i, label, g, error=error))
        else:
            taps, gso, trace = fitted
            logger.info("Arranque %d (%s): NMSE final %.3e", i, label, trace.final_nmse)
            runs.append(RunOutcome(i, label, g, taps, gso, trace))

    ok = [r for r in runs if r.ok]
    if not ok:
        raise AllStartsFailed("Todos los arranques fallaron", failures=[r.error for r in runs])
    best = min(ok, key=lambda r: (r.final_cost, r.index))
    return MultiStartResult(tuple(runs), best.index)
