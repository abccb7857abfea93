import os
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd

from config import Config
from data_engine.etl_engine import (
    gso_to_dict,
    taps_to_dict,
    write_gso_json,
    write_json,
    write_signal_csv,
    write_support,
)

TRACE_FILE = "trace.csv"
REPORT_FILE = "report.json"
GSO_FILE = "gso_inferred.json"
TAPS_FILE = "taps_inferred.json"
QQ_FILE = "qq.csv"
RUN_LOG_FILE = "run_log.csv"

TRACE_COLUMNS = ["start", "label", "cumulative_iter", "phase", "cost", "nmse", "alpha", "rho"]
RUN_LOG_COLUMNS = [
    "timestamp",
    "mode",
    "status",
    "n_nodes",
    "n_samples",
    "filter_order",
    "hypothesis_kind",
    "n_starts",
    "best_start",
    "final_nmse",
    "wall_time_s",
]


# =============================================================================
# INIT
# =============================================================================
def _init_out_dir(out_dir) -> Path:
    out = Path(out_dir)
    os.makedirs(out, exist_ok=True)
    return out


# =============================================================================
# TRAZAS
# =============================================================================
def trace_frame(result) -> pd.DataFrame:
    """Una fila por iteración acumulada y por arranque exitoso."""
    rows = []
    for run in result.runs:
        if not run.ok:
            continue
        for rec in run.trace.records:
            rows.append({
                "start": run.index,
                "label": run.label,
                "cumulative_iter": rec.cumulative_iter,
                "phase": rec.phase.value,
                "cost": rec.cost,
                "nmse": rec.nmse,
                # vacías en pasos de taps
                "alpha": rec.alpha,
                "rho": rec.rho,
            })
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def write_trace(out_dir, result) -> Path:
    path = _init_out_dir(out_dir) / TRACE_FILE
    trace_frame(result).to_csv(path, index=False, float_format=Config.FLOAT_FORMAT, lineterminator="\n")
    return path


def write_qq(out_dir, pairs) -> Path:
    path = _init_out_dir(out_dir) / QQ_FILE
    df = pd.DataFrame(pairs, columns=["true_quantile", "inferred_quantile"])
    df.to_csv(path, index=False, float_format=Config.FLOAT_FORMAT, lineterminator="\n")
    return path


# =============================================================================
# ARTEFACTOS DEL MEJOR ARRANQUE
# =============================================================================
def write_best(out_dir, result):
    out = _init_out_dir(out_dir)
    best = result.best
    write_gso_json(out / GSO_FILE, best.gso)
    write_json(out / TAPS_FILE, taps_to_dict(best.taps))
    return out / GSO_FILE, out / TAPS_FILE


def write_inputs(out_dir, experiment):
    """Vuelca las entradas generadas para poder re-ejecutarlas con `fit`."""
    out = _init_out_dir(out_dir)
    write_signal_csv(out / "x.csv", experiment.x)
    write_signal_csv(out / "y.csv", experiment.y)
    write_support(out / "support.txt", experiment.support)
    write_gso_json(out / "gso_true.json", experiment.gso_true)
    write_json(out / "taps_true.json", taps_to_dict(experiment.taps_true))


def run_summary(run, extra=None) -> dict:
    row = {
        "start_index": run.index,
        "start": run.label,
        "status": "ok" if run.ok else "failed",
        "error": run.error,
    }
    if run.ok:
        row.update({
            "final_cost": run.trace.final_cost,
            "final_nmse": run.trace.final_nmse,
            "initial_nmse": run.trace.initial_nmse,
            "iterations": len(run.trace.records),
            "taps": [float(h) for h in run.taps.taps],
            "gso": gso_to_dict(run.gso),
        })
    if extra:
        row.update(extra)
    return row


def write_report(out_dir, report: dict) -> Path:
    path = _init_out_dir(out_dir) / REPORT_FILE
    write_json(path, {"schema_version": Config.REPORT_SCHEMA_VERSION, **report})
    return path


# =============================================================================
# LOG DE EJECUCIONES
# =============================================================================
def log_run_execution(out_dir, data: dict):
    """Añade una fila a run_log.csv (cabecera en el primer uso)."""
    path = _init_out_dir(out_dir) / RUN_LOG_FILE
    row = {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"), **data}
    df = pd.DataFrame([row]).reindex(columns=RUN_LOG_COLUMNS)
    df.to_csv(path, mode="a", index=False, header=not path.exists(), lineterminator="\n")
