# =============================================================================
# APP.PY: FRONT-END POR LOTES
# -----------------------------------------------------------------------------
# Uso:
#   python app.py synthetic --spec spec.json --config am.json --out runs/exp1
#   python app.py fit --x x.csv --y y.csv --support support.txt \
#                     --config am.json --out runs/fit1
# Códigos de salida: 0 ok, 1 error de configuración/entrada, 2 fallo numérico.
# =============================================================================

from __future__ import annotations

import argparse
import logging
import sys
import time
import warnings

from config import Config
from am_engine import generate_candidates, multi_start
from data_engine.etl_engine import (
    load_am_config,
    load_experiment_spec,
    read_signal_csv,
    read_starts_file,
    read_support,
    reload_matches,
)
from data_engine.synth_engine import generate_experiment
from errors import (
    AllStartsFailed,
    ConfigError,
    DegenerateDesignWarning,
    DegenerateInput,
    DimensionMismatch,
    GraphGenerationFailed,
    InputFormatError,
    NonFiniteValue,
    StructuralViolation,
    SupportMismatch,
)
from graph_engine import default_starts
from health_engine import cargar_salud_corridas
from metrics_engine import edge_weight_vectors, qq_pairs, spearman
import tracker

logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

INPUT_ERRORS = (
    ConfigError,
    InputFormatError,
    DimensionMismatch,
    StructuralViolation,
    SupportMismatch,
    GraphGenerationFailed,
    OSError,
)
NUMERICAL_ERRORS = (AllStartsFailed, NonFiniteValue)


# =============================================================================
# ARRANQUES
# =============================================================================
def build_starts(mode: str, support, x, y, config) -> list:
    """Lista de (etiqueta, Gso) según --starts."""
    if mode.startswith("file:"):
        return read_starts_file(mode[len("file:"):], support, config.hypothesis_kind)
    if mode not in Config.START_MODES:
        raise ConfigError(f"--starts desconocido: {mode!r} (usar {', '.join(Config.START_MODES)} o file:<ruta>)")

    starts = []
    if "defaults" in mode:
        starts += default_starts(support, config.hypothesis_kind)
    if "candidates" in mode:
        if config.filter_order < 1:
            if mode == "candidates":
                raise ConfigError("--starts candidates requiere filter_order >= 1")
        else:
            cands = generate_candidates(x, y, support, config.hypothesis_kind, config.filter_order)
            starts += [(f"S{m}", g) for m, g in enumerate(cands, start=1)]
    return starts


def _spearman_or_none(gso_true, gso_inferred):
    try:
        return spearman(*edge_weight_vectors(gso_true, gso_inferred))
    except DegenerateInput as e:
        logger.warning("Spearman indefinido: %s", e)
        return None


def _base_report(mode, config, x, result, t0):
    return {
        "mode": mode,
        "hypothesis_kind": config.hypothesis_kind.value,
        "n_nodes": x.n_nodes,
        "n_samples": x.n_samples,
        "filter_order": config.filter_order,
        "best_start_index": result.best_index,
        "best_start": result.best.label,
        "final_cost": result.best.trace.final_cost,
        "final_nmse": result.best.trace.final_nmse,
        "wall_time_s": time.perf_counter() - t0,
    }


def _log_row(mode, status, config=None, x=None, result=None, t0=None):
    return {
        "mode": mode,
        "status": status,
        "n_nodes": x.n_nodes if x is not None else None,
        "n_samples": x.n_samples if x is not None else None,
        "filter_order": config.filter_order if config is not None else None,
        "hypothesis_kind": config.hypothesis_kind.value if config is not None else None,
        "n_starts": len(result.runs) if result is not None else None,
        "best_start": result.best_index if result is not None else None,
        "final_nmse": result.best.trace.final_nmse if result is not None else None,
        "wall_time_s": round(time.perf_counter() - t0, 3) if t0 is not None else None,
    }


def _guarded(mode, out_dir, body):
    """Ejecuta body() y traduce errores a códigos de salida."""
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDesignWarning)
            return body(t0)
    except NUMERICAL_ERRORS as e:
        print(f"ERROR numérico: {e}", file=sys.stderr)
        code, status = EXIT_NUMERICAL, "numerical_failure"
    except INPUT_ERRORS as e:
        print(f"ERROR de configuración/entrada: {e}", file=sys.stderr)
        code, status = EXIT_CONFIG, "config_error"
    try:
        tracker.log_run_execution(out_dir, _log_row(mode, status, t0=t0))
    except OSError:
        pass
    return code


# =============================================================================
# COMANDOS
# =============================================================================
def run_synthetic(spec_file, am_config_file, out_dir, starts="defaults+candidates", seed=None, workers=1) -> int:
    def body(t0):
        spec = load_experiment_spec(spec_file)
        if seed is not None:
            spec = spec.with_seed(seed)
        config = load_am_config(am_config_file)
        exp = generate_experiment(spec)
        tracker.write_inputs(out_dir, exp)

        start_list = build_starts(starts, exp.support, exp.x, exp.y, config)
        result = multi_start(start_list, exp.x, exp.y, config, max_workers=workers)

        tracker.write_trace(out_dir, result)
        gso_path, _ = tracker.write_best(out_dir, result)
        true_w, inferred_w = edge_weight_vectors(exp.gso_true, result.best.gso)
        tracker.write_qq(out_dir, qq_pairs(true_w, inferred_w))

        runs = [
            tracker.run_summary(r, {"spearman": _spearman_or_none(exp.gso_true, r.gso) if r.ok else None})
            for r in result.runs
        ]
        report = _base_report("synthetic", config, exp.x, result, t0)
        report.update({
            "seed": spec.seed,
            "generating_kind": spec.generating_kind.value,
            "spearman": _spearman_or_none(exp.gso_true, result.best.gso),
            "runs": runs,
            "health": cargar_salud_corridas(result.runs, {gso_path.name: reload_matches(gso_path, result.best.gso)}),
        })
        tracker.write_report(out_dir, report)
        tracker.log_run_execution(out_dir, _log_row("synthetic", "ok", config, exp.x, result, t0))
        return EXIT_OK

    return _guarded("synthetic", out_dir, body)


def run_fit(x_file, y_file, support_file, am_config_file, out_dir, starts="defaults+candidates", workers=1) -> int:
    def body(t0):
        config = load_am_config(am_config_file)
        support = read_support(support_file)
        x = read_signal_csv(x_file)
        y = read_signal_csv(y_file)
        if x.n_nodes != support.n_nodes:
            raise DimensionMismatch(f"{x_file}: se esperaban N={support.n_nodes} filas (soporte), hay N={x.n_nodes}")
        if y.n_nodes != support.n_nodes:
            raise DimensionMismatch(f"{y_file}: se esperaban N={support.n_nodes} filas (soporte), hay N={y.n_nodes}")
        if x.n_samples != y.n_samples:
            raise DimensionMismatch(f"T distinto: {x_file} T={x.n_samples}, {y_file} T={y.n_samples}")

        start_list = build_starts(starts, support, x, y, config)
        result = multi_start(start_list, x, y, config, max_workers=workers)

        tracker.write_trace(out_dir, result)
        gso_path, _ = tracker.write_best(out_dir, result)
        report = _base_report("fit", config, x, result, t0)
        report.update({
            "runs": [tracker.run_summary(r) for r in result.runs],
            "health": cargar_salud_corridas(result.runs, {gso_path.name: reload_matches(gso_path, result.best.gso)}),
        })
        tracker.write_report(out_dir, report)
        tracker.log_run_execution(out_dir, _log_row("fit", "ok", config, x, result, t0))
        return EXIT_OK

    return _guarded("fit", out_dir, body)


# =============================================================================
# ARGPARSE
# =============================================================================
def _add_common(p):
    p.add_argument("--config", required=True, help="JSON de configuración AM/SCP")
    p.add_argument("--out", required=True, help="Directorio de salida")
    p.add_argument("--starts", default="defaults+candidates",
                   help="defaults | candidates | defaults+candidates | file:<ruta>")
    p.add_argument("--workers", type=int, default=1, help="Hilos para arranques en paralelo")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=Config.PROJECT_NAME,
        description="Identificación conjunta de coeficientes de filtro y pesos del GSO",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synthetic", help="Genera un experimento sintético y lo resuelve")
    ps.add_argument("--spec", required=True, help="JSON del experimento")
    ps.add_argument("--seed", type=int, default=None, help="Reemplaza la semilla del spec")
    _add_common(ps)

    pf = sub.add_parser("fit", help="Ajusta sobre datos X, Y y un soporte dados")
    pf.add_argument("--x", required=True, help="CSV de entradas (N x T)")
    pf.add_argument("--y", required=True, help="CSV de salidas (N x T)")
    pf.add_argument("--support", required=True, help="Lista de aristas del soporte")
    _add_common(pf)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "synthetic":
        return run_synthetic(args.spec, args.config, args.out, args.starts, args.seed, args.workers)
    return run_fit(args.x, args.y, args.support, args.config, args.out, args.starts, args.workers)


if __name__ == "__main__":
    sys.exit(main())
