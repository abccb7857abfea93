# =============================================================================
# ETL_ENGINE.PY: CARGA Y ESCRITURA DE ARCHIVOS
# -----------------------------------------------------------------------------
# Formatos:
#   soporte  : texto plano; línea 1 = N, luego un par "i j" por línea (0-based)
#   GSO      : JSON {kind, n_nodes, edges, weights}
#   señales  : CSV con cabecera "# N=<n> T=<t>", una fila por nodo
#   taps     : JSON {order, taps, degenerate}
#   config   : JSON (ver solver_config)
# Los errores de formato salen como InputFormatError con número de línea.
# =============================================================================

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np
import pandas as pd

from config import Config
from errors import ConfigError, DimensionMismatch, InputFormatError, NonFiniteValue, StructuralViolation
from filter_engine import FilterTaps
from graph_engine import Gso, GsoKind, SignalMatrix, SupportSet, check_same_structure
from solver_config import am_config_from_dict, experiment_spec_from_dict

SIGNAL_HEADER = re.compile(r"^#\s*N\s*=\s*(\d+)\s+T\s*=\s*(\d+)\s*$")


# =============================================================================
# SOPORTE
# =============================================================================
def read_support(path) -> SupportSet:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    content = [(k + 1, ln.strip()) for k, ln in enumerate(lines) if ln.strip()]
    if not content:
        raise InputFormatError(path, 1, "archivo vacío; la primera línea debe ser N")

    first_line, first = content[0]
    try:
        n_nodes = int(first)
    except ValueError:
        raise InputFormatError(path, first_line, f"se esperaba N entero, recibido {first!r}") from None
    if n_nodes <= 0:
        raise InputFormatError(path, first_line, f"N debe ser positivo (recibido {n_nodes})")

    edges = []
    seen = set()
    for line_no, text in content[1:]:
        parts = text.split()
        if len(parts) != 2:
            raise InputFormatError(path, line_no, f"se esperaba 'i j', recibido {text!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputFormatError(path, line_no, f"índices no enteros: {text!r}") from None
        if not i < j:
            raise InputFormatError(path, line_no, f"se requiere i < j (recibido {i} {j})")
        if j >= n_nodes or i < 0:
            raise InputFormatError(path, line_no, f"nodo fuera de rango para N={n_nodes}: {i} {j}")
        if (i, j) in seen:
            raise InputFormatError(path, line_no, f"arista duplicada {i} {j}")
        seen.add((i, j))
        edges.append((i, j))
    return SupportSet(n_nodes, tuple(sorted(edges)))


def write_support(path, support: SupportSet):
    rows = [str(support.n_nodes)] + [f"{i} {j}" for i, j in support.edges]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


# =============================================================================
# GSO / TAPS (JSON)
# =============================================================================
def gso_to_dict(gso: Gso) -> dict:
    return {
        "kind": gso.kind.value,
        "n_nodes": gso.support.n_nodes,
        "edges": [list(e) for e in gso.support.edges],
        "weights": [float(w) for w in gso.weights],
    }


def gso_from_dict(data: dict, where="gso") -> Gso:
    try:
        support = SupportSet.from_pairs(int(data["n_nodes"]), [tuple(e) for e in data["edges"]])
        pairs = [(min(e), max(e)) for e in data["edges"]]
        if len(data["weights"]) != len(pairs):
            raise DimensionMismatch(f"{len(data['weights'])} pesos para {len(pairs)} aristas")
        order = {p: k for k, p in enumerate(pairs)}
        weights = np.array([float(data["weights"][order[e]]) for e in support.edges])
        return Gso(GsoKind.parse(data["kind"]), support, weights)
    except KeyError as e:
        raise InputFormatError(where, None, f"falta el campo {e}") from None
    except (TypeError, ValueError) as e:
        raise InputFormatError(where, None, str(e)) from None


def _read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputFormatError(path, e.lineno, f"JSON inválido: {e.msg}") from None


def write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def read_gso_json(path) -> Gso:
    return gso_from_dict(_read_json(path), where=path)


def write_gso_json(path, gso: Gso):
    write_json(path, gso_to_dict(gso))


def taps_to_dict(taps: FilterTaps) -> dict:
    return {"order": taps.order, "taps": [float(h) for h in taps.taps], "degenerate": taps.degenerate}


def read_taps_json(path) -> FilterTaps:
    data = _read_json(path)
    try:
        return FilterTaps(np.array(data["taps"], dtype=float))
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(path, None, f"taps inválidos: {e}") from None


def read_starts_file(path, support: SupportSet, kind) -> list:
    """Arranques desde JSON: un GSO o una lista de GSO; se expresan en el tipo hipotetizado."""
    data = _read_json(path)
    items = data if isinstance(data, list) else [data]
    if not items:
        raise InputFormatError(path, None, "lista de arranques vacía")
    starts = []
    for k, item in enumerate(items):
        gso = gso_from_dict(item, where=f"{path}[{k}]").with_kind(kind)
        if gso.support != support:
            raise InputFormatError(path, None, f"el arranque {k} no comparte el soporte")
        starts.append((f"file{k}", gso))
    return starts


# =============================================================================
# SEÑALES (CSV)
# =============================================================================
def read_signal_csv(path) -> SignalMatrix:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
    m = SIGNAL_HEADER.match(header)
    if not m:
        raise InputFormatError(path, 1, f"cabecera inválida {header!r}; se esperaba '# N=<n> T=<t>'")
    n_nodes, n_samples = int(m.group(1)), int(m.group(2))

    try:
        df = pd.read_csv(path, header=None, skiprows=1, skip_blank_lines=True, dtype=str)
    except pd.errors.EmptyDataError:
        raise InputFormatError(path, 2, f"sin filas de datos; se esperaban N={n_nodes}") from None
    except pd.errors.ParserError as e:
        raise InputFormatError(path, None, f"CSV mal formado: {e}") from None

    if len(df) != n_nodes:
        raise InputFormatError(path, None, f"se esperaban N={n_nodes} filas, hay {len(df)}")
    if df.shape[1] != n_samples:
        raise InputFormatError(path, None, f"se esperaban T={n_samples} columnas, hay {df.shape[1]}")

    checked = df.apply(lambda col: pd.to_numeric(col, errors="coerce")).to_numpy(dtype=float)
    bad = np.argwhere(~np.isfinite(checked))
    if bad.size:
        r, c = bad[0]
        raise InputFormatError(path, int(r) + 2, f"valor no numérico o no finito en la columna {int(c) + 1}")
    # float() de Python: redondeo correcto, recarga bit a bit de %.17g
    values = df.to_numpy(dtype=object).astype(float)
    try:
        return SignalMatrix(values)
    except (DimensionMismatch, NonFiniteValue) as e:
        raise InputFormatError(path, None, str(e)) from None


def write_signal_csv(path, x: SignalMatrix):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# N={x.n_nodes} T={x.n_samples}\n")
        pd.DataFrame(x.values).to_csv(f, header=False, index=False, float_format=Config.FLOAT_FORMAT)


# =============================================================================
# CONFIGURACIÓN
# =============================================================================
def load_am_config(path):
    try:
        return am_config_from_dict(_read_json(path))
    except InputFormatError as e:
        raise ConfigError(str(e)) from None


def load_experiment_spec(path):
    try:
        return experiment_spec_from_dict(_read_json(path))
    except InputFormatError as e:
        raise ConfigError(str(e)) from None


def reload_matches(path, gso: Gso, tol: float = Config.STRUCTURAL_TOL) -> bool:
    """Recarga un GSO emitido y verifica estructura y pesos."""
    try:
        again = read_gso_json(path)
        check_same_structure(again, gso)
    except (InputFormatError, StructuralViolation):
        return False
    return bool(np.all(np.abs(again.weights - gso.weights) <= tol))
