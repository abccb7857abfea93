# health_engine.py
import numpy as np

from config import Config


def trace_is_monotone(costs, slack: float = Config.MONOTONE_SLACK) -> bool:
    """
    Costo no creciente paso a paso, con holgura slack * (1 + costo inicial).
    """
    c = np.asarray(costs, dtype=float)
    if c.size < 2:
        return True
    tol = slack * (1.0 + abs(c[0]))
    return bool(np.all(np.diff(c) <= tol))


def cargar_salud_corridas(runs, reload_checks=None):
    """
    Salud técnica de una corrida multi-arranque. Devuelve un diccionario con
    estadísticas y un estado semáforo.
      VERDE    : todas las trazas monótonas y todos los GSO recargan bien
      AMARILLO : algún arranque falló, el resto está sano
      ROJO     : alguna traza crece o algún GSO emitido no recarga
    """
    reload_checks = reload_checks or {}
    ok_runs = [r for r in runs if r.ok]
    no_monotonas = [r.index for r in ok_runs if not trace_is_monotone(r.trace.costs())]
    fallidos = [r.index for r in runs if not r.ok]
    recarga_mala = sorted(name for name, good in reload_checks.items() if not good)

    # -------------------------------------------------------------------------
    # LÓGICA DE SEMÁFORO
    # -------------------------------------------------------------------------
    if no_monotonas or recarga_mala:
        estado = "ROJO"
    elif fallidos:
        estado = "AMARILLO"
    else:
        estado = "VERDE"

    return {
        "estado": estado,
        "total_arranques": len(runs),
        "arranques_ok": len(ok_runs),
        "arranques_fallidos": fallidos,
        "trazas_no_monotonas": no_monotonas,
        "recarga_fallida": recarga_mala,
    }
