# =============================================================================
# CONFIG.PY: FUENTE ÚNICA DE VERDAD (GLOBAL)
# Proyecto: Identificación Conjunta Filtro + GSO
# Todas las constantes numéricas viven aquí; los dataclasses de
# solver_config.py toman sus defaults de esta clase.
# =============================================================================

class Config:

    # -------------------------------------------------------------------------
    # IDENTIDAD DEL PROYECTO
    # -------------------------------------------------------------------------
    PROJECT_NAME = "gsoid"
    VERSION = "1.0.0"
    REPORT_SCHEMA_VERSION = 1

    # -------------------------------------------------------------------------
    # TOLERANCIAS ESTRUCTURALES
    # -------------------------------------------------------------------------
    # Simetría / entradas fuera del soporte al contraer una matriz densa
    STRUCTURAL_TOL = 1e-10
    # Pesos en [-tol, 0) se recortan a 0; por debajo es violación
    NEGATIVE_WEIGHT_TOL = 1e-10

    # -------------------------------------------------------------------------
    # MÍNIMOS CUADRADOS
    # -------------------------------------------------------------------------
    # Rango efectivo: valores singulares < RANK_TOL * sigma_max se descartan
    RANK_TOL = 1e-10

    # -------------------------------------------------------------------------
    # SCP (REGIÓN DE CONFIANZA + BÚSQUEDA LINEAL)
    # -------------------------------------------------------------------------
    TRUST_RHO0 = 1.0
    TRUST_GAMMA = 0.9
    TRUST_RHO_MIN = 1e-3

    SCP_MAX_ITERS = 200
    SCP_EPS = 1e-6
    LINE_SEARCH_GRID = 33
    LINE_SEARCH_REFINES = 20

    # Denominador mínimo del test de decrecimiento relativo
    COST_FLOOR = 1e-15

    # -------------------------------------------------------------------------
    # MINIMIZACIÓN ALTERNADA (BUCLE EXTERNO)
    # -------------------------------------------------------------------------
    OUTER_EPS = 1e-8
    OUTER_MAX_ITERS = 50

    # Holgura relativa admitida al verificar trazas no crecientes
    MONOTONE_SLACK = 1e-9

    # -------------------------------------------------------------------------
    # EXPERIMENTO SINTÉTICO (DEFAULTS)
    # -------------------------------------------------------------------------
    EXP_N_NODES = 30
    EXP_N_SAMPLES = 500
    EXP_FILTER_ORDER = 5
    EXP_TAP_SIGMA = 3.0
    EXP_EDGE_PROB = 0.2
    EXP_RADIUS = 0.3
    EXP_WEIGHT_RANGE = (0.5, 1.5)
    EXP_NOISE_SIGMA = 0.0
    EXP_SEED = 0
    MAX_GRAPH_RESAMPLES = 100

    # -------------------------------------------------------------------------
    # SALIDAS
    # -------------------------------------------------------------------------
    # 17 cifras significativas: recarga bit a bit
    FLOAT_FORMAT = "%.17g"
    START_MODES = ("defaults", "candidates", "defaults+candidates")
