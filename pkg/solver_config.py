# =============================================================================
# SOLVER_CONFIG.PY: CONFIGURACIÓN POR CORRIDA (SCP / AM / EXPERIMENTO)
# Los defaults salen de Config; cada dataclass valida sus invariantes.
# =============================================================================

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace

from config import Config
from errors import ConfigError
from graph_engine import GsoKind


def _coerce(obj, name: str, kind):
    """Normaliza el campo `name` a int/float; strings, bools y no finitos -> ConfigError."""
    value = getattr(obj, name)
    try:
        if isinstance(value, (bool, str, bytes)):
            raise TypeError
        converted = kind(value)
        if kind is int and converted != value:
            raise ValueError
    except (TypeError, ValueError, OverflowError):
        expected = "entero" if kind is int else "numérico"
        raise ConfigError(f"{name} debe ser {expected} (recibido {value!r})") from None
    if kind is float and not math.isfinite(converted):
        raise ConfigError(f"{name} debe ser finito (recibido {value!r})")
    object.__setattr__(obj, name, converted)
    return converted


# -----------------------------------------------------------------------------
# REGIÓN DE CONFIANZA
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class TrustSchedule:
    rho0: float = Config.TRUST_RHO0
    gamma: float = Config.TRUST_GAMMA
    rho_min: float = Config.TRUST_RHO_MIN

    def __post_init__(self):
        if not _coerce(self, "rho0", float) > 0:
            raise ConfigError(f"rho0 debe ser positivo (recibido {self.rho0})")
        if not 0 < _coerce(self, "gamma", float) <= 1:
            raise ConfigError(f"gamma debe estar en (0, 1] (recibido {self.gamma})")
        if not _coerce(self, "rho_min", float) > 0:
            raise ConfigError(f"rho_min debe ser positivo (recibido {self.rho_min})")

    def rho(self, iteration: int) -> float:
        """Amplitud uniforme de la caja en la iteración SCP l (l >= 0)."""
        return max(self.rho_min, self.rho0 * self.gamma ** iteration)


@dataclass(frozen=True)
class ScpConfig:
    trust: TrustSchedule = field(default_factory=TrustSchedule)
    max_iters: int = Config.SCP_MAX_ITERS
    eps: float = Config.SCP_EPS
    line_search_grid: int = Config.LINE_SEARCH_GRID
    line_search_refines: int = Config.LINE_SEARCH_REFINES

    def __post_init__(self):
        if not isinstance(self.trust, TrustSchedule):
            raise ConfigError(f"trust debe ser un TrustSchedule (recibido {self.trust!r})")
        if _coerce(self, "max_iters", int) < 1:
            raise ConfigError(f"max_iters debe ser positivo (recibido {self.max_iters})")
        if not _coerce(self, "eps", float) > 0:
            raise ConfigError(f"eps debe ser positivo (recibido {self.eps})")
        if _coerce(self, "line_search_grid", int) < 2:
            raise ConfigError(f"line_search_grid debe ser >= 2 (recibido {self.line_search_grid})")
        if _coerce(self, "line_search_refines", int) < 0:
            raise ConfigError("line_search_refines no puede ser negativo")


@dataclass(frozen=True)
class AmConfig:
    filter_order: int
    scp: ScpConfig = field(default_factory=ScpConfig)
    outer_eps: float = Config.OUTER_EPS
    outer_max_iters: int = Config.OUTER_MAX_ITERS
    hypothesis_kind: GsoKind = GsoKind.LAPLACIAN

    def __post_init__(self):
        if _coerce(self, "filter_order", int) < 0:
            raise ConfigError(f"filter_order debe ser >= 0 (recibido {self.filter_order})")
        if not isinstance(self.scp, ScpConfig):
            raise ConfigError(f"scp debe ser un ScpConfig (recibido {self.scp!r})")
        if not _coerce(self, "outer_eps", float) > 0:
            raise ConfigError(f"outer_eps debe ser positivo (recibido {self.outer_eps})")
        if _coerce(self, "outer_max_iters", int) < 1:
            raise ConfigError("outer_max_iters debe ser positivo")
        try:
            object.__setattr__(self, "hypothesis_kind", GsoKind.parse(self.hypothesis_kind))
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None


# -----------------------------------------------------------------------------
# EXPERIMENTO SINTÉTICO
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ErdosRenyi:
    p: float = Config.EXP_EDGE_PROB
    name: str = "erdos_renyi"

    def __post_init__(self):
        if not 0 < _coerce(self, "p", float) < 1:
            raise ConfigError(f"p debe estar en (0, 1) (recibido {self.p})")


@dataclass(frozen=True)
class RandomGeometric:
    radius: float = Config.EXP_RADIUS
    name: str = "random_geometric"

    def __post_init__(self):
        if not _coerce(self, "radius", float) > 0:
            raise ConfigError(f"radius debe ser positivo (recibido {self.radius})")


GRAPH_MODELS = {
    "erdos_renyi": ErdosRenyi,
    "random_geometric": RandomGeometric,
}


@dataclass(frozen=True)
class ExperimentSpec:
    n_nodes: int = Config.EXP_N_NODES
    n_samples: int = Config.EXP_N_SAMPLES
    filter_order: int = Config.EXP_FILTER_ORDER
    tap_sigma: float = Config.EXP_TAP_SIGMA
    generating_kind: GsoKind = GsoKind.LAPLACIAN
    graph_model: object = field(default_factory=ErdosRenyi)
    weight_range: tuple = Config.EXP_WEIGHT_RANGE
    noise_sigma: float = Config.EXP_NOISE_SIGMA
    seed: int = Config.EXP_SEED

    def __post_init__(self):
        n_nodes = _coerce(self, "n_nodes", int)
        n_samples = _coerce(self, "n_samples", int)
        if n_nodes < 1 or n_samples < 1 or _coerce(self, "filter_order", int) < 0:
            raise ConfigError("n_nodes, n_samples deben ser positivos y filter_order >= 0")
        if not _coerce(self, "tap_sigma", float) > 0:
            raise ConfigError(f"tap_sigma debe ser positivo (recibido {self.tap_sigma})")
        try:
            lo, hi = (float(v) for v in self.weight_range)
        except (TypeError, ValueError):
            raise ConfigError(f"weight_range debe ser un par [lo, hi] (recibido {self.weight_range!r})") from None
        if not 0 < lo <= hi or not math.isfinite(hi):
            raise ConfigError(f"weight_range inválido: [{lo}, {hi}] (se requiere 0 < lo <= hi)")
        if _coerce(self, "noise_sigma", float) < 0:
            raise ConfigError("noise_sigma no puede ser negativo")
        _coerce(self, "seed", int)
        if not isinstance(self.graph_model, (ErdosRenyi, RandomGeometric)):
            raise ConfigError(f"graph_model no soportado: {self.graph_model!r}")
        try:
            object.__setattr__(self, "generating_kind", GsoKind.parse(self.generating_kind))
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None
        object.__setattr__(self, "weight_range", (lo, hi))

    def with_seed(self, seed: int) -> "ExperimentSpec":
        return replace(self, seed=seed)


# =============================================================================
# CONSTRUCCIÓN DESDE JSON (dict)
# =============================================================================
def _check_keys(data, cls, where: str, extra=()):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: se esperaba un objeto JSON (recibido {type(data).__name__})")
    allowed = {f.name for f in fields(cls)} | set(extra)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{where}: claves desconocidas {unknown}")


def am_config_from_dict(data: dict) -> AmConfig:
    _check_keys(data, AmConfig, "config")
    if "filter_order" not in data:
        raise ConfigError("config: falta 'filter_order'")
    scp_data = data.get("scp", {})
    _check_keys(scp_data, ScpConfig, "config.scp")
    scp_data = dict(scp_data)
    trust_data = scp_data.pop("trust", {})
    _check_keys(trust_data, TrustSchedule, "config.scp.trust")
    try:
        scp = ScpConfig(trust=TrustSchedule(**trust_data), **scp_data)
        rest = {k: v for k, v in data.items() if k != "scp"}
        return AmConfig(scp=scp, **rest)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"config: {e}") from None


def experiment_spec_from_dict(data: dict) -> ExperimentSpec:
    _check_keys(data, ExperimentSpec, "spec")
    data = dict(data)
    model = data.pop("graph_model", None)
    if model is not None:
        if not isinstance(model, dict):
            raise ConfigError(f"spec.graph_model: se esperaba un objeto JSON (recibido {type(model).__name__})")
        model = dict(model)
        name = model.pop("name", "erdos_renyi")
        if not isinstance(name, str) or name not in GRAPH_MODELS:
            raise ConfigError(f"spec.graph_model: modelo desconocido {name!r}")
        _check_keys(model, GRAPH_MODELS[name], "spec.graph_model")
    try:
        if model is not None:
            data["graph_model"] = GRAPH_MODELS[name](**model)
        return ExperimentSpec(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"spec: {e}") from None


def am_config_to_dict(cfg: AmConfig) -> dict:
    d = asdict(cfg)
    d["hypothesis_kind"] = cfg.hypothesis_kind.value
    return d


def experiment_spec_to_dict(spec: ExperimentSpec) -> dict:
    d = asdict(spec)
    d["generating_kind"] = spec.generating_kind.value
    d["weight_range"] = list(spec.weight_range)
    return d
