# =============================================================================
# ERRORS.PY: JERARQUÍA DE ERRORES DEL IDENTIFICADOR
# =============================================================================


class IdentificationError(ValueError):
    """Raíz de todos los errores del proyecto."""


class StructuralViolation(IdentificationError):
    """La matriz no pertenece al conjunto estructural (tipo + soporte)."""


class DimensionMismatch(IdentificationError):
    pass


class NonFiniteValue(IdentificationError, ArithmeticError):
    pass


class FitAborted(NonFiniteValue):
    """
    Fallo numérico dentro de am_fit. Lleva adjunto el último iterado bueno
    (taps puede ser None si el fallo ocurrió antes del primer paso de taps).
    """

    def __init__(self, message, taps=None, gso=None, trace=None):
        super().__init__(message)
        self.taps = taps
        self.gso = gso
        self.trace = trace


class GraphGenerationFailed(IdentificationError):
    pass


class ZeroReference(IdentificationError):
    pass


class DegenerateInput(IdentificationError):
    pass


class SupportMismatch(IdentificationError):
    pass


class LengthMismatch(IdentificationError):
    pass


class AllStartsFailed(IdentificationError):

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = failures or []


class ConfigError(IdentificationError):
    pass


class InputFormatError(IdentificationError):
    """Archivo de entrada mal formado; line es 1-based (None si no aplica)."""

    def __init__(self, path, line, message):
        where = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class DegenerateDesignWarning(UserWarning):
    """Diseño LLS con rango deficiente; se devuelve la solución de norma mínima."""
