class RatchetError(Exception):
    """Base error carrying a detail message and the CLI exit code it maps to"""
    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(RatchetError):
    """Malformed run configuration, bad flag value or unwritable output path"""
    exit_code = 2


class NumericalGuardError(RatchetError):
    """A numerical guard tripped; the run cannot be trusted"""
    exit_code = 3


class GridUnderflowError(NumericalGuardError):
    pass


class WindowOverflowError(NumericalGuardError):
    pass


class UnitarityError(NumericalGuardError):
    pass


class NoClosedFiberError(NumericalGuardError):
    pass


class MetricUndefinedError(NumericalGuardError):
    pass


class NoSignChangeError(NumericalGuardError):
    pass
