"""Exception and warning types raised across the package."""


class CatDimerError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(CatDimerError, ValueError):
    pass


class TruncationError(CatDimerError):
    """Weight on the highest retained Fock levels exceeds the tolerance."""


class DegenerateInput(CatDimerError, ValueError):
    pass


class DivergentSeries(CatDimerError, ValueError):
    """Fock expansion with geometric ratio >= 1 (not normalizable)."""


class SingularParameter(CatDimerError, ValueError):
    pass


class NonUniqueSteadyState(CatDimerError):
    """The Liouvillian kernel is (numerically) more than one dimensional."""


class SolverFailure(CatDimerError):
    pass


class NonPSDInput(CatDimerError, ValueError):
    pass


class ManifoldLeakage(CatDimerError):
    pass


class ConfigError(CatDimerError, ValueError):
    pass


class TruncationWarning(UserWarning):
    pass
