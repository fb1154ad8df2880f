"""Exception hierarchy shared by all layers.

Every error carries an ``exit_code`` so the command line front end can map
failures onto process exit statuses without a lookup table.
"""


class CmkdvError(Exception):
    exit_code = 4


class ConfigError(CmkdvError, ValueError):
    exit_code = 2


class DomainError(CmkdvError, ValueError):
    """Input outside the domain where an operation is defined."""

    exit_code = 3


class CutError(DomainError):
    """Evaluation point lies on a branch cut."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class RegionError(DomainError):
    """(x, t) does not belong to the region an evaluator requires."""

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class NumericalError(CmkdvError):
    exit_code = 4


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class EvaluationError(NumericalError):
    """Integrand produced a non-finite sample."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class TracingError(NumericalError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class BlowUpError(NumericalError):
    """Simulated field became non-finite.

    ``snapshots`` holds whatever was recorded before the failure.
    """

    def __init__(self, message, time=None, snapshots=None):
        super().__init__(message)
        self.time = time
        self.snapshots = list(snapshots or [])
