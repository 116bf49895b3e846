"""Exception types shared across the package."""


class HilbertLabError(Exception):
    """Base class for all package errors."""


class CollinearityError(HilbertLabError):
    """Points supposed to lie on one projective line do not, beyond tolerance."""


class DegenerateConfigError(HilbertLabError):
    """Coincident or otherwise degenerate input configuration."""


class ContainmentError(HilbertLabError):
    """A point required to lie in the (closed) domain is outside it."""


class ChartError(HilbertLabError):
    """A point is not visible in the fixed affine chart (third coordinate ~ 0)."""


class SolverError(HilbertLabError):
    """Monge-Ampere iteration failed to converge; carries the last residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ResolutionError(HilbertLabError):
    """Grid too coarse for the requested domain."""


class CorruptSolutionError(HilbertLabError):
    """A solution object violates its own invariants (e.g. u >= 0 inside)."""


class FrameDegeneracyError(HilbertLabError):
    """The affine frame (d1 xi, d2 xi, xi) is numerically singular at a node."""


class CollarError(HilbertLabError):
    """A query fell inside the unreliable boundary collar of the grid."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = list(offending) if offending is not None else []


class TruncationError(HilbertLabError):
    """Requested ball radius exceeds the reliable radius R_max."""

    def __init__(self, message, r_max=None):
        super().__init__(message)
        self.r_max = r_max


class BarrierBlowupError(HilbertLabError):
    """ODE barrier evaluated at or beyond its blow-up time."""

    def __init__(self, message, t_max=None):
        super().__init__(message)
        self.t_max = t_max


class ProximalityError(HilbertLabError):
    """Eigenvalue translation length requested for a non-proximal element."""


class InvarianceError(HilbertLabError):
    """A transformation does not preserve the domain within tolerance."""


class DegenerateHullError(HilbertLabError):
    """Limit-set hull collapsed to a point or segment."""


class SpecParseError(HilbertLabError):
    """A domain or generator specification file failed to parse."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
