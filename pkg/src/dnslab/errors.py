"""Exception types shared across the solver stack."""


class DnsLabError(Exception):
    """Base class for all solver errors."""


class ConfigError(DnsLabError):
    """Run configuration is malformed or violates a parameter constraint."""


class CFLError(DnsLabError):
    """Explicit transport step rejected; carries the largest admissible dt."""

    def __init__(self, dt, admissible_dt):
        super().__init__(
            f"CFL violation: dt={dt:.3e} exceeds admissible dt={admissible_dt:.3e}"
        )
        self.dt = dt
        self.admissible_dt = admissible_dt


class SolverConvergenceError(DnsLabError):
    """Linear solve failed to reach tolerance within the iteration budget."""

    def __init__(self, residual, iterations, tol):
        super().__init__(
            f"CG failed: residual {residual:.3e} after {iterations} iterations "
            f"(tol {tol:.3e})"
        )
        self.residual = residual
        self.iterations = iterations
        self.tol = tol


class PicardError(DnsLabError):
    """Fixed-point iteration over a time slab failed to contract."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class RegularityError(DnsLabError):
    """State no longer resolves a C^1 velocity on the current grid."""


class MaximalTimeError(DnsLabError):
    """dt shrank below the floor: suspected loss of regularity (blow-up)."""

    def __init__(self, time, reason=""):
        msg = f"time step floor reached at t={time:.8g}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.time = time
        self.reason = reason


class RegionEscapeError(DnsLabError):
    """A tracked material marker left a non-periodic domain."""
