"""Exception hierarchy shared by the solvers and the CLI."""


class ValidationError(ValueError):
    """Bad input parameters or configuration; names the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SolverError(RuntimeError):
    """A numerical step could not produce a trustworthy answer."""


class ResidualError(SolverError):
    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual={residual:.3e})")


class UnstableError(SolverError):
    """Lyapunov solve refused because the drift matrix is not Hurwitz."""

    def __init__(self, max_real):
        self.max_real = max_real
        super().__init__(f"drift matrix not stable: max Re(lambda) = {max_real:.6e}")


class BracketError(SolverError):
    """No crossing (or no interior extremum) inside the requested bracket."""
