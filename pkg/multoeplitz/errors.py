class MultoeplitzError(Exception):
    """Base class for every error raised by multoeplitz."""


class DomainError(MultoeplitzError, ValueError):
    """An argument lies outside the domain of the operation."""


class NotPositiveDefiniteError(DomainError):
    """A matrix expected to be positive definite has an eigenvalue at or below the working threshold."""


class NoPredictedLimitError(DomainError):
    """The index family has no closed-form limit (alternating sequences, natural truncations)."""


class ResourceLimitError(MultoeplitzError, RuntimeError):
    """A configured size cap (dense matrix, symbol support, set size, grid) would be exceeded."""


class SolverContractError(MultoeplitzError, RuntimeError):
    """A numerical cross-check (residuals, two-path agreement) failed."""


class ConfigError(MultoeplitzError, ValueError):
    """An experiment configuration failed to parse or validate."""

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        self.diagnostics = diagnostics or []
        detail = "\n".join(f"  {d}" for d in self.diagnostics)
        super().__init__(f"{message}\n{detail}" if detail else message)
