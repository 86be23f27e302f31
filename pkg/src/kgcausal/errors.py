"""Exception hierarchy shared across the package."""


class KgCausalError(Exception):
    """Base class for all package errors."""


class CycleError(KgCausalError):
    """Raised when an operation needs a DAG but received a cyclic graph."""


class DomainError(KgCausalError, ValueError):
    """Raised on numerically invalid inputs (negative counts, |rho| >= 1, ...)."""


class SingularError(KgCausalError):
    """Raised when a linear system is numerically singular."""


class NonConvergence(KgCausalError):
    """Raised (or flagged) when an iterative solver hits its iteration cap."""


class CatalogMismatch(KgCausalError, ValueError):
    """Two objects refer to different variable catalogs."""


class DegenerateColumn(KgCausalError, ValueError):
    """A column has zero variance and cannot be standardized."""


class ConfigError(KgCausalError, ValueError):
    """Invalid pipeline or provider configuration."""


class ParseError(KgCausalError, ValueError):
    """No usable JSON payload in a model response."""


class MissingPlaceholder(KgCausalError, KeyError):
    """A prompt template references a value that was not supplied."""


class ProviderError(KgCausalError):
    """Base class for live-provider failures."""


class TransportError(ProviderError):
    """Network failure or 5xx after all retries."""


class AuthError(ProviderError):
    """The endpoint rejected the credentials (401/403); never retried."""


class RateLimitError(ProviderError):
    """HTTP 429 persisted through all retries."""


class MissingFixture(KgCausalError, FileNotFoundError):
    """A replay fixture file does not exist."""


class IndexOutOfRange(KgCausalError, IndexError):
    """A replay run index beyond the recorded batches."""
