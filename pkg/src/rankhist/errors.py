"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an input violates a documented precondition."""


class HistogramGenerationError(RuntimeError):
    """Raised when the random histogram generator paints itself into a corner.

    The generator cannot lower any bin without making it negative. Callers
    retry with a fresh seed (see ``generate_valid_histogram``).
    """
