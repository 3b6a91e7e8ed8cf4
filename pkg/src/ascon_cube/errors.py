"""Exception types shared across the package."""


class PlanOnlyError(ValueError):
    """A cube is too large to execute; it may only be planned."""


class ResourceLimitError(RuntimeError):
    """A configured resource bound (monomial count, search budget) was hit."""


class NoCandidateError(RuntimeError):
    """Exhaustive completion found no key consistent with the oracle."""


class ConsistencyError(RuntimeError):
    """Derived algebra disagrees with the expected branch structure."""
