"""Error types shared across the package."""


class CapacityError(ValueError):
    """An instance would exceed the configured desk-scale bounds."""


class RelationError(ValueError):
    """Two points do not stand in the relation an operation requires."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""
