"""Shared exception types."""


class ConfigError(Exception):
    """Invalid configuration: unknown names, bad values, malformed config files."""


class AggregationError(Exception):
    """Result sets that cannot be aggregated together (for example mixed node counts)."""


class InvariantViolation(Exception):
    """An internal invariant was broken; indicates a bug, not a user error."""
