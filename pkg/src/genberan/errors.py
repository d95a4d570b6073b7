"""Exception hierarchy shared across the library."""


class GenBeranError(Exception):
    """Base class for all library errors."""


class EmptyNeighborhood(GenBeranError):
    """Every kernel value at the query point is zero (bandwidth too small)."""


class QuantileUnattained(GenBeranError):
    """The fitted distribution function never reaches the requested level."""


class DegenerateTail(GenBeranError):
    """The empirical distribution of T has exhausted its mass before the
    requested time horizon; tail-dependent quantities are undefined."""


class AllInfeasible(GenBeranError):
    """Every bandwidth in the grid scored +inf in cross-validation."""


class NonFiniteLoss(GenBeranError):
    """Training diverged (non-finite loss), typically bad scaling or step size."""


class ZeroVariance(GenBeranError):
    """Paired differences have zero variance; the t statistic is undefined."""


class ConfigError(GenBeranError):
    """Malformed or unknown configuration entry."""


class IngestionError(GenBeranError):
    """Base class for CSV ingestion failures."""


class MissingColumn(IngestionError):
    """A schema column is absent from the CSV header."""


class NonNumericCell(IngestionError):
    """A cell that should be numeric failed to parse."""


class EmptyAfterFiltering(IngestionError):
    """No rows survived the NA policy."""
