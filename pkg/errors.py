"""Exception hierarchy shared by the pipeline and the CLI."""


class IdrkitError(Exception):
    """Base class for every error raised on purpose by the toolkit."""


class ConfigError(IdrkitError):
    """Invalid command line or configuration (CLI exit code 2)."""


class InputFormatError(IdrkitError):
    """An input file cannot be used at all (missing header, unreadable stream)."""


class DataError(IdrkitError):
    """The data does not allow the requested analysis (CLI exit code 1)."""


class ConsistencyError(DataError):
    """Pipeline stages are not successive subsets of each other."""


class MetricDomainError(ValueError):
    """An indicator is undefined for the given input."""
