"""Exception hierarchy. The CLI maps these onto exit codes."""


class HedonetError(Exception):
    exit_code = 1


class ConfigError(HedonetError):
    """Bad flags, missing input paths, invalid parameter ranges."""

    exit_code = 2


class DataError(HedonetError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class LexiconError(DataError):
    pass


class CorpusError(DataError):
    pass
