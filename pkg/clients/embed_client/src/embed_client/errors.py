"""Error taxonomy; the CLI maps it onto exit codes 2 (input) and 3 (numeric)."""


class ClientError(Exception):
    """Base for everything this package raises on purpose."""


class InputError(ClientError):
    """Bad corpus, bad flags, unloadable model: exit code 2."""


class ParseError(InputError):
    pass


class DuplicateId(InputError):
    pass


class EmptyText(InputError):
    pass


class IoFailure(InputError):
    pass


class ModelLoadFailure(InputError):
    pass


class NumericError(ClientError):
    """The model produced unusable output: exit code 3."""


class DimensionMismatch(NumericError):
    pass


class NonFiniteValue(NumericError):
    pass
