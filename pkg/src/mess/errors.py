"""Exception hierarchy shared by every module in the package."""


class MessError(Exception):
    """Base class for all errors raised by :mod:`mess`."""


class ValidationError(MessError, ValueError):
    """Input data violates a structural requirement (shape, finiteness)."""


class ParameterError(MessError, ValueError):
    """A configuration value is outside its admissible range."""


class DegenerateInputError(MessError, ValueError):
    """The input is valid but carries too little information to proceed."""


class StreamError(MessError, ValueError):
    """A snapshot stream changed shape or otherwise broke its contract."""


class NumericalError(MessError, ArithmeticError):
    """A computation diverged, failed to converge or lost consistency."""


class FormatError(MessError, ValueError):
    """A file could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    offset : int, optional
        Byte offset in the file at which parsing failed.
    path : str, optional
        Path of the offending file.
    """

    def __init__(self, message, offset=None, path=None):
        self.offset = offset
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append(f"byte {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
