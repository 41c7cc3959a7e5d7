"""Shared exception types, mapped to CLI exit codes 2 and 3."""


class InvalidInputError(ValueError):
    """A precondition on user-supplied input failed."""


class SizeLimitError(RuntimeError):
    """A configured size cap would be exceeded.

    `admissible` carries the largest parameter value (e.g. depth or scale
    exponent) that would stay within the cap, when one exists.
    """

    def __init__(self, message, admissible=None):
        super().__init__(message)
        self.admissible = admissible
