"""Errors raised while reading or preparing data."""


class DataError(ValueError):
    """Input data cannot be used as given.

    `line` is the 1-based line of a CSV file, when the error came from one.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
