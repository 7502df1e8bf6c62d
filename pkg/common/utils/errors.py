"""Exception types shared across the library."""


class DataError(ValueError):
    """Input data could not be turned into a valid domain object."""


class ParseError(DataError):
    """A file is malformed; the message names the field and record index."""

    def __init__(self, message: str, field: str = None, index: int = None):
        location = []
        if field is not None:
            location.append(f"field '{field}'")
        if index is not None:
            location.append(f"record {index}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.field = field
        self.index = index


class SchemaError(DataError):
    """Arrays disagree in length or break a type invariant."""


class PlacementError(RuntimeError):
    """A synthetic scene could not be laid out within the retry budget."""
