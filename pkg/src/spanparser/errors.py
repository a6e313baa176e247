class DataError(Exception):
    """Malformed or inconsistent input data (treebanks, lexica, span sets)."""


class NumericError(Exception):
    """Non-finite values or failed numeric invariants during compute."""
