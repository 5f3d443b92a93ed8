"""Error types shared by every module.

The CLI maps them onto exit codes: 2 for bad arguments or files,
3 for numerical failures.
"""


class KrivineError(Exception):
    pass


class InvalidArgument(KrivineError, ValueError):
    pass


class ParseError(InvalidArgument):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(KrivineError, ArithmeticError):
    """Quadrature or series computation that failed its own consistency check."""

    def __init__(self, message, node=None):
        if node is not None:
            message = f"{message} (at node {node})"
        super().__init__(message)
        self.node = node


class RootOutsideDisk(NumericError):
    pass
