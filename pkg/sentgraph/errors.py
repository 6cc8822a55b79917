"""
Exception hierarchy shared by every sentgraph module
"""
from typing import Optional


class SentgraphError(Exception):
    """Base class for all errors raised by sentgraph"""


class ParseError(SentgraphError, ValueError):
    """A line of an input file could not be parsed"""

    def __init__(self, path, line_number: Optional[int], reason: str):
        self.path = str(path)
        self.line_number = line_number
        self.reason = reason
        location = f"{self.path}:{line_number}" if line_number is not None else self.path
        super().__init__(f"{location}: {reason}")


class ConfigError(SentgraphError, ValueError):
    """Invalid configuration value, argument range or dimension contract"""


class PreconditionError(SentgraphError, ValueError):
    """An operation was called on inputs that violate its precondition"""


class DivergenceError(SentgraphError, FloatingPointError):
    """Training produced a non-finite parameter"""
