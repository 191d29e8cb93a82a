"""Exceptions raised by ipobisim.

Outcomes the library can legitimately reach (fuel exhaustion, Unknown
verdicts, labels that are not enabled at a weak step) are returned as values.
The classes below signal misuse or malformed input.
"""


class IpoBisimError(Exception):
    """Base class of every error raised by the package."""


class ParseError(IpoBisimError):
    """Raised when surface text does not follow the term grammar."""

    def __init__(self, position: int, expected: str, text: str = ""):
        self.position = position
        self.expected = expected
        self.text = text
        found = repr(text[position]) if position < len(text) else "end of input"
        super().__init__(f"at position {position}: expected {expected}, found {found}")


class OpenTermError(IpoBisimError):
    """Raised when a closed term is required and a free variable occurs."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"free variable {name!r} in a term that must be closed")


class TermError(IpoBisimError):
    """Raised when a term does not belong to the calculus it is handed to."""


class NoClassError(IpoBisimError):
    """Raised when a stuck cbv term exposes no critical variable."""


class UnificationError(IpoBisimError):
    """Raised when two terms have no unifier (constructor clash or occurs check)."""


class UnsupportedConfig(IpoBisimError):
    """Raised for calculus/order/strategy/label-set combinations with no LTS."""


class NotEnabled(IpoBisimError):
    """Raised when a label does not make the plugged term react."""


class PreconditionError(IpoBisimError):
    """Raised when a harness premise does not hold."""
