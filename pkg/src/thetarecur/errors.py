"""Exception hierarchy.

Every error carries a short machine-parsable ``reason`` slug; the CLI prints
``error: <reason>: <message>`` and maps the class to an exit status.
"""


class ThetaRecurError(Exception):
    reason = "error"

    def __init__(self, message="", **info):
        super().__init__(message)
        self.info = info

    def line(self):
        return f"error: {self.reason}: {self}"


class InsufficientPrefix(ThetaRecurError):
    """A partial quotient or convergent was requested beyond what the fraction can produce."""
    reason = "insufficient-prefix"


class NotAdmissible(ThetaRecurError):
    reason = "not-admissible"


class InvalidWord(ThetaRecurError):
    """Digit constraints violated, or a word used with the wrong fraction."""
    reason = "invalid-word"


class OutOfRange(ThetaRecurError):
    reason = "out-of-range"


class PrecisionExhausted(ThetaRecurError):
    """A certified comparison could not be decided within the precision budget.

    ``info`` may hold ``index`` (first undecided orbit index), ``bits`` and,
    for scaling data, ``certified_level``.
    """
    reason = "precision-exhausted"


class BracketFailure(ThetaRecurError):
    """The kneading comparator contradicted itself during bisection."""
    reason = "bracket-failure"


class InsufficientData(ThetaRecurError):
    reason = "insufficient-data"
