"""Exception hierarchy shared by all qaes modules.

Each class carries an ``exit_code`` used by the command-line front end.
"""


class QaesError(Exception):
    exit_code = 1


class InvalidKeyLength(QaesError, ValueError):
    exit_code = 2


class LengthMismatch(QaesError, ValueError):
    exit_code = 2


class EmptyInput(QaesError, ValueError):
    exit_code = 2


class QberAbort(QaesError):
    """Estimated QBER exceeded the abort threshold; eavesdropping suspected."""

    exit_code = 3

    def __init__(self, qber, threshold, pulses_pumped=0):
        self.qber = qber
        self.threshold = threshold
        self.pulses_pumped = pulses_pumped
        super().__init__(
            f"QBER {qber:.4f} exceeds abort threshold {threshold:.4f} "
            f"after {pulses_pumped} pulses; session aborted (possible eavesdropper)"
        )


class ExhaustionLimit(QaesError):
    exit_code = 4


class KeyStreamExhausted(QaesError):
    exit_code = 5


class BadPadding(QaesError):
    """Padding check failed after decryption: wrong keys or corrupted data."""

    exit_code = 6


class HeaderMismatch(QaesError):
    exit_code = 7


class SequenceTooShort(QaesError, ValueError):
    exit_code = 2


class PrerequisiteFailed(QaesError):
    exit_code = 1
