"""Exception hierarchy shared by every morselab module."""


class MorselabError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class InputError(MorselabError):
    """Bad user input: malformed files, invalid parameters."""

    exit_code = 1


class SpecSyntaxError(InputError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", col {col}"
            where += ": "
        super().__init__(where + message)


class UnknownGeneratorError(InputError):
    pass


class UnsupportedFamilyError(InputError):
    pass


class CapExceededError(MorselabError):
    """A configured resource cap (vertices, cycles, budget) was hit."""

    exit_code = 2


class UntrustedPairError(MorselabError):
    """A distance query whose answer the ball cannot certify; raise the radius."""

    exit_code = 1


class GuardError(MorselabError):
    """Quasi-geodesic probes would leave the ball."""

    exit_code = 1
