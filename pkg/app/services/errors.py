"""
Exceptions shared by the group engines and the CLI.

Every error carries a stable one-line ``code`` that the CLI prints on stderr.
"""


class ParabolicsError(ValueError):
    """Base class for every domain error raised by the services"""

    code = "E_DOMAIN"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        return f"{self.code}: {self.message}".replace("\n", " ")


class SpecSyntaxError(ParabolicsError):
    code = "E_SPEC_SYNTAX"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SpecValidationError(ParabolicsError):
    code = "E_SPEC_INVALID"


class WordSyntaxError(ParabolicsError):
    code = "E_WORD_SYNTAX"


class ExponentOverflowError(ParabolicsError):
    code = "E_OVERFLOW"


class NotAdjacentError(ParabolicsError):
    code = "E_NOT_ADJACENT"


class GalleryError(ParabolicsError):
    code = "E_GALLERY"


class SpecMismatchError(ParabolicsError):
    code = "E_SPEC_MISMATCH"


class BallCapExceeded(ParabolicsError):
    code = "E_BALL_CAP"


class SearchBoundExceeded(ParabolicsError):
    code = "E_SEARCH_BOUND"


class NotRightAngledError(ParabolicsError):
    code = "E_NOT_RIGHT_ANGLED"


class InvariantViolation(ParabolicsError):
    code = "E_INVARIANT"
