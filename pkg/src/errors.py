from typing import Optional


class TilecohError(Exception):
    """Base class for every error the analysis raises on purpose"""
    exit_code = 5
    kind = "internal"

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def __str__(self):
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


class InputError(TilecohError):
    """Problems with what the user handed us"""
    exit_code = 2
    kind = "parse"


class SubstitutionSyntaxError(InputError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownLetterError(InputError):
    def __init__(self, letter: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{where}unknown letter {letter!r} (no rule defines it)")
        self.letter = letter
        self.line = line
        self.column = column


class EmptyImageError(InputError):
    def __init__(self, letter: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}empty image word for letter {letter!r}")
        self.letter = letter


class DuplicateRuleError(InputError):
    def __init__(self, letter: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}duplicate rule for letter {letter!r}")
        self.letter = letter


class AlphabetTooSmallError(InputError):
    def __init__(self, size: int):
        super().__init__(f"alphabet size < 2 (got {size})")
        self.size = size


class BasisFormatError(InputError):
    pass


class ComponentIndexError(InputError):
    def __init__(self, index: int, count: int):
        super().__init__(f"component index {index} out of range 0..{count - 1}")
        self.index = index
        self.count = count


class InputEncodingError(InputError):
    def __init__(self, source: str, error: UnicodeDecodeError):
        super().__init__(f"{source}: not valid UTF-8 text (byte {error.start}: {error.reason})")
        self.source = source


class ConfigError(InputError):
    pass


class NotPrimitiveError(TilecohError):
    exit_code = 3
    kind = "not_primitive"


class PeriodicSubstitutionError(TilecohError):
    exit_code = 4
    kind = "periodic"

    def __init__(self, witness: int, complexity: int):
        super().__init__(
            f"periodic substitution detected: p({witness}) = {complexity} <= {witness}"
        )
        self.witness = witness
        self.complexity = complexity


class InternalInvariantError(TilecohError):
    """A property that must hold for every valid input failed"""


class NotPrimitiveSystemError(InternalInvariantError):
    def __init__(self, divisors):
        super().__init__(
            f"vectors do not extend to a basis of the lattice (elementary divisors {list(divisors)})"
        )
        self.divisors = tuple(divisors)


class BlockFormViolation(InternalInvariantError):
    pass


class PerronConvergenceError(InternalInvariantError):
    pass


class InvarianceViolation(InternalInvariantError):
    def __init__(self, field: str, presentation: str, expected, actual):
        super().__init__(
            f"invariant {field!r} differs for {presentation}: expected {expected}, got {actual}"
        )
        self.field = field
        self.presentation = presentation
