from typing import Optional


class GaussLangError(Exception):
    """Base class for every error raised by gausslang."""


class ContractError(GaussLangError, ValueError):
    """A precondition of an operation was violated (shapes, blocks, PSD, axioms)."""


class NumericalError(GaussLangError, ArithmeticError):
    """A numerical routine did not converge."""


class ConfigError(GaussLangError):
    pass


class _Located(GaussLangError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ParseError(_Located):
    pass


class TypeCheckError(_Located):
    def __init__(self, message: str, rule: str, line: Optional[int] = None, column: Optional[int] = None):
        self.rule = rule
        super().__init__(f"[{rule}] {message}", line, column)
