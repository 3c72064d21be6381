from __future__ import annotations

import sys

from typing import Sequence


class MSLPError(RuntimeError):
    # Eliminate the output of traceback before our custom error message prints out
    sys.tracebacklimit = 0

    exit_code = 1

    def __init__(self, msg: str):
        super().__init__(f"{msg}")
        self.msg = msg


class ParseError(MSLPError):
    def __init__(self, msg: str, line: int | None = None, source: str | None = None):
        where = ''
        if source:
            where = f"{source}:"
        if line is not None:
            where = f"{where}{line}:"
        super().__init__(f"{where} {msg}" if where else msg)
        self.line = line
        self.source = source


class DefinitionError(MSLPError):
    def __init__(self, msg: str, path: Sequence[str | int] | None = None):
        super().__init__(msg)
        self.path = path


class FieldError(MSLPError):
    pass


class SingularMatrixError(MSLPError):
    pass


class DeterminantError(MSLPError):
    exit_code = 2


class DimensionError(MSLPError):
    exit_code = 3


class ProgramError(MSLPError):
    pass


class BruhatError(MSLPError):
    pass


class MatrixKindError(MSLPError):
    pass
