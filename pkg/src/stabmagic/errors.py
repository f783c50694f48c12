"""Exception types shared by every module.

Each error carries a short machine-readable ``code`` that the CLI reports
alongside the message.
"""


class MagicError(Exception):
    code = "ERROR"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class DimensionMismatch(MagicError):
    code = "DIMENSION_MISMATCH"


class InvalidOperator(MagicError):
    code = "INVALID_OPERATOR"


class SizeCapExceeded(MagicError):
    code = "SIZE_CAP"


class CNFError(MagicError):
    code = "MALFORMED_CNF"


class SolverError(MagicError):
    code = "SOLVER_FAILURE"


class PromiseError(MagicError):
    code = "PRECONDITION"


class MixedStateError(MagicError):
    code = "MIXED_STATE"
