"""Exception hierarchy shared by the numerical modules, the CLI and the MCP tools.

Every error carries an ``exit_code``: 2 for bad input, 3 for numerical failure.
"""

from __future__ import annotations


class CloudMomentsError(Exception):
    exit_code: int = 1


class InputError(CloudMomentsError):
    exit_code = 2


class NumericalError(CloudMomentsError):
    exit_code = 3


class MalformedTableError(InputError):
    pass


class NonHermitianError(InputError):
    def __init__(self, defect: float, tol: float) -> None:
        self.defect = defect
        self.tol = tol
        super().__init__(f"moment table is not Hermitian: defect {defect:.3e} > tol {tol:.3e}")


class NotPSDError(InputError):
    def __init__(self, min_eigenvalue: float, tol: float) -> None:
        self.min_eigenvalue = min_eigenvalue
        self.tol = tol
        super().__init__(
            f"moment table is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e} < -{tol:.3e}"
        )


class DegreeMismatchError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None) -> None:
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class DegreeTooHighError(InputError):
    def __init__(self, required: int, available: int, what: str = "operation") -> None:
        self.required = required
        self.available = available
        super().__init__(f"{what} needs a moment table of degree {required}, got {available}")


class InsufficientColumnsError(InputError):
    pass


class EmptySampleSetError(InputError):
    pass


class InvalidArgumentError(InputError):
    pass


class NumericallySingularError(NumericalError):
    def __init__(self, at_degree: int, pivot: float, threshold: float) -> None:
        self.at_degree = at_degree
        self.pivot = pivot
        self.threshold = threshold
        super().__init__(
            f"Gram matrix numerically singular at degree {at_degree} "
            f"(pivot {pivot:.3e} below {threshold:.3e}); lower the degree or raise the precision"
        )


class DegenerateEvaluationError(NumericalError):
    pass


class RankTestFailedError(NumericalError):
    pass


class IllConditionedNullSpaceError(NumericalError):
    pass


class OutsideDomainOfValidityWarning(UserWarning):
    pass
