"""Dense linear algebra on nested lists of mpmath scalars.

Every helper runs at the caller's current mpmath precision; wrap calls in
``PrecisionPolicy.workprec()``. Reductions go through ``mp.fdot``/``mp.fsum``,
whose results are correctly rounded and independent of term order.
"""

from __future__ import annotations

from typing import Any, NamedTuple, Sequence

from mpmath import mp

__all__ = [
    "Matrix",
    "CholeskyResult",
    "zeros",
    "to_mp",
    "hermitian_part",
    "hermitian_defect",
    "cholesky_lower",
    "invert_lower",
    "hermitian_eigenvalues",
    "singular_values",
    "singular_decomposition",
    "determinant",
]

Matrix = list[list[Any]]


class CholeskyResult(NamedTuple):
    factor: Matrix
    pivots: list[Any]
    failed_at: int | None


def zeros(rows: int, cols: int) -> Matrix:
    return [[mp.mpc(0) for _ in range(cols)] for _ in range(rows)]


def to_mp(rows: Sequence[Sequence[Any]]) -> Any:
    return mp.matrix([[mp.mpc(x) for x in row] for row in rows])


def hermitian_part(a: Sequence[Sequence[Any]]) -> Matrix:
    n = len(a)
    return [[(a[i][j] + mp.conj(a[j][i])) / 2 for j in range(n)] for i in range(n)]


def hermitian_defect(a: Sequence[Sequence[Any]]) -> Any:
    n = len(a)
    worst = mp.mpf(0)
    for i in range(n):
        for j in range(i, n):
            worst = max(worst, abs(a[i][j] - mp.conj(a[j][i])))
    return worst


def cholesky_lower(gram: Sequence[Sequence[Any]], threshold: Any) -> CholeskyResult:
    """Factor ``gram = L L*`` row by row, stopping at the first pivot below ``threshold``.

    The pivot of row ``j`` is the squared distance of the ``j``-th basis vector
    from the span of the previous ones, so ``failed_at`` is the first degree at
    which the leading principal block stops being numerically positive definite.
    """
    n = len(gram)
    factor: Matrix = [[mp.mpc(0)] * n for _ in range(n)]
    pivots: list[Any] = []
    for j in range(n):
        pivot = mp.re(gram[j][j]) - mp.fsum(factor[j][:j], absolute=True, squared=True)
        pivots.append(pivot)
        if pivot <= threshold:
            return CholeskyResult(factor, pivots, j)
        diag = mp.sqrt(pivot)
        factor[j][j] = mp.mpc(diag)
        for i in range(j + 1, n):
            t = mp.fdot(factor[i][:j], factor[j][:j], conjugate=True)
            factor[i][j] = (gram[i][j] - t) / diag
    return CholeskyResult(factor, pivots, None)


def invert_lower(lower: Sequence[Sequence[Any]]) -> Matrix:
    """Inverse of a nonsingular lower-triangular matrix by forward substitution."""
    n = len(lower)
    inverse: Matrix = [[mp.mpc(0)] * n for _ in range(n)]
    for col in range(n):
        inverse[col][col] = 1 / lower[col][col]
        for row in range(col + 1, n):
            acc = mp.fdot(lower[row][col:row], [inverse[k][col] for k in range(col, row)])
            inverse[row][col] = -acc / lower[row][row]
    return inverse


def hermitian_eigenvalues(a: Sequence[Sequence[Any]]) -> list[Any]:
    """Ascending eigenvalues of the Hermitian part of ``a``."""
    if not a:
        return []
    values = mp.eigh(to_mp(hermitian_part(a)), eigvals_only=True)
    return sorted(mp.re(values[i]) for i in range(len(a)))


def singular_values(a: Sequence[Sequence[Any]]) -> list[Any]:
    if not a:
        return []
    values = mp.svd(to_mp(a), compute_uv=False)
    return sorted((values[i] for i in range(min(len(a), len(a[0])))), reverse=True)


def singular_decomposition(a: Sequence[Sequence[Any]]) -> tuple[list[Any], Matrix]:
    """Singular values (descending) and matching rows of ``Vh`` with ``a = U diag(s) Vh``."""
    _, s, vh = mp.svd(to_mp(a), compute_uv=True)
    count = min(len(a), len(a[0]))
    order = sorted(range(count), key=lambda i: s[i], reverse=True)
    values = [s[i] for i in order]
    rows = [[mp.mpc(vh[i, k]) for k in range(vh.cols)] for i in order]
    return values, rows


def determinant(a: Sequence[Sequence[Any]]) -> Any:
    return mp.det(to_mp(a))
