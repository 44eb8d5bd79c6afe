"""Orthonormal polynomials, Christoffel–Darboux kernels and Christoffel functions.

``p_j(z) = Σ_{k<=j} C[j][k] z^k`` with ``C = L⁻¹`` for the Cholesky factor
``L`` of the monomial Gram block, so ``C G C* = I`` and ``γ_j = C[j][j] > 0``.
"""

from __future__ import annotations

import logging
from typing import Any, Mapping

from mpmath import mp
from pydantic import BaseModel, ConfigDict

from .errors import DegenerateEvaluationError, DegreeTooHighError, InvalidArgumentError, NumericallySingularError
from .lib import linalg
from .moment_core import ComplexMomentTable, PrecisionPolicy

logger = logging.getLogger(__name__)


class OrthonormalBasis(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeff: tuple[tuple[Any, ...], ...]
    policy: PrecisionPolicy

    @property
    def degree(self) -> int:
        return len(self.coeff) - 1

    @property
    def gamma(self) -> list[Any]:
        return [mp.re(self.coeff[j][j]) for j in range(len(self.coeff))]

    def evaluate(self, j: int, z: Any) -> Any:
        with self.policy.workprec():
            z = mp.mpc(z)
            value = mp.mpc(0)
            for c in reversed(self.coeff[j]):
                value = value * z + c
            return value

    def values(self, z: Any, n: int | None = None) -> list[Any]:
        """``[p_0(z), ..., p_n(z)]``."""
        n = self.degree if n is None else n
        self._require(n)
        with self.policy.workprec():
            z = mp.mpc(z)
            powers = [mp.mpc(1)]
            for _ in range(n):
                powers.append(powers[-1] * z)
            return [mp.fdot(self.coeff[j], powers[: j + 1]) for j in range(n + 1)]

    def _require(self, n: int) -> None:
        if n > self.degree:
            raise DegreeTooHighError(n, self.degree, "orthonormal basis")


def orthonormalize(
    table: ComplexMomentTable, n_max: int, policy: PrecisionPolicy | None = None
) -> OrthonormalBasis:
    if n_max < 0:
        raise InvalidArgumentError(f"n_max must be non-negative, got {n_max}")
    table.require_degree(n_max, "orthonormalize")
    policy = policy or table.policy
    size = n_max + 1

    with policy.workprec():
        gram = [list(row[:size]) for row in table.entries[:size]]
        threshold = policy.pivot_threshold * table.mass
        chol = linalg.cholesky_lower(gram, threshold)
        if chol.failed_at is not None:
            raise NumericallySingularError(chol.failed_at, float(chol.pivots[-1]), float(threshold))
        inverse = linalg.invert_lower(chol.factor)
        coeff = tuple(tuple(inverse[j][: j + 1]) for j in range(size))

    logger.debug("orthonormalized to degree %d, smallest pivot %s", n_max, mp.nstr(min(chol.pivots), 5))
    return OrthonormalBasis(coeff=coeff, policy=policy)


def gram_residual(table: ComplexMomentTable, basis: OrthonormalBasis) -> Any:
    """``max |⟨p_j, p_k⟩ - δ_jk|`` recomputed from the moment table."""
    gram = symbol_matrix(table, basis, {(0, 0): 1}, basis.degree, basis.degree)
    with basis.policy.workprec():
        return max(
            abs(gram[k][j] - (1 if j == k else 0)) for j in range(basis.degree + 1) for k in range(basis.degree + 1)
        )


def symbol_matrix(
    table: ComplexMomentTable,
    basis: OrthonormalBasis,
    terms: Mapping[tuple[int, int], Any],
    rows: int,
    cols: int,
) -> list[list[Any]]:
    """Matrix ``G[k][j] = ⟨R·p_j, p_k⟩`` for ``k <= rows``, ``j <= cols``, ``R = Σ r_ab z^a z̄^b``.

    ``⟨R z^t, z^s⟩ = Σ r_ab m[a+t][b+s]``, then ``G = conj(C) A Cᵀ`` on the
    needed blocks.
    """
    basis._require(max(rows, cols))
    if not terms:
        with basis.policy.workprec():
            return linalg.zeros(rows + 1, cols + 1)
    deg_z = max(a for a, _ in terms)
    deg_zbar = max(b for _, b in terms)
    table.require_degree(max(deg_z + cols, deg_zbar + rows), "moment expansion")

    with basis.policy.workprec():
        items = [(a, b, mp.mpc(r)) for (a, b), r in terms.items()]
        coeffs = [r for _, _, r in items]

        def monomial_pairing(s: int, t: int) -> Any:
            return mp.fdot(coeffs, [table.entries[a + t][b + s] for a, b, _ in items])

        a_block = [[monomial_pairing(s, t) for t in range(cols + 1)] for s in range(rows + 1)]
        # right[s][j] = Σ_t A[s][t] C[j][t]
        right = [
            [mp.fdot(a_block[s][: j + 1], basis.coeff[j]) for j in range(cols + 1)] for s in range(rows + 1)
        ]
        return [
            [mp.fdot([right[s][j] for s in range(k + 1)], basis.coeff[k], conjugate=True) for j in range(cols + 1)]
            for k in range(rows + 1)
        ]


def cd_kernel(basis: OrthonormalBasis, n: int, z: Any, w: Any) -> Any:
    """``K_n(z, w) = Σ_{j<=n} p_j(z) conj(p_j(w))``."""
    with basis.policy.workprec():
        return mp.fdot(basis.values(z, n), basis.values(w, n), conjugate=True)


def christoffel(basis: OrthonormalBasis, n: int, z: Any) -> Any:
    """``Λ_n(z) = 1/K_n(z, z)``, the least ``‖f‖²`` over ``deg f <= n`` with ``f(z) = 1``."""
    with basis.policy.workprec():
        diagonal = mp.fsum(basis.values(z, n), absolute=True, squared=True)
        if diagonal <= 0:
            raise DegenerateEvaluationError(f"K_{n}({z}, {z}) vanishes at working precision")
        return 1 / diagonal
