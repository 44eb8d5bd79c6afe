"""The Hessenberg matrix of multiplication by ``z`` and the quantities read off it.

``h[k][j] = ⟨z p_j, p_k⟩``; ``h[k][j] = 0`` for ``k > j + 1`` because ``z p_j``
has degree ``j + 1``. Infinite row sums are truncated at an explicit cutoff
``K_cut``; the column norm ``‖z p_j‖² = Σ_{k<=j+1} |h_kj|²`` is always exact.
"""

from __future__ import annotations

import logging
from typing import Any

from mpmath import mp
from pydantic import BaseModel, ConfigDict

from .errors import InsufficientColumnsError
from .lib import linalg
from .moment_core import ComplexMomentTable, PrecisionPolicy
from .orthopoly import OrthonormalBasis, symbol_matrix

logger = logging.getLogger(__name__)

Z = {(1, 0): 1}
ZBAR = {(0, 1): 1}
ABS_Z_SQUARED = {(1, 1): 1}


class HessenbergMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: tuple[tuple[Any, ...], ...]
    band_defect: float
    policy: PrecisionPolicy

    @property
    def n_cols(self) -> int:
        """Largest column (and row) index stored."""
        return len(self.entries) - 1

    def h(self, k: int, j: int) -> Any:
        return self.entries[k][j]

    def subdiagonal(self) -> list[Any]:
        return [self.entries[j + 1][j] for j in range(self.n_cols)]

    def superdiagonal(self) -> list[Any]:
        return [self.entries[j - 1][j] for j in range(1, self.n_cols + 1)]


def build(table: ComplexMomentTable, basis: OrthonormalBasis, n_max: int | None = None) -> HessenbergMatrix:
    """Entries ``h[k][j]`` for ``0 <= k, j <= n_max``; needs moments of degree ``n_max + 1``."""
    n_max = basis.degree if n_max is None else n_max
    table.require_degree(n_max + 1, "Hessenberg matrix")
    entries = symbol_matrix(table, basis, Z, n_max, n_max)
    with basis.policy.workprec():
        defect = max(
            (abs(entries[k][j]) for j in range(n_max + 1) for k in range(j + 2, n_max + 1)),
            default=mp.mpf(0),
        )
    if defect > basis.policy.band_tolerance:
        logger.warning("Hessenberg band defect %.3e exceeds tolerance %.3e", float(defect), basis.policy.band_tolerance)
    logger.debug("built Hessenberg matrix with %d columns, band defect %.3e", n_max + 1, float(defect))
    return HessenbergMatrix(
        entries=tuple(map(tuple, entries)),
        band_defect=float(defect),
        policy=basis.policy,
    )


def _check_columns(H: HessenbergMatrix, n: int, k_cut: int) -> None:
    if n + 1 > H.n_cols:
        raise InsufficientColumnsError(f"need column {n + 1} of the Hessenberg matrix, have {H.n_cols}")
    if k_cut > H.n_cols:
        raise InsufficientColumnsError(f"cutoff {k_cut} exceeds the {H.n_cols} stored columns")
    if k_cut < n:
        raise InsufficientColumnsError(f"cutoff {k_cut} is below n = {n}")


def s_sequence(H: HessenbergMatrix, n: int, k_cut: int | None = None) -> list[Any]:
    """``s_j = ‖z p_j‖² - ‖P_K z̄ p_j‖²`` for ``j <= n`` with ``K = k_cut``.

    Non-increasing in ``k_cut``; exact once ``k_cut >= j + 1`` for banded ``H``.
    """
    k_cut = H.n_cols if k_cut is None else k_cut
    _check_columns(H, n, k_cut)
    e = H.entries
    with H.policy.workprec():
        return [
            mp.fsum([e[k][j] for k in range(j + 2)], absolute=True, squared=True)
            - mp.fsum(e[j][: k_cut + 1], absolute=True, squared=True)
            for j in range(n + 1)
        ]


def area_estimate(H: HessenbergMatrix, n: int, k_cut: int | None = None) -> Any:
    """``π Σ_{j<=n} s_j``, which tends to the area of the cloud."""
    s = s_sequence(H, n, k_cut)
    with H.policy.workprec():
        return mp.pi * mp.fsum(s)


def kcut_increment(H: HessenbergMatrix, n: int, k_cut: int | None = None) -> Any:
    """Drop of ``Σ_{j<=n} s_j`` caused by the last retained column ``k_cut``.

    Small values mean the truncated row sums have settled.
    """
    k_cut = H.n_cols if k_cut is None else k_cut
    _check_columns(H, n, k_cut)
    with H.policy.workprec():
        return mp.fsum([H.entries[j][k_cut] for j in range(n + 1)], absolute=True, squared=True)


def far_corner_tail(H: HessenbergMatrix, n: int, N: int, k_cut: int | None = None) -> Any:
    """``Σ_{j<=n} Σ_{N<k<=K} |h_jk|²``, zero for banded ``H`` once ``N > n``."""
    k_cut = H.n_cols if k_cut is None else k_cut
    if N <= n:
        raise InsufficientColumnsError(f"far corner needs N > n, got N={N}, n={n}")
    if k_cut < N or k_cut > H.n_cols:
        raise InsufficientColumnsError(f"cutoff {k_cut} must lie between N={N} and {H.n_cols}")
    with H.policy.workprec():
        return mp.fsum(
            [H.entries[j][k] for j in range(n + 1) for k in range(N + 1, k_cut + 1)],
            absolute=True,
            squared=True,
        )


def selfcommutator(
    table: ComplexMomentTable,
    basis: OrthonormalBasis,
    H: HessenbergMatrix,
    n: int,
    k_cut: int | None = None,
) -> list[list[Any]]:
    """Truncated ``[S*, S]`` on ``span(p_0..p_n)``.

    Entry ``(j, k) = ⟨z p_k, z p_j⟩ - Σ_{ℓ<=K} conj(h_kℓ) h_jℓ``; the first term
    comes straight from the moments.
    """
    k_cut = H.n_cols if k_cut is None else k_cut
    if not n <= k_cut <= H.n_cols:
        raise InsufficientColumnsError(f"self-commutator needs n={n} <= cutoff {k_cut} <= {H.n_cols}")
    gram_z = symbol_matrix(table, basis, ABS_Z_SQUARED, n, n)
    e = H.entries
    with H.policy.workprec():
        return [
            [gram_z[j][k] - mp.fdot(e[j][: k_cut + 1], e[k][: k_cut + 1], conjugate=True) for k in range(n + 1)]
            for j in range(n + 1)
        ]


def hankel_singular_values(selfcomm: list[list[Any]], policy: PrecisionPolicy | None = None) -> list[Any]:
    """Singular numbers ``κ_j = sqrt(max(λ_j, 0))`` of the Hankel operator, descending."""
    policy = policy or PrecisionPolicy()
    with policy.workprec():
        eigenvalues = linalg.hermitian_eigenvalues(selfcomm)
        return [mp.sqrt(max(value, 0)) for value in reversed(eigenvalues)]


def numerical_rank(kappa: list[Any], rank_tol: float = 1e-8) -> int:
    if not kappa or kappa[0] == 0:
        return 0
    return sum(1 for value in kappa if value > rank_tol * kappa[0])
