"""Exponential transform of cloud moments and the 2D Padé reconstruction of a quadrature domain.

With ``u = 1/w`` and ``v = 1/z̄`` the truncated transform is

    F(w, z) = exp(-(1/π) Σ_{k,ℓ<=d} a_kℓ u^(k+1) v^(ℓ+1)) = 1 - Σ b_mn u^(m+1) v^(n+1).

The ``(d+1)×(d+1)`` block of ``b`` is Hermitian and positive semidefinite; it
is singular exactly when the moments come from a quadrature domain of order
``d``, and then ``F = 1 - Q(w, z)/(P(w) conj(P(z)))`` with ``P`` monic of degree
``d`` (zeros at the quadrature nodes) and boundary ``{Q(z, z) = |P(z)|²}``.
"""

from __future__ import annotations

import logging
import warnings
from typing import Any, Sequence

from mpmath import mp
from pydantic import BaseModel, ConfigDict

from .errors import (
    DegreeTooHighError,
    IllConditionedNullSpaceError,
    InvalidArgumentError,
    OutsideDomainOfValidityWarning,
    RankTestFailedError,
)
from .lib import linalg
from .moment_core import PrecisionPolicy

logger = logging.getLogger(__name__)


class ExpTransformTable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    b: tuple[tuple[Any, ...], ...]
    policy: PrecisionPolicy

    @property
    def d(self) -> int:
        return len(self.b) - 1

    def block(self, d: int) -> list[list[Any]]:
        if d > self.d:
            raise DegreeTooHighError(d, self.d, "b-table block")
        return [list(row[: d + 1]) for row in self.b[: d + 1]]


class QuadratureTest(BaseModel):
    determinant: complex
    singular_values: list[float]
    numerical_rank: int
    is_quadrature: bool


class ReconstructedDomain(BaseModel):
    """Monic node polynomial ``P`` (ascending coefficients) and boundary numerator ``Q``."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    P: tuple[Any, ...]
    Q: tuple[tuple[Any, ...], ...]
    policy: PrecisionPolicy

    @property
    def d(self) -> int:
        return len(self.P) - 1

    def nodes(self) -> list[complex]:
        """Quadrature nodes, the zeros of ``P``."""
        if self.d == 0:
            return []
        with self.policy.workprec():
            return [complex(r) for r in mp.polyroots(list(reversed(self.P)), maxsteps=200, extraprec=64)]

    def node_polynomial(self, z: Any) -> Any:
        with self.policy.workprec():
            return mp.polyval(list(reversed(self.P)), mp.mpc(z))

    def boundary_polynomial(self, z: Any) -> Any:
        with self.policy.workprec():
            z = mp.mpc(z)
            zbar = mp.conj(z)
            return mp.fsum(
                c * z**m * zbar**n for m, row in enumerate(self.Q) for n, c in enumerate(row)
            )

    def transform(self, w: Any, z: Any) -> Any:
        """``1 - Q(w, z)/(P(w) conj(P(z)))`` with ``Q(w, z) = Σ Q_st w^s z̄^t``."""
        with self.policy.workprec():
            w, z = mp.mpc(w), mp.mpc(z)
            zbar = mp.conj(z)
            numerator = mp.fsum(c * w**s * zbar**t for s, row in enumerate(self.Q) for t, c in enumerate(row))
            return 1 - numerator / (self.node_polynomial(w) * mp.conj(self.node_polynomial(z)))


def _policy(policy: PrecisionPolicy | None) -> PrecisionPolicy:
    return policy or PrecisionPolicy()


def series_to_b(a: Sequence[Sequence[Any]], d: int, policy: PrecisionPolicy | None = None) -> ExpTransformTable:
    """Exponentiate the moment series and read off ``b_mn`` for ``m, n <= d``.

    Uses ``∂_u E = (∂_u S) E``, i.e.
    ``i E[i][j] = Σ_{i'>=1} Σ_{j'} i' S[i'][j'] E[i-i'][j-j']`` with ``E[0][j] = δ_j0``
    since ``S`` has no ``u``-free terms.
    """
    if d < 0:
        raise InvalidArgumentError(f"d must be non-negative, got {d}")
    if len(a) < d + 1 or any(len(row) < d + 1 for row in a[: d + 1]):
        raise DegreeTooHighError(d, len(a) - 1, "exponential transform")
    policy = _policy(policy)
    top = d + 1

    with policy.workprec():
        S = [[mp.mpc(0)] * (top + 1) for _ in range(top + 1)]
        for k in range(top):
            for l in range(top):
                S[k + 1][l + 1] = -mp.mpc(a[k][l]) / mp.pi
        E = [[mp.mpc(0)] * (top + 1) for _ in range(top + 1)]
        E[0][0] = mp.mpc(1)
        for i in range(1, top + 1):
            for j in range(top + 1):
                factors = []
                values = []
                for di in range(1, i + 1):
                    for dj in range(j + 1):
                        if S[di][dj] != 0:
                            factors.append(di * S[di][dj])
                            values.append(E[i - di][j - dj])
                E[i][j] = mp.fdot(factors, values) / i if factors else mp.mpc(0)
        b = tuple(tuple(-E[m + 1][n + 1] for n in range(top)) for m in range(top))
    return ExpTransformTable(b=b, policy=policy)


def qd_rank_test(b: ExpTransformTable, tol: float = 1e-10, d: int | None = None) -> QuadratureTest:
    """Determinant and singular values of the ``b`` block; quadrature iff ``σ_min <= tol·σ_max``."""
    block = b.block(b.d if d is None else d)
    with b.policy.workprec():
        determinant = linalg.determinant(block)
        values = linalg.singular_values(block)
        largest = values[0]
        rank = sum(1 for s in values if s > tol * largest)
        is_quadrature = bool(values[-1] <= tol * largest)
    logger.debug("b-block rank %d of %d, det %s", rank, len(values), mp.nstr(determinant, 5))
    return QuadratureTest(
        determinant=complex(determinant),
        singular_values=[float(s) for s in values],
        numerical_rank=rank,
        is_quadrature=is_quadrature,
    )


def pade_reconstruct(b: ExpTransformTable, d: int | None = None, tol: float = 1e-10) -> ReconstructedDomain:
    """Recover ``P`` and ``Q`` of the rational approximant ``R_d = 1 - Q/(P·conj(P))``.

    The coefficient vector ``x`` of ``P`` satisfies ``Σ_m x_m b_mn = 0`` for all
    ``n``; since the block is Hermitian, ``x`` is the conjugate of its
    smallest right singular vector. ``Q`` is the polynomial part of
    ``P(w) conj(P(z)) Σ b_mn w^(-m-1) z̄^(-n-1)``.
    """
    d = b.d if d is None else d
    if d < 1:
        raise InvalidArgumentError(f"reconstruction needs d >= 1, got {d}")
    test = qd_rank_test(b, tol, d)
    if not test.is_quadrature:
        raise RankTestFailedError(
            f"b-block of order {d} is not singular at tol {tol:g} "
            f"(smallest singular value {test.singular_values[-1]:.3e})"
        )
    block = b.block(d)
    with b.policy.workprec():
        values, vh = linalg.singular_decomposition(block)
        if values[-2] <= tol * values[0]:
            raise IllConditionedNullSpaceError(
                f"null space of the b-block has dimension > 1 at tol {tol:g}; try a smaller d"
            )
        x = vh[-1]
        lead = x[d]
        if abs(lead) <= tol * max(abs(c) for c in x):
            raise IllConditionedNullSpaceError("null vector has vanishing leading coefficient")
        P = [c / lead for c in x]
        P[d] = mp.mpc(1)
        Q = [
            [
                mp.fsum(
                    P[s + m + 1] * mp.conj(P[t + n + 1]) * block[m][n]
                    for m in range(d - s)
                    for n in range(d - t)
                )
                for t in range(d)
            ]
            for s in range(d)
        ]
    logger.info("reconstructed quadrature domain of order %d", d)
    return ReconstructedDomain(P=tuple(P), Q=tuple(map(tuple, Q)), policy=b.policy)


def rational_b(domain: ReconstructedDomain, d_out: int) -> ExpTransformTable:
    """Series coefficients of ``Q(w, z)/(P(w) conj(P(z)))`` in ``w^(-m-1) z̄^(-n-1)``, ``m, n <= d_out``.

    ``1/P(w) = u^d / P̃(u)`` with the reversed polynomial ``P̃(0) = 1``.
    """
    d = domain.d
    order = d_out + 2
    with domain.policy.workprec():
        reversed_p = [domain.P[d - k] for k in range(d + 1)]
        inverse = [mp.mpc(1)]
        for k in range(1, order + 1):
            inverse.append(-mp.fsum(reversed_p[i] * inverse[k - i] for i in range(1, min(k, d) + 1)))

        def coefficient(m: int, n: int) -> Any:
            terms = []
            for s, row in enumerate(domain.Q):
                for t, c in enumerate(row):
                    iu, iv = m + 1 - d + s, n + 1 - d + t
                    if iu >= 0 and iv >= 0:
                        terms.append(c * inverse[iu] * mp.conj(inverse[iv]))
            return mp.fsum(terms)

        b = tuple(tuple(coefficient(m, n) for n in range(d_out + 1)) for m in range(d_out + 1))
    return ExpTransformTable(b=b, policy=domain.policy)


def eval_series(
    a: Sequence[Sequence[Any]],
    z: Any,
    w: Any,
    radius: float | None = None,
    policy: PrecisionPolicy | None = None,
) -> Any:
    """Truncated ``F(w, z)``; warns with :class:`OutsideDomainOfValidityWarning` when ``|z|`` or ``|w|`` is within ``radius``."""
    policy = _policy(policy)
    with policy.workprec():
        z, w = mp.mpc(z), mp.mpc(w)
        if radius is not None and min(abs(z), abs(w)) <= radius:
            warnings.warn(
                f"series evaluated at |z|={float(abs(z)):.3g}, |w|={float(abs(w)):.3g} "
                f"inside the support radius {radius:.3g}",
                OutsideDomainOfValidityWarning,
                stacklevel=2,
            )
        u, v = 1 / w, 1 / mp.conj(z)
        exponent = mp.fsum(
            mp.mpc(a[k][l]) * u ** (k + 1) * v ** (l + 1) for k in range(len(a)) for l in range(len(a[k]))
        )
        return mp.exp(-exponent / mp.pi)


def boundary_residual(domain: ReconstructedDomain, z: Any) -> float:
    """``|P(z)|² - Re Q(z, z)``: zero on the boundary, negative inside, positive outside."""
    with domain.policy.workprec():
        return float(abs(domain.node_polynomial(z)) ** 2 - mp.re(domain.boundary_polynomial(z)))
