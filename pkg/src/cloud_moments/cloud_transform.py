"""Moments of the uniform area mass on the cloud, estimated from the moments of ``μ``.

For a symbol ``R(z, z̄)`` the truncated trace

    T_{n,N}(R) = Σ_{j<=n} [⟨z R p_j, p_j⟩ - Σ_{k<=N} ⟨R p_j, p_k⟩ h_jk]

tends, as ``N → ∞`` and then ``n → ∞``, to ``(1/π) ∫_Σ ∂R/∂z̄ dA``. With
``R = z^p z̄^(q+1)/(q+1)`` this is the cloud moment
``c_pq = (1/π) ∫_Σ z^p z̄^q dA``. Outlying atoms of ``μ`` do not contribute in
the limit.
"""

from __future__ import annotations

import logging
from typing import Any

import numpy as np
from mpmath import mp
from pydantic import BaseModel, ConfigDict

from .errors import EmptySampleSetError, InsufficientColumnsError, InvalidArgumentError
from .hessenberg import ABS_Z_SQUARED, ZBAR, HessenbergMatrix, far_corner_tail, s_sequence
from .moment_core import ComplexMomentTable, PrecisionPolicy
from .orthopoly import OrthonormalBasis, cd_kernel, symbol_matrix

logger = logging.getLogger(__name__)


class BivariatePolynomial(BaseModel):
    """``R(z, z̄) = Σ r_pq z^p z̄^q`` with finitely many terms."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeffs: dict[tuple[int, int], Any]

    @classmethod
    def monomial(cls, p: int, q: int, coefficient: Any = 1) -> "BivariatePolynomial":
        return cls(coeffs={(p, q): coefficient})

    @classmethod
    def cloud_symbol(cls, p: int, q: int, policy: PrecisionPolicy | None = None) -> "BivariatePolynomial":
        """``z^p z̄^(q+1)/(q+1)``, whose ``∂/∂z̄`` is ``z^p z̄^q``."""
        policy = policy or PrecisionPolicy()
        with policy.workprec():
            return cls.monomial(p, q + 1, mp.mpf(1) / (q + 1))

    @property
    def deg_z(self) -> int:
        return max((p for p, _ in self.coeffs), default=0)

    @property
    def deg_zbar(self) -> int:
        return max((q for _, q in self.coeffs), default=0)

    @property
    def is_analytic(self) -> bool:
        return all(q == 0 or c == 0 for (_, q), c in self.coeffs.items())

    def times_z(self) -> "BivariatePolynomial":
        return BivariatePolynomial(coeffs={(p + 1, q): c for (p, q), c in self.coeffs.items()})

    def dbar_derivative(self) -> "BivariatePolynomial":
        return BivariatePolynomial(coeffs={(p, q - 1): q * c for (p, q), c in self.coeffs.items() if q > 0})

    def evaluate(self, z: Any) -> Any:
        zbar = mp.conj(z)
        return mp.fsum(c * z**p * zbar**q for (p, q), c in self.coeffs.items())

    def analytic_parts(self) -> dict[int, np.ndarray]:
        """``R_j`` as float64 coefficient arrays, ``R = Σ_j R_j(z) z̄^j``."""
        parts: dict[int, np.ndarray] = {}
        for (p, q), c in self.coeffs.items():
            coefficients = parts.setdefault(q, np.zeros(self.deg_z + 1, dtype=complex))
            coefficients[p] += complex(c)
        return parts


class CloudMomentEstimate(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: int
    q: int
    value: Any
    n: int
    N: int
    error_bound: float | None = None

    def as_complex(self) -> complex:
        return complex(self.value)


def trace_estimate(
    table: ComplexMomentTable,
    basis: OrthonormalBasis,
    H: HessenbergMatrix,
    R: BivariatePolynomial,
    n: int,
    N: int,
) -> Any:
    """The truncated trace ``T_{n,N}(R)``, every inner product expanded over the moment table."""
    if N < n:
        raise InvalidArgumentError(f"need N >= n, got n={n}, N={N}")
    if N > H.n_cols:
        raise InsufficientColumnsError(f"N={N} exceeds the {H.n_cols} columns of the Hessenberg matrix")
    if not R.coeffs:
        with basis.policy.workprec():
            return mp.mpc(0)

    diagonal = symbol_matrix(table, basis, R.times_z().coeffs, n, n)
    mixed = symbol_matrix(table, basis, R.coeffs, N, n)
    h = H.entries
    with basis.policy.workprec():
        first = mp.fsum(diagonal[j][j] for j in range(n + 1))
        second = mp.fdot(
            [mixed[k][j] for j in range(n + 1) for k in range(N + 1)],
            [h[j][k] for j in range(n + 1) for k in range(N + 1)],
        )
        return first - second


def cloud_moment(
    table: ComplexMomentTable,
    basis: OrthonormalBasis,
    H: HessenbergMatrix,
    p: int,
    q: int,
    n: int,
    N: int,
) -> CloudMomentEstimate:
    """Estimate of ``c_pq = (1/π) ∫_Σ z^p z̄^q dA``.

    Computed in the orientation ``p <= q``; ``c_qp`` is its conjugate, so the
    estimated table is Hermitian exactly.
    """
    if p < 0 or q < 0:
        raise InvalidArgumentError(f"moment indices must be non-negative, got ({p}, {q})")
    if p > q:
        mirrored = cloud_moment(table, basis, H, q, p, n, N)
        with basis.policy.workprec():
            return CloudMomentEstimate(p=p, q=q, value=mp.conj(mirrored.value), n=n, N=N)
    symbol = BivariatePolynomial.cloud_symbol(p, q, basis.policy)
    value = trace_estimate(table, basis, H, symbol, n, N)
    return CloudMomentEstimate(p=p, q=q, value=value, n=n, N=N)


def restricted_sup_norm(R: BivariatePolynomial, points: list[complex]) -> float:
    """Sampled sup of ``|R̃(z̄; w, w̄)|`` over all ordered pairs of ``points``.

    ``R̃ = Σ_j D_j(z̄, w̄) R_j(w)`` with the divided difference
    ``D_j = (z̄^j - w̄^j)/(z̄ - w̄) = Σ_{i<j} z̄^i w̄^(j-1-i)``, which equals
    ``j w̄^(j-1)`` on the diagonal. Sampling only bounds the true sup from below.
    """
    if not points:
        raise EmptySampleSetError("no support samples to evaluate the symbol on")
    samples = np.asarray(points, dtype=complex)
    zbar = np.conj(samples)[:, None]
    wbar = np.conj(samples)[None, :]
    parts = R.analytic_parts()
    total = np.zeros((samples.size, samples.size), dtype=complex)
    divided = np.ones_like(total)
    wbar_power = np.ones_like(wbar)
    for j in range(1, R.deg_zbar + 1):
        if j > 1:
            wbar_power = wbar_power * wbar
            divided = zbar * divided + wbar_power
        if j in parts:
            total += divided * np.polynomial.polynomial.polyval(samples, parts[j])[None, :]
    return float(np.max(np.abs(total)))


def error_bound(
    H: HessenbergMatrix,
    R: BivariatePolynomial,
    n: int,
    N: int,
    support_points: list[complex],
    hull_area_bound: float,
    k_cut: int | None = None,
    total_area: float | None = None,
) -> float:
    """Computable surrogate of the a-priori error of ``T_{n,N}(R)``.

    ``ε² <= (A/π) ‖R̃‖² [Σ_{j>n} s_j + Σ_{j<=n<N<k} |h_jk|²]`` where ``A`` bounds
    the area of the polynomial hull. The tail ``Σ_{j>n} s_j`` is
    ``total_area/π - Σ_{j<=n} s_j`` when the area is known, otherwise the
    partial total available at the cutoff; it is floored at zero.
    """
    if not support_points:
        raise EmptySampleSetError("no support samples to evaluate the symbol on")
    if hull_area_bound <= 0:
        raise InvalidArgumentError(f"hull area bound must be positive, got {hull_area_bound}")
    if N <= n:
        raise InvalidArgumentError(f"error bound needs N > n, got n={n}, N={N}")
    if R.is_analytic:
        return 0.0

    k_cut = H.n_cols if k_cut is None else k_cut
    sup = restricted_sup_norm(R, support_points)
    s = s_sequence(H, min(H.n_cols - 1, k_cut), k_cut)
    with H.policy.workprec():
        partial = mp.fsum(s[: n + 1])
        total = mp.mpf(total_area) / mp.pi if total_area is not None else mp.fsum(s)
        tail = max(total - partial, mp.mpf(0))
        far = far_corner_tail(H, n, N, k_cut) if k_cut > N else mp.mpf(0)
        bracket = tail + far
    logger.debug("error bound bracket: tail %.3e, far corner %.3e, sup %.3e", float(tail), float(far), sup)
    return float(np.sqrt(hull_area_bound / np.pi * sup**2 * float(bracket)))


def weak_kernel(basis: OrthonormalBasis, n: int, z: Any, w: Any) -> Any:
    """``z̄ K_{n+1}(z, w) - w̄ K_n(z, w)``, the weak approximant of ``L(z, w)``."""
    basis._require(n + 1)
    with basis.policy.workprec():
        z, w = mp.mpc(z), mp.mpc(w)
        return mp.conj(z) * cd_kernel(basis, n + 1, z, w) - mp.conj(w) * cd_kernel(basis, n, z, w)


def kernel_L_estimate(
    table: ComplexMomentTable,
    basis: OrthonormalBasis,
    n: int,
    N: int,
    z: Any,
    w: Any,
) -> Any:
    """``L_{N,n}(z, w) = ∫ K_N(z, ζ)(z̄ - ζ̄) K_n(ζ, w) dμ(ζ)`` by moment expansion.

    Equals ``Σ_{j<=n} conj(p_j(w)) [z̄ p_j(z) 1_{j<=N} - Σ_{k<=N} p_k(z) ⟨ζ̄ p_j, p_k⟩]``.
    """
    mixed = symbol_matrix(table, basis, ZBAR, N, n)
    with basis.policy.workprec():
        z, w = mp.mpc(z), mp.mpc(w)
        pz = basis.values(z, max(n, N))
        pw = basis.values(w, n)
        terms = []
        for j in range(n + 1):
            column = mp.fdot(pz[: N + 1], [mixed[k][j] for k in range(N + 1)])
            direct = mp.conj(z) * pz[j] if j <= N else 0
            terms.append(mp.conj(pw[j]) * (direct - column))
        return mp.fsum(terms)


def kernel_L_hs_norm(table: ComplexMomentTable, basis: OrthonormalBasis, n: int, N: int) -> Any:
    """``‖L_{N,n}‖²`` in ``L²(μ⊗μ)``: ``Σ_{j<=n} (‖z̄ p_j‖² - ‖P_N z̄ p_j‖²)`` for ``N >= n``."""
    if N < n:
        raise InvalidArgumentError(f"need N >= n, got n={n}, N={N}")
    norms = symbol_matrix(table, basis, ABS_Z_SQUARED, n, n)
    mixed = symbol_matrix(table, basis, ZBAR, N, n)
    with basis.policy.workprec():
        return mp.fsum(
            mp.re(norms[j][j]) - mp.fsum([mixed[k][j] for k in range(N + 1)], absolute=True, squared=True)
            for j in range(n + 1)
        )


class CloudMomentTable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    N: int
    estimates: tuple[tuple[CloudMomentEstimate, ...], ...]

    @property
    def c(self) -> list[list[complex]]:
        return [[e.as_complex() for e in row] for row in self.estimates]

    @property
    def a(self) -> list[list[complex]]:
        return [[np.pi * e.as_complex() for e in row] for row in self.estimates]

    def a_exact(self) -> list[list[Any]]:
        """``a_pq = π c_pq`` at working precision."""
        return [[mp.pi * e.value for e in row] for row in self.estimates]


def cloud_moment_table(
    table: ComplexMomentTable,
    basis: OrthonormalBasis,
    H: HessenbergMatrix,
    dmax: int,
    n: int,
    N: int,
    support_points: list[complex] | None = None,
    hull_area: float | None = None,
    k_cut: int | None = None,
    total_area: float | None = None,
) -> CloudMomentTable:
    """All ``c_pq`` for ``0 <= p, q <= dmax``, with error bounds when support samples are given."""
    rows = []
    for p in range(dmax + 1):
        row = []
        for q in range(dmax + 1):
            estimate = cloud_moment(table, basis, H, p, q, n, N)
            if support_points and hull_area:
                symbol = BivariatePolynomial.cloud_symbol(min(p, q), max(p, q), basis.policy)
                bound = error_bound(H, symbol, n, N, support_points, hull_area, k_cut, total_area)
                estimate = estimate.model_copy(update={"error_bound": bound})
            row.append(estimate)
        rows.append(tuple(row))
    logger.info("estimated cloud moments up to degree %d at n=%d, N=%d", dmax, n, N)
    return CloudMomentTable(n=n, N=N, estimates=tuple(rows))
