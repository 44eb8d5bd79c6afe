"""Complex moment tables: data model, validation, precision policy and file format.

A table stores ``m[j][k] = ∫ z^j conj(z)^k dμ`` for ``0 <= j, k <= D``. It is the
Gram matrix of the monomials ``1, z, ..., z^D`` in ``L²(μ)``, so every inner
product of polynomials in ``z`` and ``conj(z)`` is a finite combination of its
entries (see :func:`pairing`).
"""

from __future__ import annotations

import json
import logging
import math
from typing import Any, Callable, Iterable, Literal, Mapping, Sequence

from mpmath import mp
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import default_precision_bits
from .errors import (
    DegreeMismatchError,
    DegreeTooHighError,
    InvalidArgumentError,
    MalformedTableError,
    NonHermitianError,
    NotPSDError,
    ParseError,
)
from .lib import linalg

logger = logging.getLogger(__name__)

MassUnit = Literal["lebesgue", "probability", "raw"]
Terms = Mapping[tuple[int, int], Any]


class PrecisionPolicy(BaseModel):
    """Working precision and the relative tolerances derived from it."""

    model_config = ConfigDict(frozen=True)

    significand_bits: int = Field(default_factory=default_precision_bits, ge=53)
    psd_tol: float | None = Field(default=None, gt=0)
    band_tol: float | None = Field(default=None, gt=0)
    rank_tol: float = Field(default=1e-8, gt=0)

    @property
    def psd_tolerance(self) -> float:
        return self.psd_tol if self.psd_tol is not None else 2.0 ** (-self.significand_bits / 2)

    @property
    def band_tolerance(self) -> float:
        return self.band_tol if self.band_tol is not None else 2.0 ** (-self.significand_bits / 4)

    @property
    def pivot_threshold(self) -> float:
        return 2.0 ** (-self.significand_bits / 2)

    def workprec(self):
        return mp.workprec(self.significand_bits)


class ComplexMomentTable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: tuple[tuple[Any, ...], ...]
    mass_unit: MassUnit = "raw"
    policy: PrecisionPolicy = Field(default_factory=PrecisionPolicy)

    @model_validator(mode="after")
    def _check_shape(self) -> "ComplexMomentTable":
        size = len(self.entries)
        if size == 0:
            raise MalformedTableError("moment table has no entries")
        for j, row in enumerate(self.entries):
            if len(row) != size:
                raise MalformedTableError(f"row {j} has {len(row)} entries, expected {size}")
        return self

    @classmethod
    def from_entries(
        cls,
        entries: Sequence[Sequence[Any]],
        *,
        mass_unit: MassUnit = "raw",
        policy: PrecisionPolicy | None = None,
    ) -> "ComplexMomentTable":
        policy = policy or PrecisionPolicy()
        with policy.workprec():
            rows = tuple(tuple(mp.mpc(x) for x in row) for row in entries)
        return cls(entries=rows, mass_unit=mass_unit, policy=policy)

    @classmethod
    def from_function(
        cls,
        degree: int,
        moment: Callable[[int, int], Any],
        *,
        mass_unit: MassUnit = "raw",
        policy: PrecisionPolicy | None = None,
    ) -> "ComplexMomentTable":
        """Evaluate ``moment(j, k)`` on the upper triangle and mirror it, so the table is Hermitian exactly."""
        if degree < 0:
            raise InvalidArgumentError(f"degree must be non-negative, got {degree}")
        policy = policy or PrecisionPolicy()
        size = degree + 1
        with policy.workprec():
            rows = [[mp.mpc(0)] * size for _ in range(size)]
            for j in range(size):
                rows[j][j] = mp.mpc(mp.re(moment(j, j)))
                for k in range(j + 1, size):
                    value = mp.mpc(moment(j, k))
                    rows[j][k] = value
                    rows[k][j] = mp.conj(value)
        return cls(entries=tuple(map(tuple, rows)), mass_unit=mass_unit, policy=policy)

    @property
    def degree(self) -> int:
        return len(self.entries) - 1

    @property
    def mass(self) -> Any:
        return mp.re(self.entries[0][0])

    def m(self, j: int, k: int) -> Any:
        return self.entries[j][k]

    def truncate(self, degree: int) -> "ComplexMomentTable":
        if degree > self.degree:
            raise DegreeTooHighError(degree, self.degree, "truncate")
        rows = tuple(row[: degree + 1] for row in self.entries[: degree + 1])
        return ComplexMomentTable(entries=rows, mass_unit=self.mass_unit, policy=self.policy)

    def require_degree(self, required: int, what: str) -> None:
        if required > self.degree:
            raise DegreeTooHighError(required, self.degree, what)

    def as_complex(self) -> list[list[complex]]:
        return [[complex(x) for x in row] for row in self.entries]


class ValidationReport(BaseModel):
    degree: int
    mass: float
    hermitian_defect: float
    min_eigenvalue: float
    max_eigenvalue: float
    condition_estimate: float | None
    stable_degree: int
    smallest_pivot: float
    precision_bits: int
    valid: bool


def validate(table: ComplexMomentTable, policy: PrecisionPolicy | None = None) -> ValidationReport:
    """Check Hermitian symmetry and Gram positivity of ``table`` at the policy precision.

    Raises :class:`NonHermitianError` or :class:`NotPSDError` for invalid data;
    otherwise reports the spectrum bounds and the largest degree ``D' <= D``
    whose leading principal block is numerically positive definite.
    """
    policy = policy or table.policy
    with policy.workprec():
        mass = table.mass
        if mass <= 0:
            raise NotPSDError(float(mass), 0.0)
        tol = policy.psd_tolerance * mass
        defect = linalg.hermitian_defect(table.entries)
        if defect > tol:
            raise NonHermitianError(float(defect), float(tol))

        eigenvalues = linalg.hermitian_eigenvalues(table.entries)
        lowest, highest = eigenvalues[0], eigenvalues[-1]
        if lowest < -tol:
            raise NotPSDError(float(lowest), float(tol))

        chol = linalg.cholesky_lower(table.entries, policy.pivot_threshold * mass)
        stable = table.degree if chol.failed_at is None else chol.failed_at - 1
        smallest_pivot = min(chol.pivots)
        condition = float(highest / lowest) if lowest > 0 else None

    logger.debug(
        "validated degree %d table: min eig %s, stable degree %d", table.degree, mp.nstr(lowest, 8), stable
    )
    return ValidationReport(
        degree=table.degree,
        mass=float(mass),
        hermitian_defect=float(defect),
        min_eigenvalue=float(lowest),
        max_eigenvalue=float(highest),
        condition_estimate=condition,
        stable_degree=stable,
        smallest_pivot=float(smallest_pivot),
        precision_bits=policy.significand_bits,
        valid=True,
    )


def combine(tables: Iterable[tuple[ComplexMomentTable, float]]) -> ComplexMomentTable:
    """Moments of a weighted sum of measures: the entrywise weighted sum of their tables."""
    parts = list(tables)
    if not parts:
        raise InvalidArgumentError("combine needs at least one table")
    degree = parts[0][0].degree
    for table, weight in parts:
        if table.degree != degree:
            raise DegreeMismatchError(f"cannot combine tables of degree {degree} and {table.degree}")
        if weight < 0:
            raise InvalidArgumentError(f"weights must be non-negative, got {weight}")

    policy = max((table.policy for table, _ in parts), key=lambda p: p.significand_bits)
    units = {table.mass_unit for table, _ in parts}
    unit: MassUnit = units.pop() if len(units) == 1 else "raw"
    size = degree + 1
    with policy.workprec():
        weights = [mp.mpf(weight) for _, weight in parts]
        rows = tuple(
            tuple(mp.fdot(weights, [table.entries[j][k] for table, _ in parts]) for k in range(size))
            for j in range(size)
        )
    return ComplexMomentTable(entries=rows, mass_unit=unit, policy=policy)


def pairing(table: ComplexMomentTable, f: Terms, g: Terms) -> Any:
    """Exact ``⟨f, g⟩ = ∫ f conj(g) dμ`` for ``f = Σ f_ab z^a z̄^b`` and ``g`` likewise.

    ``z^a z̄^b · conj(z^c z̄^d) = z^(a+d) z̄^(b+c)``, i.e. ``m[a+d][b+c]``.
    """
    needed = max(max(a + d, b + c) for a, b in f for c, d in g)
    table.require_degree(needed, "pairing")
    with table.policy.workprec():
        products = []
        entries = []
        for (a, b), fc in f.items():
            for (c, d), gc in g.items():
                products.append(mp.mpc(fc) * mp.conj(gc))
                entries.append(table.entries[a + d][b + c])
        return mp.fdot(products, entries)


class MomentTableFile(BaseModel):
    degree: int = Field(ge=0)
    mass_unit: MassUnit = "raw"
    entries: list[list[tuple[float | str, float | str]]]


def _encode_float(x: float, hex_floats: bool) -> float | str:
    if hex_floats:
        return float(x).hex()
    if not math.isfinite(x):
        raise InvalidArgumentError(f"cannot export non-finite value {x}")
    return x


def _decode_float(x: float | str) -> float:
    if isinstance(x, str):
        return float.fromhex(x)
    return float(x)


def encode_complex(z: Any, hex_floats: bool = False) -> list[float | str]:
    z = complex(z)
    return [_encode_float(z.real, hex_floats), _encode_float(z.imag, hex_floats)]


def save(table: ComplexMomentTable, *, hex_floats: bool = False) -> bytes:
    """Serialize to the JSON moment-table format, values rounded to 64-bit floats."""
    payload = MomentTableFile(
        degree=table.degree,
        mass_unit=table.mass_unit,
        entries=[[tuple(encode_complex(x, hex_floats)) for x in row] for row in table.entries],
    )
    return (payload.model_dump_json() + "\n").encode("utf-8")


def load(data: bytes | str, policy: PrecisionPolicy | None = None) -> ComplexMomentTable:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from None
    try:
        parsed = MomentTableFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise ParseError(first["msg"], field=field) from None

    size = parsed.degree + 1
    if len(parsed.entries) != size:
        raise ParseError(f"expected {size} rows, got {len(parsed.entries)}", field="entries")
    for j, row in enumerate(parsed.entries):
        if len(row) != size:
            raise ParseError(f"expected {size} entries, got {len(row)}", field=f"entries.{j}")
    try:
        values = [[complex(_decode_float(re), _decode_float(im)) for re, im in row] for row in parsed.entries]
    except ValueError as e:
        raise ParseError(str(e), field="entries") from None
    return ComplexMomentTable.from_entries(values, mass_unit=parsed.mass_unit, policy=policy)
