"""Closed-form moment generators for the example measures.

Every generator is exact at the working precision: the disk and ellipse use
binomial expansions against ``∫_{|u|<R} u^p ū^q dA = δ_pq π R^(2p+2)/(p+1)``,
circle-type measures reduce to constant Fourier coefficients, and atomic
measures are plain weighted sums.
"""

from __future__ import annotations

import json
import logging
from math import comb
from typing import Annotated, Literal

import numpy as np
from mpmath import mp
from pydantic import BaseModel, Field, PositiveFloat, NonNegativeFloat, TypeAdapter, ValidationError, model_validator
from scipy.spatial import ConvexHull, QhullError

from .errors import InvalidArgumentError, ParseError
from .models import ComplexValue
from .moment_core import ComplexMomentTable, PrecisionPolicy, combine

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


class Disk(BaseModel):
    kind: Literal["disk"] = "disk"
    center: ComplexValue = 0j
    radius: PositiveFloat


class EllipseJoukowski(BaseModel):
    """Centered, axis-aligned ellipse with semi-axes ``(√ρ ± 1/√ρ)/2`` and foci ``±1``."""

    kind: Literal["ellipse_joukowski"] = "ellipse_joukowski"
    rho: float = Field(gt=1)

    @property
    def semi_axes(self) -> tuple[float, float]:
        root = self.rho**0.5
        return (root + 1 / root) / 2, (root - 1 / root) / 2


class UnitCircle(BaseModel):
    """Normalized arc length ``dθ/2π`` on the unit circle."""

    kind: Literal["unit_circle"] = "unit_circle"


class RadialDiscrete(BaseModel):
    kind: Literal["radial_discrete"] = "radial_discrete"
    nodes: list[tuple[Annotated[float, Field(ge=0, le=1)], PositiveFloat]] = Field(min_length=1)


class Atoms(BaseModel):
    kind: Literal["atoms"] = "atoms"
    atoms: list[tuple[ComplexValue, PositiveFloat]] = Field(min_length=1)


class CirclePushforward(BaseModel):
    """Push-forward of ``dθ/2π`` by the polynomial ``r(z) = Σ coefficients[i] z^i``."""

    kind: Literal["circle_pushforward"] = "circle_pushforward"
    coefficients: list[ComplexValue] = Field(min_length=2)

    @model_validator(mode="after")
    def _check_degree(self) -> "CirclePushforward":
        if self.degree < 1:
            raise ValueError("push-forward polynomial must have degree at least 1")
        return self

    @property
    def degree(self) -> int:
        nonzero = [i for i, c in enumerate(self.coefficients) if c != 0]
        return nonzero[-1] if nonzero else -1


class WeightedMeasure(BaseModel):
    measure: "MeasureSpec"
    weight: NonNegativeFloat = 1.0


class Sum(BaseModel):
    kind: Literal["sum"] = "sum"
    parts: list[WeightedMeasure] = Field(min_length=1)


MeasureSpec = Annotated[
    Disk | EllipseJoukowski | UnitCircle | RadialDiscrete | Atoms | CirclePushforward | Sum,
    Field(discriminator="kind"),
]

WeightedMeasure.model_rebuild()
Sum.model_rebuild()

_measure_adapter: TypeAdapter[MeasureSpec] = TypeAdapter(MeasureSpec)


def parse_measure(data: bytes | str | dict) -> MeasureSpec:
    """Parse a MeasureSpec from JSON text or an already-decoded object."""
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno) from None
    try:
        return _measure_adapter.validate_python(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ParseError(first["msg"], field=".".join(str(p) for p in first["loc"])) from None


def dump_measure(spec: MeasureSpec) -> str:
    return _measure_adapter.dump_json(spec).decode("utf-8")


def _disk_moment(center, radius, pi):
    def moment(j: int, k: int):
        c, cbar = center, mp.conj(center)
        terms = []
        for s in range(min(j, k) + 1):
            terms.append(
                comb(j, s) * comb(k, s) * c ** (j - s) * cbar ** (k - s) * pi * radius ** (2 * s + 2) / (s + 1)
            )
        return mp.fsum(terms)

    return moment


def _ellipse_moment(rho, pi):
    root = mp.sqrt(rho)
    alpha, beta = root / 2, 1 / (2 * root)
    jacobian = (rho - 1 / rho) / 4

    # z = α u + β ū maps the unit disk onto the ellipse; u^p ū^q integrates to
    # π/(p+1) only when p = q.
    def moment(j: int, k: int):
        if (j - k) % 2:
            return mp.mpc(0)
        shift = (j - k) // 2
        terms = []
        for s in range(j + 1):
            t = s - shift
            if not 0 <= t <= k:
                continue
            power = s + k - t
            terms.append(comb(j, s) * comb(k, t) * alpha ** (s + t) * beta ** (j - s + k - t) * pi / (power + 1))
        return jacobian * mp.fsum(terms)

    return moment


def _poly_powers(coefficients, count):
    """Coefficient lists of r^0, ..., r^(count-1) by repeated convolution."""
    powers = [[mp.mpc(1)]]
    for _ in range(1, count):
        prev = powers[-1]
        nxt = [mp.mpc(0)] * (len(prev) + len(coefficients) - 1)
        for i, a in enumerate(prev):
            for l, c in enumerate(coefficients):
                nxt[i + l] += a * c
        powers.append(nxt)
    return powers


def moments_of(spec: MeasureSpec, degree: int, policy: PrecisionPolicy | None = None) -> ComplexMomentTable:
    """Moment table of ``spec`` up to ``degree``, exact at the policy precision."""
    if degree < 0:
        raise InvalidArgumentError(f"degree must be non-negative, got {degree}")
    policy = policy or PrecisionPolicy()
    build = ComplexMomentTable.from_function

    with policy.workprec():
        pi = +mp.pi
        match spec:
            case Disk(center=center, radius=radius):
                moment = _disk_moment(mp.mpc(center), mp.mpf(radius), pi)
                table = build(degree, moment, mass_unit="lebesgue", policy=policy)
            case EllipseJoukowski(rho=rho):
                table = build(degree, _ellipse_moment(mp.mpf(rho), pi), mass_unit="lebesgue", policy=policy)
            case UnitCircle():
                table = build(degree, lambda j, k: 1 if j == k else 0, mass_unit="probability", policy=policy)
            case RadialDiscrete(nodes=nodes):
                radial = [(mp.mpf(r), mp.mpf(w)) for r, w in nodes]

                def radial_moment(j: int, k: int):
                    if j != k:
                        return 0
                    return mp.fsum(w * r ** (2 * j) for r, w in radial)

                table = build(degree, radial_moment, policy=policy)
            case Atoms(atoms=atoms):
                points = [(mp.mpc(z), mp.mpf(w)) for z, w in atoms]

                def atomic_moment(j: int, k: int):
                    return mp.fsum(w * z**j * mp.conj(z) ** k for z, w in points)

                table = build(degree, atomic_moment, policy=policy)
            case CirclePushforward(coefficients=coefficients):
                powers = _poly_powers([mp.mpc(c) for c in coefficients], degree + 1)

                # constant Fourier coefficient of r(e^{iθ})^j conj(r(e^{iθ}))^k
                def pushforward_moment(j: int, k: int):
                    common = min(len(powers[j]), len(powers[k]))
                    return mp.fdot(powers[j][:common], powers[k][:common], conjugate=True)

                table = build(degree, pushforward_moment, mass_unit="probability", policy=policy)
            case Sum(parts=parts):
                table = combine((moments_of(part.measure, degree, policy), part.weight) for part in parts)
            case _:
                raise InvalidArgumentError(f"unsupported measure {type(spec).__name__}")

    logger.debug("generated %s moments up to degree %d", getattr(spec, "kind", "?"), degree)
    return table


def _unit_disk_samples(count: int) -> np.ndarray:
    """Boundary ring plus a sunflower spiral filling the interior."""
    ring = max(1, (count + 1) // 2)
    interior = count - ring
    boundary = np.exp(2j * np.pi * np.arange(ring) / ring)
    k = np.arange(interior)
    radii = np.sqrt((k + 0.5) / max(interior, 1))
    inner = radii * np.exp(1j * GOLDEN_ANGLE * k)
    return np.concatenate([boundary, inner])


def support_samples(spec: MeasureSpec, count: int) -> list[complex]:
    """Deterministic quasi-uniform points of ``supp(μ)``, including extreme-modulus points."""
    if count < 1:
        raise InvalidArgumentError(f"count must be at least 1, got {count}")

    match spec:
        case Disk(center=center, radius=radius):
            points = center + radius * _unit_disk_samples(count)
        case EllipseJoukowski(rho=rho):
            u = _unit_disk_samples(count)
            root = np.sqrt(rho)
            points = root / 2 * u + np.conj(u) / (2 * root)
        case UnitCircle():
            points = np.exp(2j * np.pi * np.arange(count) / count)
        case RadialDiscrete(nodes=nodes):
            per_circle = max(1, count // len(nodes))
            rings = []
            for r, _ in nodes:
                if r == 0:
                    rings.append(np.zeros(1, dtype=complex))
                else:
                    rings.append(r * np.exp(2j * np.pi * np.arange(per_circle) / per_circle))
            points = np.concatenate(rings)
        case Atoms(atoms=atoms):
            points = np.array(list(dict.fromkeys(complex(z) for z, _ in atoms)))
        case CirclePushforward(coefficients=coefficients):
            circle = np.exp(2j * np.pi * np.arange(count) / count)
            points = np.polynomial.polynomial.polyval(circle, np.array(coefficients, dtype=complex))
        case Sum(parts=parts):
            active = [part.measure for part in parts if part.weight > 0]
            share = max(1, count // max(len(active), 1))
            points = np.array([z for measure in active for z in support_samples(measure, share)])
        case _:
            raise InvalidArgumentError(f"unsupported measure {type(spec).__name__}")

    return [complex(z) for z in np.asarray(points, dtype=complex)]


def hull_area_bound(points: list[complex]) -> float:
    """Area of the convex hull of ``points``; ``π·max|z|²`` when the hull is degenerate."""
    xy = np.array([[z.real, z.imag] for z in points])
    try:
        return float(ConvexHull(xy).volume)
    except (QhullError, ValueError):
        radius = float(np.max(np.abs(np.asarray(points)))) if points else 0.0
        return float(np.pi * radius**2) or float(np.finfo(float).tiny)
