"""Command-level pipelines shared by the CLI and the MCP server.

Each ``Workspace`` method takes a validated :class:`RunConfig` and returns a
pydantic output model. Errors propagate as :class:`CloudMomentsError`; the
callers decide whether they become exit codes or ``error`` fields.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np
from mpmath import mp
from pydantic import ValidationError

from . import cloud_transform, exptransform, hessenberg, moment_core
from .cloud_transform import BivariatePolynomial, cloud_moment_table
from .errors import InvalidArgumentError, ParseError
from .lib.utils import read_bytes, safe_path_join, write_output
from .measure_lib import MeasureSpec, hull_area_bound, moments_of, parse_measure, support_samples
from .models import (
    CloudMomentBound,
    CloudMomentsOutput,
    ErrorBoundOutput,
    HessenbergOutput,
    MomentTableOutput,
    OrthopolyOutput,
    ReconstructionOutput,
    RunConfig,
    ValidationOutput,
)
from .moment_core import ComplexMomentTable, PrecisionPolicy
from .orthopoly import OrthonormalBasis, cd_kernel, gram_residual, orthonormalize

logger = logging.getLogger(__name__)

GridRow = tuple[float, float, float]

# commands that take a moment file of whatever degree it has
_ANY_DEGREE = ("gen-moments", "validate")


def run_config(**fields: Any) -> RunConfig:
    """Build a :class:`RunConfig`, reporting the first violated constraint as ``InvalidArgumentError``."""
    try:
        return RunConfig(**{k: v for k, v in fields.items() if v is not None})
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        message = first["msg"].removeprefix("Value error, ")
        raise InvalidArgumentError(f"{where}: {message}" if where else message) from None


def _floats(values: list[Any]) -> list[float]:
    return [float(mp.re(v)) for v in values]


class Workspace:
    """Pipelines over measure specs and moment files found under ``root``.

    With ``confined=True`` every path must resolve inside ``root``.
    """

    def __init__(self, root: str | Path = ".", *, confined: bool = True, policy: PrecisionPolicy | None = None):
        self.root = Path(root)
        self.confined = confined
        self.policy = policy

    def resolve(self, path: str | Path) -> Path:
        if self.confined:
            return safe_path_join(self.root, path)
        return self.root / path

    def policy_for(self, config: RunConfig) -> PrecisionPolicy:
        if config.prec is not None:
            return PrecisionPolicy(significand_bits=config.prec)
        return self.policy or PrecisionPolicy()

    def measure(self, source: str | dict[str, Any]) -> MeasureSpec:
        if isinstance(source, dict):
            return parse_measure(source)
        return parse_measure(read_bytes(self.resolve(source)))

    def table(self, config: RunConfig) -> ComplexMomentTable:
        """Moment table from ``config.moments`` if given, else generated from ``config.measure``."""
        policy = self.policy_for(config)
        if config.moments is not None:
            table = moment_core.load(read_bytes(self.resolve(config.moments)), policy)
            if config.degree is not None or config.command not in _ANY_DEGREE:
                table.require_degree(config.table_degree, config.command)
            return table
        if config.measure is None:
            raise InvalidArgumentError("either a measure or a moment table is required")
        table = moments_of(self.measure(config.measure), config.table_degree, policy)
        logger.info("generated moment table of degree %d", table.degree)
        return table

    def _basis(self, table: ComplexMomentTable, n_max: int) -> OrthonormalBasis:
        basis = orthonormalize(table, n_max)
        logger.info("orthonormal basis built to degree %d", n_max)
        return basis

    def moment_file(self, config: RunConfig) -> bytes:
        return moment_core.save(self.table(config), hex_floats=config.hex_floats)

    def gen_moments(self, config: RunConfig) -> MomentTableOutput:
        table = self.table(config)
        out_path = None
        if config.out is not None:
            out_path = write_output(moment_core.save(table, hex_floats=config.hex_floats), self.resolve(config.out))
        return MomentTableOutput(
            degree=table.degree,
            mass_unit=table.mass_unit,
            entries=table.as_complex(),
            out_path=out_path,
        )

    def validate(self, config: RunConfig) -> ValidationOutput:
        table = self.table(config)
        return ValidationOutput(report=moment_core.validate(table))

    def orthopoly(self, config: RunConfig) -> OrthopolyOutput:
        n_max = config.hessenberg_columns
        table = self.table(config)
        basis = self._basis(table, n_max)
        return OrthopolyOutput(
            n_max=n_max,
            gamma=_floats(basis.gamma),
            coefficients=[[complex(c) for c in row] for row in basis.coeff],
            gram_residual=float(gram_residual(table, basis)),
        )

    def hessenberg(self, config: RunConfig) -> HessenbergOutput:
        n_max = config.hessenberg_columns
        table = self.table(config)
        basis = self._basis(table, n_max)
        H = hessenberg.build(table, basis, n_max)
        kcut = config.kcut if config.kcut is not None else n_max
        n = min(kcut, n_max) - 1
        if n < 0:
            raise InvalidArgumentError("hessenberg needs at least two columns")
        s = hessenberg.s_sequence(H, n, kcut)
        areas = [hessenberg.area_estimate(H, j, kcut) for j in range(n + 1)]
        kappa = hessenberg.hankel_singular_values(hessenberg.selfcommutator(table, basis, H, n, kcut), basis.policy)
        return HessenbergOutput(
            n_cols=H.n_cols,
            kcut=kcut,
            h=[[complex(x) for x in row] for row in H.entries],
            band_defect=H.band_defect,
            s=_floats(s),
            area_estimates=_floats(areas),
            kcut_increment=float(hessenberg.kcut_increment(H, n, kcut)),
            kappa=_floats(kappa),
            numerical_rank=hessenberg.numerical_rank(kappa, basis.policy.rank_tol),
        )

    def _support(self, config: RunConfig) -> tuple[list[complex], float] | None:
        if config.measure is None:
            return None
        points = support_samples(self.measure(config.measure), config.samples)
        return points, hull_area_bound(points)

    def support_radius(self, config: RunConfig) -> float | None:
        """Largest modulus over the sampled support of ``config.measure``, if there is one."""
        support = self._support(config)
        if support is None:
            return None
        return max(abs(z) for z in support[0])

    def series_value(self, config: RunConfig, a: list[list[complex]], z: complex, w: complex) -> Any:
        """Truncated exponential transform ``F(w, z)`` of ``a``; warns when a point lies within the support radius."""
        return exptransform.eval_series(a, z, w, radius=self.support_radius(config), policy=self.policy_for(config))

    def cloud_moments(self, config: RunConfig) -> CloudMomentsOutput:
        n_max = config.hessenberg_columns
        table = self.table(config)
        basis = self._basis(table, n_max)
        H = hessenberg.build(table, basis, n_max)
        kcut = config.kcut if config.kcut is not None else n_max
        support = self._support(config)
        points, hull = support if support else (None, None)
        estimates = cloud_moment_table(
            table, basis, H, config.dmax, config.n, config.N, points, hull, kcut
        )
        bounds = [
            CloudMomentBound(p=e.p, q=e.q, bound=e.error_bound)
            for row in estimates.estimates
            for e in row
            if e.error_bound is not None
        ]
        return CloudMomentsOutput(
            n=config.n,
            N=config.N,
            dmax=config.dmax,
            kcut=kcut,
            hull_area=hull,
            c=estimates.c,
            a=estimates.a,
            error_bounds=bounds,
        )

    def error_bound(self, config: RunConfig) -> ErrorBoundOutput:
        support = self._support(config)
        if support is None:
            raise InvalidArgumentError("error bounds need a measure to sample its support")
        points, hull = support
        n_max = config.hessenberg_columns
        table = self.table(config)
        basis = self._basis(table, n_max)
        H = hessenberg.build(table, basis, n_max)
        kcut = config.kcut if config.kcut is not None else n_max
        bounds = []
        for p in range(config.dmax + 1):
            for q in range(p, config.dmax + 1):
                symbol = BivariatePolynomial.cloud_symbol(p, q, basis.policy)
                bound = cloud_transform.error_bound(H, symbol, config.n, config.N, points, hull, kcut)
                bounds.append(CloudMomentBound(p=p, q=q, bound=bound))
        return ErrorBoundOutput(
            n=config.n, N=config.N, kcut=kcut, hull_area=hull, sup_samples=len(points), bounds=bounds
        )

    def area_moments(self, config: RunConfig) -> list[list[complex]]:
        """``a_kℓ`` from ``config.cloud_moments`` if given, else estimated from the measure up to ``d``."""
        if config.cloud_moments is not None:
            try:
                parsed = CloudMomentsOutput.model_validate_json(read_bytes(self.resolve(config.cloud_moments)))
            except ValidationError as e:
                first = e.errors()[0]
                raise ParseError(first["msg"], field=".".join(str(p) for p in first["loc"])) from None
            if not parsed.a:
                raise ParseError("cloud-moment file has no 'a' table", field="a")
            return parsed.a
        estimated = self.cloud_moments(config.model_copy(update={"dmax": config.d}))
        return estimated.a

    def reconstruct_domain(self, config: RunConfig) -> tuple[exptransform.ReconstructedDomain, ReconstructionOutput]:
        a = self.area_moments(config)
        policy = self.policy_for(config)
        b = exptransform.series_to_b(a, config.d, policy)
        test = exptransform.qd_rank_test(b, config.tol)
        domain = exptransform.pade_reconstruct(b, config.d, config.tol)
        again = exptransform.rational_b(domain, config.d)
        with policy.workprec():
            defect = max(
                abs(again.b[m][n] - b.b[m][n]) for m in range(config.d + 1) for n in range(config.d + 1)
            )
        series_defect = None
        radius = self.support_radius(config)
        if radius is not None:
            check = max(2 * radius, 1.0)
            value = self.series_value(config, a, check, check)
            with policy.workprec():
                series_defect = float(abs(value - domain.transform(check, check)))
        output = ReconstructionOutput(
            d=config.d,
            P=[complex(c) for c in domain.P],
            Q=[[complex(c) for c in row] for row in domain.Q],
            det_b=test.determinant,
            singular_values=test.singular_values,
            rank=test.numerical_rank,
            is_quadrature=test.is_quadrature,
            nodes=domain.nodes(),
            reexpansion_defect=float(defect),
            series_defect=series_defect,
        )
        return domain, output

    def reconstruct(self, config: RunConfig) -> ReconstructionOutput:
        return self.reconstruct_domain(config)[1]

    def _grid(self, config: RunConfig) -> list[complex]:
        xs = np.linspace(config.xmin, config.xmax, config.resolution)
        ys = np.linspace(config.ymin, config.ymax, config.resolution)
        return [complex(x, y) for y in ys for x in xs]

    def kernel_grid(self, config: RunConfig) -> list[GridRow]:
        """``(x, y, K_n(z, z))`` on a rectangular grid, ``n = nmax``."""
        n_max = config.hessenberg_columns
        basis = self._basis(self.table(config), n_max)
        rows = []
        for z in self._grid(config):
            value = cd_kernel(basis, n_max, z, z)
            rows.append((z.real, z.imag, float(mp.re(value))))
        return rows

    def boundary_grid(self, config: RunConfig) -> list[GridRow]:
        """``(x, y, |P(z)|² - Re Q(z, z))`` on a rectangular grid."""
        domain, _ = self.reconstruct_domain(config)
        return [(z.real, z.imag, exptransform.boundary_residual(domain, z)) for z in self._grid(config)]
