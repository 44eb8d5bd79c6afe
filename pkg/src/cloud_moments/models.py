from typing import Annotated, Any, Literal

from pydantic import BaseModel, BeforeValidator, Field, PlainSerializer, model_validator

from .moment_core import ValidationReport


def _parse_complex(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("complex values are [re, im] pairs")
        re, im = value
        if isinstance(re, str):
            re = float.fromhex(re)
        if isinstance(im, str):
            im = float.fromhex(im)
        return complex(float(re), float(im))
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return complex(float(value["re"]), float(value["im"]))
    return value


ComplexValue = Annotated[
    complex,
    BeforeValidator(_parse_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list[float]),
]


class MomentTableOutput(BaseModel):
    """A moment table in file format, plus where it was written."""

    degree: int = 0
    mass_unit: str = "raw"
    entries: list[list[ComplexValue]] = []
    out_path: str | None = None
    error: str | None = None


class OrthopolyOutput(BaseModel):
    n_max: int = 0
    gamma: list[float] = []
    coefficients: list[list[ComplexValue]] = []
    gram_residual: float = 0.0
    error: str | None = None


class HessenbergOutput(BaseModel):
    n_cols: int = 0
    kcut: int = 0
    h: list[list[ComplexValue]] = []
    band_defect: float = 0.0
    s: list[float] = []
    area_estimates: list[float] = []
    kcut_increment: float = 0.0
    kappa: list[float] = []
    numerical_rank: int = 0
    error: str | None = None


class CloudMomentBound(BaseModel):
    p: int
    q: int
    bound: float


class CloudMomentsOutput(BaseModel):
    n: int = 0
    N: int = 0
    dmax: int = 0
    kcut: int = 0
    hull_area: float | None = None
    c: list[list[ComplexValue]] = []
    a: list[list[ComplexValue]] = []
    error_bounds: list[CloudMomentBound] = []
    error: str | None = None


class ReconstructionOutput(BaseModel):
    d: int = 0
    P: list[ComplexValue] = []
    Q: list[list[ComplexValue]] = []
    det_b: ComplexValue = 0j
    singular_values: list[float] = []
    rank: int = 0
    is_quadrature: bool = False
    nodes: list[ComplexValue] = []
    reexpansion_defect: float = 0.0
    series_defect: float | None = None
    error: str | None = None


class ValidationOutput(BaseModel):
    report: ValidationReport | None = None
    error: str | None = None


class ErrorBoundOutput(BaseModel):
    n: int = 0
    N: int = 0
    kcut: int = 0
    hull_area: float = 0.0
    sup_samples: int = 0
    bounds: list[CloudMomentBound] = []
    error: str | None = None


Command = Literal[
    "gen-moments",
    "validate",
    "orthopoly",
    "hessenberg",
    "cloud-moments",
    "error-bound",
    "reconstruct",
    "kernel-grid",
    "boundary-grid",
]

DEFAULT_TABLE_DEGREE = 20
DEFAULT_NMAX = 10
DEFAULT_HESSENBERG_COLUMNS = 20


class RunConfig(BaseModel):
    """Validated arguments of one pipeline run.

    Cloud-moment runs need ``n < N`` and a table of degree at least
    ``N + dmax + 1``; when ``degree`` is omitted the smallest such degree is used.
    """

    command: Command
    measure: str | dict[str, Any] | None = None
    moments: str | None = None
    cloud_moments: str | None = None
    degree: int | None = Field(default=None, ge=0)
    dmax: int = Field(default=2, ge=0)
    n: int = Field(default=8, ge=0)
    N: int = Field(default=20, ge=1)
    nmax: int | None = Field(default=None, ge=0)
    kcut: int | None = Field(default=None, ge=0)
    prec: int | None = Field(default=None, ge=53)
    tol: float = Field(default=1e-10, gt=0)
    d: int = Field(default=1, ge=1)
    samples: int = Field(default=400, ge=1)
    out: str | None = None
    hex_floats: bool = False
    xmin: float = -2.0
    xmax: float = 2.0
    ymin: float = -2.0
    ymax: float = 2.0
    resolution: int = Field(default=41, ge=2)

    @model_validator(mode="after")
    def _check_degrees(self) -> "RunConfig":
        if self.command in ("cloud-moments", "error-bound"):
            if self.n >= self.N:
                raise ValueError(f"need n < N, got n={self.n}, N={self.N}")
            if self.kcut is not None and self.kcut < self.N:
                raise ValueError(f"kcut must be at least N={self.N}, got {self.kcut}")
            if self.degree is not None and self.N > self.degree - self.dmax - 1:
                raise ValueError(
                    f"N={self.N} needs a table of degree {self.N + self.dmax + 1}, got {self.degree}"
                )
        if self.command == "reconstruct" and self.cloud_moments is None and self.n >= self.N:
            raise ValueError(f"need n < N, got n={self.n}, N={self.N}")
        if self.xmin >= self.xmax or self.ymin >= self.ymax:
            raise ValueError("grid bounds must satisfy xmin < xmax and ymin < ymax")
        return self

    @property
    def hessenberg_columns(self) -> int:
        """Largest orthonormal-polynomial degree the run touches."""
        match self.command:
            case "cloud-moments" | "error-bound" | "reconstruct":
                return max(self.N, self.kcut or 0)
            case "hessenberg":
                return max(self.nmax if self.nmax is not None else DEFAULT_HESSENBERG_COLUMNS, self.kcut or 0)
            case _:
                return self.nmax if self.nmax is not None else DEFAULT_NMAX

    @property
    def table_degree(self) -> int:
        if self.degree is not None:
            return self.degree
        match self.command:
            case "cloud-moments" | "error-bound":
                return max(self.N + self.dmax + 1, self.hessenberg_columns + 1)
            case "reconstruct":
                return max(self.N + self.d + 1, self.hessenberg_columns + 1)
            case "hessenberg":
                return self.hessenberg_columns + 1
            case "orthopoly" | "kernel-grid":
                return self.hessenberg_columns
            case _:
                return DEFAULT_TABLE_DEGREE
