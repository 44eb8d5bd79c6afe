from typing import Any, Callable, TypeVar

from fastmcp import Context, FastMCP
from pydantic import BaseModel

from .errors import CloudMomentsError
from .lib.fastmcp_progress_keepalive import run_blocking
from .models import (
    CloudMomentsOutput,
    HessenbergOutput,
    MomentTableOutput,
    ReconstructionOutput,
    ValidationOutput,
)
from .workspace import Workspace, run_config

Output = TypeVar("Output", bound=BaseModel)

MeasureArg = str | dict[str, Any]


async def _guarded(ctx: Context, output: type[Output], fn: Callable[[], Output]) -> Output:
    """Run ``fn`` off the event loop; library errors come back in the ``error`` field."""
    try:
        return await run_blocking(ctx, fn)
    except CloudMomentsError as e:
        return output(error=f"{type(e).__name__}: {e}")


def make_mcp_server(name: str, workspace_path: str) -> FastMCP:
    """
    Build an MCP server whose tools run the cloud-moment pipelines on measures under workspace_path.
    """
    mcp = FastMCP(name=name, instructions="""
                  Tools for complex moment tables of planar measures: generate and validate moments,
                  inspect the Hessenberg matrix, estimate the area moments of the measure's cloud,
                  and reconstruct a quadrature domain from those moments.
                  Measures are inline JSON objects with a "kind" field, or paths of JSON files in the workspace.
                  All tools send progress pings while they compute.
                  """)
    workspace = Workspace(workspace_path, confined=True)

    @mcp.tool(
        description="Generate the complex moment table m[j][k] of a measure up to the given degree.",
    )
    async def generate_moments(
        ctx: Context, measure: MeasureArg, degree: int = 20, out_path: str | None = None, prec: int | None = None
    ) -> MomentTableOutput:
        """Entries are [re, im] pairs. With out_path the table file is also written inside the workspace."""

        def compute() -> MomentTableOutput:
            config = run_config(command="gen-moments", measure=measure, degree=degree, out=out_path, prec=prec)
            return workspace.gen_moments(config)

        return await _guarded(ctx, MomentTableOutput, compute)

    @mcp.tool(
        description="Check that a moment table file is Hermitian and positive semidefinite.",
    )
    async def validate_moments(ctx: Context, moments_path: str, prec: int | None = None) -> ValidationOutput:
        def compute() -> ValidationOutput:
            config = run_config(command="validate", moments=moments_path, prec=prec)
            return workspace.validate(config)

        return await _guarded(ctx, ValidationOutput, compute)

    @mcp.tool
    async def hessenberg_summary(
        ctx: Context, measure: MeasureArg, nmax: int = 20, kcut: int | None = None, prec: int | None = None
    ) -> HessenbergOutput:
        """Hessenberg matrix of multiplication by z, the s_j sequence, area estimates and Hankel singular values.

        The result schema::

            {
                "n_cols": 20,
                "kcut": 20,
                "h": [[[re, im], ...], ...],
                "s": [...],
                "area_estimates": [...],
                "kappa": [...],
                "numerical_rank": 3,
                "error": null
            }
        """

        def compute() -> HessenbergOutput:
            config = run_config(command="hessenberg", measure=measure, nmax=nmax, kcut=kcut, prec=prec)
            return workspace.hessenberg(config)

        return await _guarded(ctx, HessenbergOutput, compute)

    @mcp.tool(
        description="""Estimate the moments c_pq = (1/π)∫ z^p z̄^q dA of the cloud of a measure for p, q <= dmax.

Outlier components (atoms, curves, far-away pieces of small area) are discarded by the estimator;
error bounds are reported for each (p, q). Requires n < N.
""",
    )
    async def estimate_cloud_moments(
        ctx: Context,
        measure: MeasureArg,
        dmax: int = 2,
        n: int = 8,
        N: int = 20,
        kcut: int | None = None,
        prec: int | None = None,
    ) -> CloudMomentsOutput:
        def compute() -> CloudMomentsOutput:
            config = run_config(
                command="cloud-moments", measure=measure, dmax=dmax, n=n, N=N, kcut=kcut, prec=prec
            )
            return workspace.cloud_moments(config)

        return await _guarded(ctx, CloudMomentsOutput, compute)

    @mcp.tool(
        description="Reconstruct a quadrature domain of order d (nodes and algebraic boundary) from cloud moments.",
    )
    async def reconstruct_domain(
        ctx: Context,
        measure: MeasureArg | None = None,
        cloud_moments_path: str | None = None,
        d: int = 1,
        tol: float = 1e-10,
        n: int = 24,
        N: int = 50,
        prec: int | None = None,
    ) -> ReconstructionOutput:
        """Uses the cloud-moment file when given, otherwise estimates the moments from the measure."""

        def compute() -> ReconstructionOutput:
            config = run_config(
                command="reconstruct",
                measure=measure,
                cloud_moments=cloud_moments_path,
                d=d,
                tol=tol,
                n=n,
                N=N,
                prec=prec,
            )
            return workspace.reconstruct(config)

        return await _guarded(ctx, ReconstructionOutput, compute)

    return mcp
