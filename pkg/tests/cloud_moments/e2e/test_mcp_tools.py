import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

import pytest

from cloud_moments.mcp import make_mcp_server

# FastMCP imports – the public API is stable across v2.x
from fastmcp import Client

# Shared test helpers
from tests.cloud_moments.helpers import copy_fixtures, remove_readonly

pytestmark = pytest.mark.asyncio

# ---------------------------------------------------------------------------
# Pytest fixtures
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def temp_workspace():
    """A workspace holding the shipped fixtures and a cloud-moment file of the disk |z - 1/2| <= 1."""
    test_dir = tempfile.mkdtemp()
    copy_fixtures(test_dir)
    a = [[math.pi, math.pi / 2], [math.pi / 2, 0.75 * math.pi]]
    Path(test_dir, "cloud.json").write_text(json.dumps({"a": [[[x, 0.0] for x in row] for row in a]}))
    yield test_dir
    if sys.version_info >= (3, 12):
        shutil.rmtree(test_dir, onexc=remove_readonly)
    else:
        shutil.rmtree(test_dir, onerror=remove_readonly)


@pytest.fixture(scope="module")
def mcp_server(temp_workspace):
    """Return an in-process FastMCP server bound to the temporary workspace."""
    return make_mcp_server(name="test-mcp-server", workspace_path=temp_workspace)


# ---------------------------------------------------------------------------
# Moment tables
# ---------------------------------------------------------------------------


async def test_generate_moments_inline_measure(mcp_server, temp_workspace):
    async with Client(mcp_server) as client:
        resp = await client.call_tool(
            "generate_moments",
            {"measure": {"kind": "disk", "radius": 1.0}, "degree": 3, "out_path": "out/disk3.json", "prec": 128},
        )

    result = resp.structured_content
    assert result["error"] is None
    assert result["degree"] == 3
    assert result["mass_unit"] == "lebesgue"
    assert result["entries"][0][0] == pytest.approx([math.pi, 0.0])
    assert result["entries"][1][0] == pytest.approx([0.0, 0.0])
    assert Path(result["out_path"]) == Path(temp_workspace).resolve() / "out" / "disk3.json"
    assert (Path(temp_workspace) / "out" / "disk3.json").is_file()


async def test_validate_moments(mcp_server):
    async with Client(mcp_server) as client:
        resp = await client.call_tool("validate_moments", {"moments_path": "disk_d6.json"})

    report = resp.structured_content["report"]
    assert report["valid"] is True
    assert report["degree"] == 6


async def test_paths_outside_workspace_are_refused(mcp_server):
    async with Client(mcp_server) as client:
        resp = await client.call_tool("validate_moments", {"moments_path": "../outside.json"})

    assert resp.structured_content["report"] is None
    assert resp.structured_content["error"].startswith("InvalidArgumentError")


# ---------------------------------------------------------------------------
# Hessenberg matrix and cloud moments
# ---------------------------------------------------------------------------


async def test_hessenberg_summary_of_disk(mcp_server):
    async with Client(mcp_server) as client:
        resp = await client.call_tool("hessenberg_summary", {"measure": "disk.json", "nmax": 6, "prec": 128})

    result = resp.structured_content
    assert result["error"] is None
    assert result["n_cols"] == 6
    assert result["h"][1][0] == pytest.approx([math.sqrt(0.5), 0.0])
    assert result["s"][0] == pytest.approx(0.5)
    assert result["area_estimates"][0] == pytest.approx(math.pi / 2)
    for j, area in enumerate(result["area_estimates"]):
        assert area == pytest.approx(math.pi * sum(result["s"][: j + 1]))
    assert result["area_estimates"][-1] == pytest.approx(math.pi * (1 - 1 / (len(result["s"]) + 1)))


async def test_estimate_cloud_moments_of_disk(mcp_server):
    async with Client(mcp_server) as client:
        resp = await client.call_tool(
            "estimate_cloud_moments", {"measure": "disk.json", "dmax": 0, "n": 8, "N": 20, "prec": 128}
        )

    result = resp.structured_content
    assert result["error"] is None
    assert result["c"][0][0] == pytest.approx([0.9, 0.0])
    (bound,) = result["error_bounds"]
    assert 0.1 <= bound["bound"] < 1


async def test_estimate_rejects_crossed_cutoffs(mcp_server):
    async with Client(mcp_server) as client:
        resp = await client.call_tool("estimate_cloud_moments", {"measure": "disk.json", "n": 20, "N": 10})

    assert resp.structured_content["error"].startswith("InvalidArgumentError")


# ---------------------------------------------------------------------------
# Reconstruction
# ---------------------------------------------------------------------------


async def test_reconstruct_from_cloud_moment_file(mcp_server):
    async with Client(mcp_server) as client:
        resp = await client.call_tool("reconstruct_domain", {"cloud_moments_path": "cloud.json", "d": 1})

    result = resp.structured_content
    assert result["error"] is None
    assert result["is_quadrature"] is True
    assert result["nodes"][0] == pytest.approx([0.5, 0.0], abs=1e-8)
    assert result["reexpansion_defect"] < 1e-10


async def test_reconstruct_needs_a_source(mcp_server):
    async with Client(mcp_server) as client:
        resp = await client.call_tool("reconstruct_domain", {"d": 1})

    assert resp.structured_content["error"].startswith("InvalidArgumentError")
