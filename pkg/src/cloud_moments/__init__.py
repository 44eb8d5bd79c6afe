from .mcp import make_mcp_server
from .moment_core import ComplexMomentTable, PrecisionPolicy
from .workspace import Workspace

__all__ = ["make_mcp_server", "ComplexMomentTable", "PrecisionPolicy", "Workspace"]
