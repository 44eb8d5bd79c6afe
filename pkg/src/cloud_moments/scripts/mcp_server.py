import argparse
import os
import sys

try:
    from cloud_moments.mcp import make_mcp_server
except ImportError:
    print(
        "Error: cloud_moments package not found. If you executed this script directly, "
        "please use `python -m cloud_moments.scripts.mcp_server` with src/ on the path.",
        file=sys.stderr,
    )
    sys.exit(1)


def main():
    """Start the MCP server."""
    parser = argparse.ArgumentParser(
        description="Serve the cloud-moment tools for the measures and moment files in a workspace directory."
    )
    parser.add_argument("workspace_path", help="Directory holding measure specs and moment tables.")
    parser.add_argument("--port", type=int, default=3000)
    args = parser.parse_args()

    if not os.path.isdir(args.workspace_path):
        print(f"Error: The provided path '{args.workspace_path}' is not a valid directory.", file=sys.stderr)
        sys.exit(1)

    workspace_path = os.path.abspath(args.workspace_path)
    workspace_name = os.path.basename(workspace_path)
    mcp_server = make_mcp_server(name=f"cloud-moments-{workspace_name}", workspace_path=workspace_path)

    print(f"Starting MCP server for '{workspace_name}' on http://localhost:{args.port}/mcp/", file=sys.stderr)
    mcp_server.run(transport="http", port=args.port)


if __name__ == "__main__":
    main()
