"""
lattice-multiscale tool server
JSON-RPC 2.0 over stdio (MCP framing), one request per line.
"""

import argparse
import asyncio
import json
import logging
import sys
from typing import Any, Dict

# Lazy imports to speed up server startup
_config_module = None
_tools_module = None


def get_config():
    global _config_module
    if _config_module is None:
        from . import config as _config

        _config_module = _config
    return _config_module


def get_tools():
    global _tools_module
    if _tools_module is None:
        from . import tools as _tools

        _tools_module = _tools
    return _tools_module


logger = logging.getLogger(__name__)

SERVER_NAME = "lattice-multiscale"
SERVER_VERSION = "0.3.0"
PROTOCOL_VERSION = "2024-11-05"


class MCPServer:
    """
    Stdio JSON-RPC server exposing the reduction engine as tools.

    Handles initialize, tools/list, tools/call and ping.
    """

    def __init__(self):
        self._settings = None

    @property
    def settings(self):
        """Lazy load settings only when accessed."""
        if self._settings is None:
            self._settings = get_config().get_settings()
            logger.setLevel(self._settings.log_level.upper())
        return self._settings

    async def handle_request(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """
        Handle one JSON-RPC 2.0 request.

        Args:
            request: Dict with 'method', 'params', 'id'

        Returns:
            JSON-RPC response dict
        """
        method = request.get("method")
        params = request.get("params") or {}
        request_id = request.get("id")

        logger.info(f"Received request: {method}")

        try:
            if method == "initialize":
                result = await self.handle_initialize(params)
            elif method == "tools/list":
                result = await self.handle_list_tools(params)
            elif method == "tools/call":
                result = await self.handle_call_tool(params)
            elif method == "ping":
                result = {"status": "ok"}
            else:
                return self._error_response(request_id, -32601, f"Method not found: {method}")

            return {
                "jsonrpc": "2.0",
                "id": request_id if request_id is not None else 0,
                "result": result,
            }

        except Exception as e:
            logger.error(f"Error handling request: {e}", exc_info=True)
            return self._error_response(request_id, -32603, f"Internal error: {e}")

    async def handle_initialize(self, params: Dict[str, Any]) -> Dict[str, Any]:
        logger.info("Initializing tool server")
        return {
            "protocolVersion": PROTOCOL_VERSION,
            "serverInfo": {"name": SERVER_NAME, "version": SERVER_VERSION},
            "capabilities": {"tools": {}},
        }

    async def handle_list_tools(self, params: Dict[str, Any]) -> Dict[str, Any]:
        models = get_tools().tool_models()
        logger.info(f"Listing {len(models)} available tools")
        tools = [m.model_dump(mode="json", by_alias=True, exclude_none=True) for m in models]
        return {"tools": tools}

    async def handle_call_tool(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        Execute a tool.

        Args:
            params: Must contain 'name' and may contain 'arguments'

        Returns:
            Dict with a 'content' array holding the JSON result as text
        """
        tool_name = params.get("name")
        arguments = params.get("arguments") or {}
        logger.info(f"Tool call: {tool_name}")

        result = await get_tools().call_tool(tool_name, arguments)
        result_json = json.dumps(result, indent=2)

        limit = self.settings.max_response_bytes
        if len(result_json) > limit:
            logger.warning(
                f"Response too large ({len(result_json)} bytes), summarizing for tool: {tool_name}"
            )
            truncated = {
                "success": result.get("success", False),
                "truncated": True,
                "original_size_bytes": len(result_json),
                "message": f"Response exceeded {limit / 1000:.0f}KB limit; summary only.",
                "tool": tool_name,
                "summary": self._create_summary(result),
            }
            result_json = json.dumps(truncated, indent=2)

        response = {"content": [{"type": "text", "text": result_json}]}
        if not result.get("success", False):
            response["isError"] = True
        return response

    def _create_summary(self, result: Dict[str, Any]) -> Dict[str, Any]:
        """Keep the scalar fields of a large result and drop polynomial bodies."""
        summary = {"success": result.get("success"), "tool": result.get("tool")}
        for key in ("verdict", "dimension", "j", "monomials", "source", "error"):
            if key in result:
                summary[key] = result[key]
        if "stages" in result:
            summary["stages"] = [
                {k: v for k, v in stage.items() if k != "conditions"} for stage in result["stages"]
            ]
        if "report" in result:
            report = result["report"]
            summary["a"] = report.get("a")
            summary["forcing_monomials"] = len(report.get("forcing", []))
        if "flow" in result:
            summary["flow_truncated"] = "Flow text omitted (too large)"
        return summary

    def _error_response(self, request_id: Any, code: int, message: str) -> Dict[str, Any]:
        return {
            "jsonrpc": "2.0",
            "id": request_id if request_id is not None else 0,
            "error": {"code": code, "message": message},
        }

    async def run(self):
        """Read requests from stdin and write one response line per request to stdout."""
        logger.info(f"{SERVER_NAME} tool server starting (log level {self.settings.log_level})")

        while True:
            try:
                line = await asyncio.get_event_loop().run_in_executor(None, sys.stdin.readline)

                if not line:
                    logger.info("EOF received, shutting down")
                    break

                line = line.strip()
                if not line:
                    continue

                try:
                    request = json.loads(line)
                except json.JSONDecodeError as e:
                    logger.error(f"Invalid JSON: {e}")
                    print(json.dumps(self._error_response(None, -32700, "Parse error")), flush=True)
                    continue

                response = await self.handle_request(request)
                print(json.dumps(response), flush=True)

            except KeyboardInterrupt:
                logger.info("Interrupted, shutting down")
                break
            except Exception as e:
                logger.error(f"Unexpected error: {e}", exc_info=True)
                continue


def main():
    """Entry point for the stdio tool server."""
    parser = argparse.ArgumentParser(
        description="lattice-multiscale tool server - exact multiscale reductions over stdio"
    )
    parser.add_argument("--log-level", default=None, help="Logging level on stderr")
    args = parser.parse_args()

    level = (args.log_level or get_config().get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    server = MCPServer()
    asyncio.run(server.run())


if __name__ == "__main__":
    main()
