"""
Tool definitions for the lattice-multiscale stdio server.

Each tool returns a JSON-serializable dict with a ``success`` flag; engine
failures come back as ``{"success": False, "error": ...}`` payloads.
"""

import asyncio
import logging
from typing import Any, Dict, List

from mcp.types import Tool

from .errors import EngineError

logger = logging.getLogger(__name__)

# Lazy loaders keep server start-up free of the sympy import cost
_pipeline = None
_compat = None
_report = None


def _get_pipeline():
    global _pipeline
    if _pipeline is None:
        from . import pipeline as _module

        _pipeline = _module
    return _pipeline


def _get_compat():
    global _compat
    if _compat is None:
        from . import compat as _module

        _compat = _module
    return _compat


def _get_report():
    global _report
    if _report is None:
        from . import report as _module

        _report = _module
    return _report


_MODEL_PROPERTIES = {
    "model": {
        "type": "string",
        "enum": ["dnls", "al"],
        "description": "Lattice model: dnls (discrete NLS) or al (Ablowitz-Ladik)",
    },
    "order": {
        "type": "integer",
        "enum": [5, 7, 9],
        "description": "Deepest epsilon order of the reduction",
        "default": 9,
    },
    "c_sign": {
        "type": "integer",
        "enum": [1, -1],
        "description": "Branch of the linear wave speed",
        "default": 1,
    },
    "sigma": {
        "type": "integer",
        "enum": [1, -1],
        "description": "Sign of the nonlinearity (-1 has no real wave speed)",
        "default": 1,
    },
}

TOOLS_DEFINITIONS = [
    {
        "name": "reduce_model",
        "description": (
            "Run the exact multiscale reduction of a lattice NLS model. Returns the potential "
            "KdV coefficient a, hierarchy multipliers b_j and the forcing of the deepest stage "
            "as rational functions of the lattice spacing h."
        ),
        "inputSchema": {
            "type": "object",
            "properties": {
                **_MODEL_PROPERTIES,
                "format": {
                    "type": "string",
                    "enum": ["json", "text"],
                    "default": "json",
                    "description": "json report or text rendering",
                },
            },
            "required": ["model"],
        },
    },
    {
        "name": "integrability_verdict",
        "description": (
            "Reduce a model and solve the eps^7 and eps^9 compatibility conditions. "
            "OBSTRUCTED means a necessary condition for integrability fails."
        ),
        "inputSchema": {
            "type": "object",
            "properties": {
                **_MODEL_PROPERTIES,
                "include_linear": {
                    "type": "boolean",
                    "default": False,
                    "description": "Let the forcing ansatz use linear monomials",
                },
                "show_conditions": {
                    "type": "boolean",
                    "default": False,
                    "description": "Include the symbolic conditions of every stage",
                },
            },
            "required": ["model"],
        },
    },
    {
        "name": "graded_dimension",
        "description": "Dimension and optionally the monomial basis of the graded space P_n^(r).",
        "inputSchema": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 2, "description": "Total degree"},
                "r": {"type": "integer", "minimum": 1, "default": 1, "description": "Max level"},
                "nonlinear": {"type": "boolean", "default": False},
                "list_basis": {"type": "boolean", "default": False},
            },
            "required": ["n"],
        },
    },
    {
        "name": "render_flow",
        "description": (
            "Render the KdV hierarchy flow K_j. With a given, uses K_2 = a D^3 phi + "
            "gamma (D phi)^2; otherwise the flow fixed by reducing the model."
        ),
        "inputSchema": {
            "type": "object",
            "properties": {
                "j": {"type": "integer", "enum": [2, 3, 4]},
                "model": _MODEL_PROPERTIES["model"],
                "c_sign": _MODEL_PROPERTIES["c_sign"],
                "a": {"type": "string", "description": "Coefficient in h, e.g. '(3-h^2)/24'"},
                "gamma": {"type": "string", "description": "Nonlinear coefficient, default -3/4"},
                "b": {"type": "string", "description": "Multiplier b_j, default 1 (b_2 = a)"},
            },
            "required": ["j"],
        },
    },
    {
        "name": "selfcheck",
        "description": "Run the exact oracle suite (Frechet derivatives, flow commutation, "
        "graded dimensions, Madelung forms).",
        "inputSchema": {
            "type": "object",
            "properties": {
                "seed": {"type": "integer", "default": 0},
                "trials": {"type": "integer", "minimum": 1, "default": 20},
            },
        },
    },
]


def tool_models() -> List[Tool]:
    """TOOLS_DEFINITIONS validated against the MCP Tool schema."""
    return [Tool.model_validate(definition) for definition in TOOLS_DEFINITIONS]


async def call_tool(name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
    """
    Route tool calls to the appropriate handler.

    Args:
        name: Tool name
        arguments: Tool arguments

    Returns:
        Tool result dictionary
    """
    try:
        if name == "reduce_model":
            return await reduce_model(arguments)
        elif name == "integrability_verdict":
            return await integrability_verdict(arguments)
        elif name == "graded_dimension":
            return await graded_dimension(arguments)
        elif name == "render_flow":
            return await render_flow(arguments)
        elif name == "selfcheck":
            return await selfcheck(arguments)
        else:
            return {"success": False, "error": f"Unknown tool: {name}"}
    except EngineError as e:
        logger.error(f"Tool {name} failed: {type(e).__name__}: {e}", exc_info=True)
        return {"success": False, "error": f"{type(e).__name__}: {e}", "tool": name}
    except (ValueError, KeyError, TypeError) as e:
        logger.error(f"Tool {name} rejected its arguments: {e}")
        return {"success": False, "error": f"Invalid arguments: {e}", "tool": name}


def _params(arguments: Dict[str, Any]):
    from .coeff import SignParams

    return SignParams(
        sigma=int(arguments.get("sigma", 1)), c_sign=int(arguments.get("c_sign", 1))
    )


def _order(arguments: Dict[str, Any]) -> int:
    from .config import get_settings

    return int(arguments.get("order", get_settings().default_order))


async def reduce_model(arguments: Dict[str, Any]) -> Dict[str, Any]:
    """Run pipeline.reduce in a worker thread and return the report."""
    model = arguments["model"]
    order = _order(arguments)
    rs = await asyncio.to_thread(_get_pipeline().reduce, model, order, _params(arguments))
    report = _get_report()
    result = {
        "success": True,
        "tool": "reduce_model",
        "report": report.build_report(rs).model_dump(),
    }
    if arguments.get("format") == "text":
        result["text"] = report.render_text(rs)
    return result


async def integrability_verdict(arguments: Dict[str, Any]) -> Dict[str, Any]:
    """Run compat.verdict and summarize the stage chain."""
    compat = _get_compat()
    outcome = await asyncio.to_thread(
        compat.verdict,
        arguments["model"],
        _order(arguments),
        _params(arguments),
        bool(arguments.get("include_linear", False)),
    )
    stages = []
    for stage in outcome.reports:
        entry = {
            "stage": stage.stage,
            "n_unknowns": stage.n_unknowns,
            "n_equations": stage.n_equations,
            "rank": stage.rank,
            "raw_conditions": stage.raw_conditions,
            "independent_conditions": stage.independent_conditions,
            "free_forcing": stage.free_forcing,
            "n_forcing": stage.n_forcing,
            "satisfied": stage.satisfied,
        }
        if arguments.get("show_conditions"):
            entry["conditions"] = stage.render_conditions()
        stages.append(entry)
    return {
        "success": True,
        "tool": "integrability_verdict",
        "verdict": outcome.verdict.value,
        "stages": stages,
        "report": _get_report().build_report(outcome.reduced, outcome).model_dump(),
    }


async def graded_dimension(arguments: Dict[str, Any]) -> Dict[str, Any]:
    from .graded import basis

    n = int(arguments["n"])
    r = int(arguments.get("r", 1))
    nonlinear = bool(arguments.get("nonlinear", False))
    space = basis(n, r, nonlinear)
    result = {
        "success": True,
        "tool": "graded_dimension",
        "n": n,
        "r": r,
        "nonlinear": nonlinear,
        "dimension": len(space),
    }
    if arguments.get("list_basis"):
        result["basis"] = list(space.labels())
    return result


async def render_flow(arguments: Dict[str, Any]) -> Dict[str, Any]:
    from . import coeff, kdv

    j = int(arguments["j"])
    if j not in (2, 3, 4):
        raise ValueError(f"j must be 2, 3 or 4, got {j}")
    if arguments.get("a") is not None:
        a = coeff.parse(str(arguments["a"]))
        gamma = coeff.parse(str(arguments["gamma"])) if "gamma" in arguments else kdv.DEFAULT_GAMMA
        b = coeff.parse(str(arguments["b"])) if "b" in arguments else (a if j == 2 else coeff.ONE)
        value = kdv.flow(j, b, a, gamma)
        source = "explicit"
    else:
        model = arguments.get("model", "dnls")
        rs = await asyncio.to_thread(
            _get_pipeline().reduce, model, 2 * j + 1, _params(arguments)
        )
        value = rs.flow(j)
        source = rs.model
    return {
        "success": True,
        "tool": "render_flow",
        "j": j,
        "source": source,
        "flow": value.render(),
        "monomials": len(value),
    }


async def selfcheck(arguments: Dict[str, Any]) -> Dict[str, Any]:
    from .oracle import run_selfcheck

    result = await asyncio.to_thread(
        run_selfcheck, int(arguments.get("seed", 0)), int(arguments.get("trials", 20))
    )
    return {
        "success": result.passed,
        "tool": "selfcheck",
        "seed": result.seed,
        "trials": result.trials,
        "checks": {name: ok for name, ok in result.checks},
    }
