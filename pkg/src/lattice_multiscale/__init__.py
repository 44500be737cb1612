"""
lattice-multiscale
Exact multiscale reduction of lattice NLS models and KdV-hierarchy integrability tests
"""

__version__ = "0.3.0"

_LAZY = {
    "reduce": ".pipeline",
    "ReducedSystem": ".pipeline",
    "verdict": ".compat",
    "Verdict": ".compat",
    "ObstructionReport": ".compat",
    "check_eps7": ".compat",
    "check_eps9": ".compat",
    "DiffPoly": ".diffalg",
    "SignParams": ".coeff",
    "madelung": ".models",
    "basis": ".graded",
    "dim": ".graded",
    "run_selfcheck": ".oracle",
    "MCPServer": ".server",
    "TOOLS_DEFINITIONS": ".tools",
    "call_tool": ".tools",
}


# Lazy imports keep `import lattice_multiscale` cheap; sympy loads on first use
def __getattr__(name):
    if name in _LAZY:
        from importlib import import_module

        value = getattr(import_module(_LAZY[name], __name__), name)
        globals()[name] = value
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = list(_LAZY)
