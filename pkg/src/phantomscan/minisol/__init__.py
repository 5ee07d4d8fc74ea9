"""Frontend for the restricted contract language."""

from .. import _keccak
from . import ast
from .errors import ResolutionError, SyntaxError
from .parser import load, parse

to_source = ast.to_source


def summarize(contract: ast.Contract) -> dict:
    """Plain-data digest of a contract: events with their log topics,
    state layout, and per-function behavior counts."""

    def walk(stmts):
        for s in stmts:
            yield s
            if isinstance(s, ast.If):
                yield from walk(s.then)
                yield from walk(s.orelse)

    functions = []
    for fn in contract.functions:
        stmts = list(walk(fn.body))
        functions.append({
            "name": fn.name,
            "visibility": fn.visibility,
            "params": [{"type": p.type, "name": p.name} for p in fn.params],
            "emits": sorted({s.event for s in stmts if isinstance(s, ast.Emit)}),
            "writes": sorted({s.target for s in stmts
                              if isinstance(s, (ast.Assign, ast.MapWrite))
                              and contract.state_var(s.target)}),
            "external_calls": sum(isinstance(s, ast.CallStmt) for s in stmts),
            "requires": sum(isinstance(s, ast.Require) for s in stmts),
        })

    return {
        "contract": contract.name,
        "events": [{
            "name": e.name,
            "signature": e.signature,
            "topic0": _keccak.event_topic(e.signature),
            "params": [{"type": p.type, "name": p.name, "indexed": p.indexed}
                       for p in e.params],
        } for e in contract.events],
        "state": [{
            "name": s.name,
            "type": f"mapping({s.key_type} => {s.type})" if s.is_mapping else s.type,
        } for s in contract.state],
        "functions": functions,
    }


__all__ = [
    "ast", "parse", "load", "to_source", "summarize",
    "SyntaxError", "ResolutionError",
]
