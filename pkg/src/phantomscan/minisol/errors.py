"""Diagnostics for the contract language frontend.

The local SyntaxError deliberately shadows the builtin inside this
package: callers interact with it as `minisol.SyntaxError` and get
positioned, expectation-carrying messages.
"""

from __future__ import annotations

import builtins


class SyntaxError(builtins.Exception):
    def __init__(self, line: int, col: int, expected: str, found: str | None = None):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"{line}:{col}: expected {expected}"
        if found:
            msg += f", found {found}"
        super().__init__(msg)


class ResolutionError(builtins.Exception):
    def __init__(self, line: int, col: int, message: str):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")
