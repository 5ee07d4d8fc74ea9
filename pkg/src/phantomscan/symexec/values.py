"""Symbolic value terms produced by executing contract paths.

Terms are immutable and compare structurally.  `tag` lets two runs of
the same function coexist in one constraint system: renaming appends
the tag to every atomic symbol, so `amount@1` and `amount@2` stay
distinct while couplings tie them together where needed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

UINT_MAX = 2**256 - 1
ADDRESS_MAX = 2**160 - 1

SORT_BOUNDS = {
    "uint": (0, UINT_MAX),
    "address": (0, ADDRESS_MAX),
    "bytes": (0, UINT_MAX),  # opaque blobs, compared only for identity
    "bool": (0, 1),
}

_TYPE_TO_SORT = {
    "uint256": "uint",
    "address": "address",
    "bool": "bool",
    "bytes": "bytes",
}


def sort_of_type(type_name: str) -> str:
    return _TYPE_TO_SORT[type_name]


@dataclass(frozen=True)
class SymValue:
    pass


@dataclass(frozen=True)
class Literal(SymValue):
    value: int
    sort: str = "uint"

    def __str__(self):
        if self.sort == "bool":
            return "true" if self.value else "false"
        if self.sort == "address":
            return f"address({self.value})"
        return str(self.value)


@dataclass(frozen=True)
class FreeVar(SymValue):
    name: str
    sort: str = "uint"
    tag: str = ""

    def __str__(self):
        return self.name + self.tag


@dataclass(frozen=True)
class CallerSym(SymValue):
    tag: str = ""
    sort: str = "address"

    def __str__(self):
        return "msg.sender" + self.tag


@dataclass(frozen=True)
class ValueSym(SymValue):
    tag: str = ""
    sort: str = "uint"

    def __str__(self):
        return "msg.value" + self.tag


@dataclass(frozen=True)
class CallSuccessSym(SymValue):
    """Result of an unconstrained external call."""

    site: str
    tag: str = ""
    sort: str = "bool"

    def __str__(self):
        return f"call({self.site})" + self.tag


@dataclass(frozen=True)
class StorageSym(SymValue):
    """Contents of a storage slot before the path wrote to it."""

    var: str
    key: SymValue | None
    version: int
    sort: str = "uint"
    tag: str = ""

    def __str__(self):
        base = self.var if self.key is None else f"{self.var}[{self.key}]"
        return f"{base}#v{self.version}{self.tag}"


@dataclass(frozen=True)
class BinOp(SymValue):
    op: str  # + - * == != < <= > >= && ||
    left: SymValue
    right: SymValue

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class NotOp(SymValue):
    operand: SymValue

    def __str__(self):
        return f"!{self.operand}"


ATOMIC = (FreeVar, CallerSym, ValueSym, CallSuccessSym, StorageSym)

CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*")
BOOL_OPS = ("&&", "||")


def sort_of(v: SymValue) -> str:
    if isinstance(v, (Literal, FreeVar, CallerSym, ValueSym,
                      CallSuccessSym, StorageSym)):
        return v.sort
    if isinstance(v, BinOp):
        if v.op in ARITH_OPS:
            return "uint"
        return "bool"
    if isinstance(v, NotOp):
        return "bool"
    raise TypeError(type(v).__name__)


def rename(v: SymValue, tag: str) -> SymValue:
    """Append `tag` to every atomic symbol in the term."""
    if isinstance(v, Literal):
        return v
    if isinstance(v, ATOMIC):
        if isinstance(v, StorageSym) and v.key is not None:
            return replace(v, tag=v.tag + tag, key=rename(v.key, tag))
        return replace(v, tag=v.tag + tag)
    if isinstance(v, BinOp):
        return BinOp(v.op, rename(v.left, tag), rename(v.right, tag))
    if isinstance(v, NotOp):
        return NotOp(rename(v.operand, tag))
    raise TypeError(type(v).__name__)


def atoms(v: SymValue) -> set[SymValue]:
    """Every atomic symbol in the term, including mapping keys."""
    if isinstance(v, Literal):
        return set()
    if isinstance(v, ATOMIC):
        out = {v}
        if isinstance(v, StorageSym) and v.key is not None:
            out |= atoms(v.key)
        return out
    if isinstance(v, BinOp):
        return atoms(v.left) | atoms(v.right)
    if isinstance(v, NotOp):
        return atoms(v.operand)
    raise TypeError(type(v).__name__)


def input_atoms(v: SymValue) -> set[SymValue]:
    """Atoms that the transaction sender controls directly: function
    arguments, the sender address, the attached value.  Storage
    contents and call results are excluded, but symbols inside mapping
    keys count."""
    found: set[SymValue] = set()
    for a in atoms(v):
        if isinstance(a, (FreeVar, CallerSym, ValueSym)):
            found.add(a)
    return found


def evaluate(v: SymValue, model: dict[SymValue, int]) -> int:
    """Concrete evaluation over the integers; bools are 0 or 1."""
    if isinstance(v, Literal):
        return v.value
    if isinstance(v, ATOMIC):
        if isinstance(v, StorageSym) and v.key is not None:
            # the slot identity is fixed by the model lookup itself
            return model.get(v, 0)
        return model.get(v, 0)
    if isinstance(v, NotOp):
        return 0 if evaluate(v.operand, model) else 1
    if isinstance(v, BinOp):
        a, b = evaluate(v.left, model), evaluate(v.right, model)
        if v.op == "+":
            return a + b
        if v.op == "-":
            return a - b
        if v.op == "*":
            return a * b
        if v.op == "==":
            return int(a == b)
        if v.op == "!=":
            return int(a != b)
        if v.op == "<":
            return int(a < b)
        if v.op == "<=":
            return int(a <= b)
        if v.op == ">":
            return int(a > b)
        if v.op == ">=":
            return int(a >= b)
        if v.op == "&&":
            return int(bool(a) and bool(b))
        if v.op == "||":
            return int(bool(a) or bool(b))
    raise TypeError(type(v).__name__)
