"""Function recovery over the block graph, plus the ICFG container.

Public functions are found by walking the selector dispatcher from
offset 0 (PUSHn selector; EQ; PUSH dest; JUMPI per branch).  Internal
helpers are found via the push-return-address pattern: a JUMP whose
block leaves a constant JUMPDEST offset on the stack, where the jump
target's region hands control back to that offset through a
caller-supplied (extern-slot) jump.  Blocks reachable from more than
one entry are owned by each function separately, so path enumeration
never leaks between functions; a LOG-bearing helper stays a single
separate unit connected by call edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..evm.disasm import Bytecode
from .blocks import BasicBlock, build_blocks, exit_slot, resolve_jumps
from .tac import LiftedBlock, TacInstruction, _VarSource, lift_block

_DISPATCH_WALK_LIMIT = 64
_CALLEE_SCAN_LIMIT = 32


class SigDbError(ValueError):
    def __init__(self, lineno: int, reason: str) -> None:
        super().__init__(f"signature database line {lineno}: {reason}")
        self.lineno = lineno


class SigDb:
    """Flat-text signature database.

    One entry per line: an 8-hex-digit function selector or a
    64-hex-digit event topic, a space, and the textual signature.
    ``#`` comments and blank lines are ignored.
    """

    def __init__(self) -> None:
        self.selectors: dict[str, str] = {}
        self.topics: dict[str, str] = {}

    @classmethod
    def from_text(cls, text: str) -> "SigDb":
        db = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise SigDbError(lineno, "expected '<hex> <signature>'")
            key, signature = parts
            key = key.lower().removeprefix("0x")
            if "(" not in signature or not signature.endswith(")"):
                raise SigDbError(lineno, f"malformed signature {signature!r}")
            try:
                int(key, 16)
            except ValueError:
                raise SigDbError(lineno, f"bad hex key {parts[0]!r}") from None
            if len(key) == 8:
                db.selectors[key] = signature
            elif len(key) == 64:
                db.topics[key] = signature
            else:
                raise SigDbError(lineno, f"key must be 8 or 64 hex digits, got {len(key)}")
        return db

    @classmethod
    def from_file(cls, path: str | Path) -> "SigDb":
        return cls.from_text(Path(path).read_text())

    @classmethod
    def empty(cls) -> "SigDb":
        return cls()

    def selector_signature(self, selector: int) -> str | None:
        return self.selectors.get(f"{selector & 0xFFFFFFFF:08x}")

    def topic_signature(self, topic0: int) -> str | None:
        return self.topics.get(f"{topic0:064x}")

    @staticmethod
    def bare_name(signature: str) -> str:
        return signature.split("(", 1)[0]


@dataclass
class FunctionUnit:
    name: str
    entry: int
    selector: str | None = None  # "0x" + 8 hex digits
    signature: str | None = None
    is_public: bool = False
    block_offsets: set[int] = field(default_factory=set)
    succ: dict[int, list[int]] = field(default_factory=dict)
    pred: dict[int, list[int]] = field(default_factory=dict)
    # join block -> entry-stack slot -> predecessor -> source variable
    phis: dict[int, dict[int, dict[int, str]]] = field(default_factory=dict)
    lift_failed: set[int] = field(default_factory=set)

    def __repr__(self) -> str:
        return f"<fn {self.name} entry={self.entry:#x} blocks={len(self.block_offsets)}>"


@dataclass(frozen=True)
class CallEdge:
    caller: str
    call_block: int
    callee: str
    return_block: int


@dataclass
class Icfg:
    origin: str
    blocks: dict[int, BasicBlock]
    lifted: dict[int, LiftedBlock]
    functions: dict[str, FunctionUnit]
    call_edges: list[CallEdge]
    unresolved_jumps: int

    def function_of_entry(self, entry: int) -> FunctionUnit | None:
        for fn in self.functions.values():
            if fn.entry == entry:
                return fn
        return None

    def edges_into(self, callee: str) -> list[CallEdge]:
        return [e for e in self.call_edges if e.callee == callee]

    def return_edges_at(self, caller: str, block: int) -> list[CallEdge]:
        return [e for e in self.call_edges if e.caller == caller and e.return_block == block]

    def callee_exit_blocks(self, edge: CallEdge) -> list[int]:
        callee = self.functions[edge.callee]
        return sorted(
            off for off in callee.block_offsets
            if edge.return_block in self.blocks[off].successors
        )

    def to_json(self) -> str:
        doc = {
            "origin": self.origin,
            "unresolved_jumps": self.unresolved_jumps,
            "call_edges": [
                {
                    "caller": e.caller,
                    "call_block": f"{e.call_block:#x}",
                    "callee": e.callee,
                    "return_block": f"{e.return_block:#x}",
                }
                for e in sorted(self.call_edges, key=lambda e: (e.caller, e.call_block))
            ],
            "functions": {
                name: {
                    "entry": f"{fn.entry:#x}",
                    "selector": fn.selector,
                    "signature": fn.signature,
                    "public": fn.is_public,
                    "blocks": {
                        f"{off:#x}": {
                            "terminator": self.blocks[off].terminator,
                            "successors": [f"{s:#x}" for s in fn.succ.get(off, [])],
                            "unresolved": self.blocks[off].has_unresolved_jump,
                            "tac": [str(t) for t in self.lifted[off].tac],
                            "phis": {
                                str(slot): {f"{p:#x}": v for p, v in sorted(srcs.items())}
                                for slot, srcs in sorted(fn.phis.get(off, {}).items())
                            },
                        }
                        for off in sorted(fn.block_offsets)
                    },
                }
                for name, fn in sorted(self.functions.items())
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_dot(self) -> str:
        lines = ["digraph icfg {", "  node [shape=box fontname=monospace];"]
        for name, fn in sorted(self.functions.items()):
            lines.append(f'  subgraph "cluster_{name}" {{')
            lines.append(f'    label="{name}";')
            for off in sorted(fn.block_offsets):
                label = f"{off:#x}"
                lines.append(f'    "{name}:{off:#x}" [label="{label}"];')
                for s in fn.succ.get(off, []):
                    lines.append(f'    "{name}:{off:#x}" -> "{name}:{s:#x}";')
            lines.append("  }")
        for e in sorted(self.call_edges, key=lambda e: (e.caller, e.call_block)):
            lines.append(
                f'  "{e.caller}:{e.call_block:#x}" -> "{e.callee}:{self.functions[e.callee].entry:#x}"'
                ' [style=dashed label="call"];'
            )
        lines.append("}")
        return "\n".join(lines)


def _match_selector_branch(block: BasicBlock) -> int | None:
    """Return the selector constant if the block compares one and jumps."""
    if block.terminator != "JUMPI":
        return None
    push_val: int | None = None
    saw_eq_after_push = False
    for ins in block.instructions:
        if ins.operand is not None and len(ins.operand) <= 4 and ins.mnemonic.startswith("PUSH"):
            if not saw_eq_after_push:
                push_val = ins.push_value
        if ins.mnemonic == "EQ" and push_val is not None:
            saw_eq_after_push = True
    return push_val if saw_eq_after_push else None


def _walk_dispatcher(blocks: dict[int, BasicBlock]) -> tuple[list[tuple[int, int]], int]:
    """Follow the dispatch chain from offset 0.

    Returns ([(selector, entry offset)], fallback entry offset).
    """
    branches: list[tuple[int, int]] = []
    if 0 not in blocks:
        return branches, 0
    seen: set[int] = set()
    current = 0
    for _ in range(_DISPATCH_WALK_LIMIT):
        if current in seen or current not in blocks:
            break
        seen.add(current)
        block = blocks[current]
        sel = _match_selector_branch(block)
        fallthrough = [s for s in block.successors if s > current and s == block.end_offset]
        if sel is not None:
            targets = [s for s in block.successors if s != block.end_offset]
            if targets:
                branches.append((sel, targets[0]))
            if not fallthrough:
                break
            current = fallthrough[0]
        elif block.terminator in ("FALLTHROUGH", "JUMPI") and fallthrough:
            # size guards and similar preamble: keep walking the chain
            current = fallthrough[0]
        else:
            break
    return branches, current


def _find_call_edges(blocks: dict[int, BasicBlock]) -> list[tuple[int, int, int]]:
    """Detect (call block, callee entry, return block) triples."""
    edges: list[tuple[int, int, int]] = []
    for b in sorted(blocks):
        block = blocks[b]
        if block.terminator != "JUMP" or not block.successors:
            continue
        ret_consts = [v for v in block.exit_stack if isinstance(v, int) and v in blocks]
        if not ret_consts:
            continue
        for target in block.successors:
            for ret in ret_consts:
                if ret == target:
                    continue
                if _returns_to(blocks, target, ret):
                    edges.append((b, target, ret))
                    break
    return edges


def _returns_to(blocks: dict[int, BasicBlock], entry: int, ret: int) -> bool:
    """True if some block reachable from ``entry`` hands control back to
    ``ret`` through a caller-supplied jump target."""
    seen: set[int] = set()
    frontier = [entry]
    while frontier and len(seen) < _CALLEE_SCAN_LIMIT:
        off = frontier.pop()
        if off in seen or off not in blocks:
            continue
        seen.add(off)
        block = blocks[off]
        if (
            block.terminator == "JUMP"
            and isinstance(block.jump_target_val, tuple)
            and ret in block.successors
        ):
            return True
        frontier.extend(block.successors)
    return False


def _reachable(blocks: dict[int, BasicBlock], entry: int,
               call_by_block: dict[int, tuple[int, int]],
               other_entries: set[int]) -> tuple[set[int], dict[int, list[int]]]:
    """Blocks owned by a function entry, with call edges short-circuited
    to their return blocks and other entries treated as boundaries."""
    owned: set[int] = set()
    succ: dict[int, list[int]] = {}
    frontier = [entry]
    while frontier:
        off = frontier.pop()
        if off in owned or off not in blocks:
            continue
        owned.add(off)
        if off in call_by_block:
            _, ret = call_by_block[off]
            nexts = [ret]
        elif (
            blocks[off].terminator == "JUMP"
            and isinstance(blocks[off].jump_target_val, tuple)
        ):
            # return-style jump to a caller-supplied address: the
            # continuation belongs to the callers, not this function
            nexts = []
        else:
            nexts = [s for s in blocks[off].successors if s not in other_entries]
        succ[off] = sorted(set(nexts))
        frontier.extend(nexts)
    return owned, succ


def build_icfg(bytecode: Bytecode, sigdb: SigDb | None = None) -> Icfg:
    """Disassembled bytecode -> functions, TAC blocks, call edges."""
    sigdb = sigdb or SigDb.empty()
    blocks = build_blocks(bytecode.instructions)
    unresolved = resolve_jumps(blocks)

    vars_ = _VarSource()
    lifted = {off: lift_block(blocks[off], vars_) for off in sorted(blocks)}

    branches, fallback_entry = _walk_dispatcher(blocks)
    raw_call_edges = _find_call_edges(blocks)

    public_entries = {entry for _, entry in branches}
    helper_entries = sorted(
        {target for _, target, _ in raw_call_edges} - public_entries
    )

    functions: dict[str, FunctionUnit] = {}

    def add_function(name: str, entry: int, selector: int | None,
                     signature: str | None, public: bool) -> FunctionUnit:
        fn = FunctionUnit(
            name=name,
            entry=entry,
            selector=f"0x{selector:08x}" if selector is not None else None,
            signature=signature,
            is_public=public,
        )
        functions[name] = fn
        return fn

    for sel, entry in branches:
        signature = sigdb.selector_signature(sel)
        name = SigDb.bare_name(signature) if signature else f"func_{sel:08x}"
        add_function(name, entry, sel, signature, public=True)

    if 0 in blocks:
        # execution always starts at offset 0, so the fallback owns the
        # dispatcher chain plus whatever runs when no selector matches
        add_function("fallback", 0, None, None, public=True)

    for entry in helper_entries:
        add_function(f"helper_{entry:#x}", entry, None, None, public=False)

    call_by_block = {b: (t, r) for b, t, r in raw_call_edges}
    all_entries = {fn.entry for fn in functions.values()}

    call_edges: list[CallEdge] = []
    for name in sorted(functions):
        fn = functions[name]
        boundaries = all_entries - {fn.entry}
        owned, succ = _reachable(blocks, fn.entry, call_by_block, boundaries)
        fn.block_offsets = owned
        fn.succ = succ
        fn.pred = {}
        for off, nexts in succ.items():
            for s in nexts:
                fn.pred.setdefault(s, []).append(off)
        for off in fn.pred:
            fn.pred[off].sort()
        _place_phis(fn, lifted)
        _check_stack_heights(fn, lifted)

    entry_to_fn = {fn.entry: fn.name for fn in functions.values()}
    for b, t, r in raw_call_edges:
        callee = entry_to_fn.get(t)
        if callee is None:
            continue
        for name, fn in functions.items():
            if b in fn.block_offsets and name != callee:
                call_edges.append(CallEdge(caller=name, call_block=b, callee=callee, return_block=r))

    return Icfg(
        origin=bytecode.origin,
        blocks=blocks,
        lifted=lifted,
        functions=functions,
        call_edges=sorted(call_edges, key=lambda e: (e.caller, e.call_block, e.callee)),
        unresolved_jumps=unresolved,
    )


def _place_phis(fn: FunctionUnit, lifted: dict[int, LiftedBlock]) -> None:
    for off in fn.block_offsets:
        preds = fn.pred.get(off, [])
        consumed = lifted[off].extern_consumed
        if len(preds) < 2 or consumed == 0:
            continue
        slots: dict[int, dict[int, str]] = {}
        for k in range(consumed):
            slots[k] = {p: lifted[p].exit_var(k) for p in preds}
        fn.phis[off] = slots


def _check_stack_heights(fn: FunctionUnit, lifted: dict[int, LiftedBlock]) -> None:
    """Relative stack-height propagation.

    A join reached at differing heights only matters if the block reads
    its entry stack: then the per-slot sources disagree across frames
    and the block cannot be lifted soundly, so it is excluded from path
    enumeration.  Joins that ignore their stack (shared revert stubs)
    are harmless at any height.
    """
    heights: dict[int, int] = {fn.entry: 0}
    frontier = [fn.entry]
    while frontier:
        off = frontier.pop()
        lb = lifted[off]
        out = heights[off] + len(lb.exit_stack) - lb.extern_consumed
        for s in fn.succ.get(off, []):
            if s not in fn.block_offsets:
                continue
            if s in heights:
                if heights[s] != out and lifted[s].extern_consumed > 0:
                    fn.lift_failed.add(s)
            else:
                heights[s] = out
                frontier.append(s)
