"""Basic-block construction and static jump resolution.

Jump targets are recovered by evaluating each block over an abstract
stack of constants.  Constants survive PUSH/DUP/SWAP and fold through
AND and ADD; everything else becomes unknown.  One round of
cross-block propagation then resolves jumps whose target was pushed by
a predecessor (the return-jump of an internal call).  Whatever is
still unknown stays marked unresolved rather than being guessed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..evm.disasm import Instruction
from ..evm.opcodes import OPCODES, TERMINATORS

UMAX = (1 << 256) - 1

# Abstract stack values: a known constant, a reference to an entry-stack
# slot of the block (("S", k)), or None for unknown.
AbsVal = Union[int, tuple, None]


@dataclass
class BasicBlock:
    """A maximal straight-line run of instructions."""

    offset: int
    instructions: list[Instruction]
    terminator: str = "FALLTHROUGH"
    successors: list[int] = field(default_factory=list)
    predecessors: list[int] = field(default_factory=list)
    has_unresolved_jump: bool = False
    invalid: bool = False
    invalid_reason: str | None = None
    # filled by resolve_jumps: exit stack (top first) and entry slots consumed
    exit_stack: list[AbsVal] = field(default_factory=list)
    extern_consumed: int = 0
    jump_target_val: AbsVal = None

    @property
    def end_offset(self) -> int:
        last = self.instructions[-1]
        return last.offset + last.size

    def __repr__(self) -> str:
        return f"<block {self.offset:#x} {self.terminator} -> {[hex(s) for s in self.successors]}>"


def build_blocks(instructions: list[Instruction]) -> dict[int, BasicBlock]:
    """Split an instruction stream into basic blocks.

    A block starts at offset 0, at every JUMPDEST, and right after every
    terminator; it ends at the next terminator or leader.
    """
    if not instructions:
        return {}
    leaders = {instructions[0].offset}
    for idx, ins in enumerate(instructions):
        if ins.mnemonic == "JUMPDEST":
            leaders.add(ins.offset)
        if ins.mnemonic in TERMINATORS and idx + 1 < len(instructions):
            leaders.add(instructions[idx + 1].offset)

    blocks: dict[int, BasicBlock] = {}
    current: list[Instruction] = []
    for ins in instructions:
        if ins.offset in leaders and current:
            blocks[current[0].offset] = BasicBlock(current[0].offset, current)
            current = []
        current.append(ins)
    if current:
        blocks[current[0].offset] = BasicBlock(current[0].offset, current)

    ordered = sorted(blocks)
    for i, off in enumerate(ordered):
        block = blocks[off]
        last = block.instructions[-1]
        if last.mnemonic in TERMINATORS:
            block.terminator = last.mnemonic
            if last.mnemonic == "JUMPI" and i + 1 < len(ordered):
                block.successors.append(ordered[i + 1])
        else:
            block.terminator = "FALLTHROUGH"
            if i + 1 < len(ordered):
                block.successors.append(ordered[i + 1])
    return blocks


def _abs_eval(block: BasicBlock) -> None:
    """Run the block over the abstract stack, filling exit state in place."""
    stack: list[AbsVal] = []  # top first
    consumed = 0

    def ensure(depth: int) -> None:
        nonlocal consumed
        while len(stack) < depth:
            stack.append(("S", consumed))
            consumed += 1

    def pop() -> AbsVal:
        ensure(1)
        return stack.pop(0)

    for ins in block.instructions:
        name = ins.mnemonic
        if name == "PUSH0":
            stack.insert(0, 0)
        elif ins.operand is not None:  # PUSH1..PUSH32
            stack.insert(0, ins.push_value)
        elif name.startswith("DUP"):
            n = int(name[3:])
            ensure(n)
            stack.insert(0, stack[n - 1])
        elif name.startswith("SWAP"):
            n = int(name[4:])
            ensure(n + 1)
            stack[0], stack[n] = stack[n], stack[0]
        elif name == "POP":
            pop()
        elif name == "AND":
            a, b = pop(), pop()
            stack.insert(0, (a & b) if isinstance(a, int) and isinstance(b, int) else None)
        elif name == "ADD":
            a, b = pop(), pop()
            stack.insert(0, ((a + b) & UMAX) if isinstance(a, int) and isinstance(b, int) else None)
        elif name in ("JUMP", "JUMPI"):
            block.jump_target_val = pop()
            if name == "JUMPI":
                pop()
        else:
            info = OPCODES.get(ins.opcode)
            pops = info.pops if info else 0
            pushes = info.pushes if info else 0
            for _ in range(pops):
                pop()
            for _ in range(pushes):
                stack.insert(0, None)

    block.exit_stack = stack
    block.extern_consumed = consumed


def exit_slot(block: BasicBlock, k: int) -> AbsVal:
    """Abstract value of exit-stack slot ``k`` (0 = top) of ``block``.

    Slots below the locals pass the block's own entry stack through.
    """
    if k < len(block.exit_stack):
        return block.exit_stack[k]
    return ("S", k - len(block.exit_stack) + block.extern_consumed)


def resolve_jumps(blocks: dict[int, BasicBlock]) -> int:
    """Resolve static jump targets; returns the number of unresolved jumps.

    Resolved targets must land on a JUMPDEST: a constant target that does
    not is dropped and the block marked invalid instead of growing a
    bogus edge.
    """
    if not blocks:
        return 0
    jumpdests = {
        b.offset for b in blocks.values()
        if b.instructions and b.instructions[0].mnemonic == "JUMPDEST"
    }

    for block in blocks.values():
        _abs_eval(block)
        if block.offset == 0 and block.extern_consumed > 0:
            # the entry stack is empty, so drawing from it is an underflow
            block.invalid = True
            block.invalid_reason = f"StackUnderflow({block.offset:#x})"

    def add_target(block: BasicBlock, target: int) -> None:
        if target in jumpdests:
            if target not in block.successors:
                block.successors.append(target)
        else:
            block.invalid = True
            block.invalid_reason = f"jump to non-JUMPDEST {target:#x}"

    pending: list[BasicBlock] = []
    for block in blocks.values():
        if block.terminator not in ("JUMP", "JUMPI"):
            continue
        val = block.jump_target_val
        if isinstance(val, int):
            add_target(block, val)
        else:
            pending.append(block)

    _fill_predecessors(blocks)

    # one round of cross-block propagation: a target pushed by a
    # predecessor and consumed here (the internal-call return pattern)
    for block in pending:
        val = block.jump_target_val
        if not (isinstance(val, tuple) and val and val[0] == "S"):
            block.has_unresolved_jump = True
            continue
        slot = val[1]
        found = False
        for pred_off in block.predecessors:
            pred_val = exit_slot(blocks[pred_off], slot)
            if isinstance(pred_val, int):
                add_target(block, pred_val)
                found = True
        if not found:
            block.has_unresolved_jump = True

    _fill_predecessors(blocks)
    return sum(1 for b in blocks.values() if b.has_unresolved_jump)


def _fill_predecessors(blocks: dict[int, BasicBlock]) -> None:
    for b in blocks.values():
        b.predecessors = []
    for b in blocks.values():
        for succ in b.successors:
            if succ in blocks and b.offset not in blocks[succ].predecessors:
                blocks[succ].predecessors.append(b.offset)
    for b in blocks.values():
        b.predecessors.sort()
