"""Basic-block construction and jump resolution."""

from phantomscan.evm import Bytecode
from phantomscan.lifter import build_blocks, resolve_jumps


def blocks_of(hexcode: str):
    bc = Bytecode.from_hex(hexcode)
    blocks = build_blocks(bc.instructions)
    unresolved = resolve_jumps(blocks)
    return blocks, unresolved


def test_leaders_at_zero_jumpdest_and_after_terminators():
    # PUSH1 06 JUMP | INVALID | JUMPDEST STOP | JUMPDEST STOP
    blocks, _ = blocks_of("600656fe5b005b00")
    assert sorted(blocks) == [0x0, 0x3, 0x4, 0x6]


def test_direct_jump_resolves_to_jumpdest():
    blocks, unresolved = blocks_of("600456005b00")
    assert unresolved == 0
    assert blocks[0].successors == [0x4]
    assert blocks[0x4].predecessors == [0]


def test_jumpi_gets_both_successors():
    # PUSH1 01 PUSH1 06 JUMPI STOP JUMPDEST STOP
    blocks, unresolved = blocks_of("6001600657005b00")
    assert unresolved == 0
    assert sorted(blocks[0].successors) == [0x5, 0x6]


def test_jump_to_non_jumpdest_marks_block_invalid():
    # PUSH1 04 JUMP STOP STOP  (0x4 is STOP, not JUMPDEST)
    blocks, _ = blocks_of("6004560000")
    assert blocks[0].invalid
    assert "non-JUMPDEST" in blocks[0].invalid_reason


def test_stack_underflow_at_entry_block():
    # bare ADD at offset 0 reads two slots that do not exist yet
    blocks, _ = blocks_of("01")
    assert blocks[0].invalid
    assert "StackUnderflow" in blocks[0].invalid_reason


def test_deeper_block_may_read_caller_stack():
    # JUMPDEST ADD STOP as a jump target: reads come from the callers'
    # stacks, so the block consumes two extern slots without underflow
    blocks, unresolved = blocks_of("6001600260095601005b0100")
    assert not blocks[0x9].invalid
    assert blocks[0x9].extern_consumed == 2


def test_jump_target_through_stack_propagation():
    # PUSH1 07 PUSH1 05 JUMP | JUMPDEST(5) JUMP | JUMPDEST(7) STOP
    # block 5 jumps to a value pushed by its predecessor
    blocks, unresolved = blocks_of("6007600556" + "5b56" + "5b00")
    assert unresolved == 0
    assert blocks[0x5].successors == [0x7]


def test_unresolved_jump_is_counted_not_guessed():
    # CALLDATALOAD result used as jump target: no constant to recover
    blocks, unresolved = blocks_of("600035565b00")
    assert unresolved == 1
    assert blocks[0].has_unresolved_jump
    assert blocks[0].successors == []


def test_fallthrough_terminator():
    # PUSH1 01 then JUMPDEST STOP: first block falls through
    blocks, _ = blocks_of("60015b00")
    assert blocks[0].terminator == "FALLTHROUGH"
    assert blocks[0].successors == [0x2]


def test_exit_stack_top_first():
    blocks, _ = blocks_of("6001600200")
    b = blocks[0]
    assert b.exit_stack[0] == 2 and b.exit_stack[1] == 1
