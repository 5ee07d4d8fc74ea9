from .disasm import Bytecode, Instruction, disassemble, encode_instructions, strip_metadata
from .opcodes import OPCODES, OpInfo

__all__ = [
    "Bytecode",
    "Instruction",
    "disassemble",
    "encode_instructions",
    "strip_metadata",
    "OPCODES",
    "OpInfo",
]
