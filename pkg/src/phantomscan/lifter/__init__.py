from .blocks import BasicBlock, build_blocks, resolve_jumps
from .tac import TacInstruction, LiftedBlock, lift_block
from .functions import FunctionUnit, SigDb, SigDbError, Icfg, build_icfg

__all__ = [
    "BasicBlock",
    "build_blocks",
    "resolve_jumps",
    "TacInstruction",
    "LiftedBlock",
    "lift_block",
    "FunctionUnit",
    "SigDb",
    "SigDbError",
    "Icfg",
    "build_icfg",
]
