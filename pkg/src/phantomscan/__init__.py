"""Detection toolkit for forged smart-contract events.

Three independent layers, one findings format:

* bytecode: disassembly, CFG/TAC lifting and backward taint analysis,
* source: a restricted contract language checked by symbolic execution,
* transactions: rule-driven scanning of event-log corpora.
"""

__version__ = "0.1.0"

SCHEMA = "phantomscan/1"
