"""Symbolic execution of contract functions and the two source-level
checks built on it.

Each entry function is unrolled into a set of straight-line paths.  A
path carries the conjunction of branch conditions and require guards
that let execution reach its end, every event emission with fully
evaluated arguments, and every storage write.  `require` failures and
`revert` terminate a path without recording its emissions, since a
reverted transaction publishes no logs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .._keccak import event_topic
from ..minisol import ast
from .solver import SAT, solve
from .values import (
    BinOp,
    CallerSym,
    CallSuccessSym,
    FreeVar,
    Literal,
    NotOp,
    StorageSym,
    SymValue,
    ValueSym,
    evaluate,
    input_atoms,
    rename,
    sort_of_type,
)

INLINE_DEPTH = 4
MAX_PATHS = 128


@dataclass(frozen=True)
class EmitRecord:
    event: str
    args: tuple[SymValue, ...]


@dataclass(frozen=True)
class WriteRecord:
    var: str
    key: SymValue | None
    value: SymValue


@dataclass
class Path:
    function: str
    conjuncts: tuple[SymValue, ...]
    emits: tuple[EmitRecord, ...]
    writes: tuple[WriteRecord, ...]
    truncated: bool


@dataclass
class PathSet:
    function: str
    paths: list[Path]
    truncated: bool  # some path hit the inline depth or the path cap


@dataclass
class SourceFinding:
    kind: str  # EVENT_COUNTERFEITING | INCONSISTENT_LOGGING
    event: str  # event signature
    topic0: str
    contract: str
    functions: tuple[str, ...]
    confidence: str  # CONFIRMED | INCOMPLETE
    detail: dict

    def sort_key(self):
        return (self.kind, self.event, self.functions)


class _State:
    def __init__(self):
        self.env: dict[str, SymValue] = {}
        self.storage: dict[tuple[str, str], SymValue] = {}
        self.versions: dict[tuple[str, str], int] = {}
        self.read_memo: dict[tuple[str, str], StorageSym] = {}
        self.conjuncts: list[SymValue] = []
        self.emits: list[EmitRecord] = []
        self.writes: list[WriteRecord] = []
        self.truncated = False
        self.alive = True  # False once the path finished early
        self.reverted = False

    def fork(self) -> "_State":
        s = _State.__new__(_State)
        s.env = dict(self.env)
        s.storage = dict(self.storage)
        s.versions = dict(self.versions)
        s.read_memo = dict(self.read_memo)
        s.conjuncts = list(self.conjuncts)
        s.emits = list(self.emits)
        s.writes = list(self.writes)
        s.truncated = self.truncated
        s.alive = self.alive
        s.reverted = self.reverted
        return s


class _Executor:
    def __init__(self, contract: ast.Contract, max_paths: int = MAX_PATHS):
        self.contract = contract
        self.max_paths = max_paths
        self.caller = CallerSym()
        self.msg_value = ValueSym()
        self.call_sites = itertools.count()
        self.capped = False

    # ----------------------------------------------------------- expressions

    def eval(self, e: ast.Node, st: _State) -> SymValue:
        if isinstance(e, ast.Lit):
            return Literal(e.value)
        if isinstance(e, ast.BoolLit):
            return Literal(int(e.value), "bool")
        if isinstance(e, ast.AddressLit):
            return Literal(e.value, "address")
        if isinstance(e, ast.MsgSender):
            return self.caller
        if isinstance(e, ast.MsgValue):
            return self.msg_value
        if isinstance(e, ast.Name):
            if e.ident in st.env:
                return st.env[e.ident]
            return self.read_storage(e.ident, None, st)
        if isinstance(e, ast.Index):
            return self.read_storage(e.ident, self.eval(e.key, st), st)
        if isinstance(e, ast.Unary):
            return NotOp(self.eval(e.operand, st))
        if isinstance(e, ast.Binary):
            return BinOp(e.op, self.eval(e.left, st), self.eval(e.right, st))
        raise TypeError(type(e).__name__)

    def read_storage(self, var: str, key: SymValue | None, st: _State) -> SymValue:
        slot = (var, "" if key is None else str(key))
        if slot in st.storage:
            return st.storage[slot]
        if slot not in st.read_memo:
            decl = self.contract.state_var(var)
            st.read_memo[slot] = StorageSym(
                var=var, key=key, version=st.versions.get(slot, 0),
                sort=sort_of_type(decl.type))
        return st.read_memo[slot]

    def write_storage(self, var: str, key: SymValue | None, value: SymValue,
                      st: _State) -> None:
        slot = (var, "" if key is None else str(key))
        st.storage[slot] = value
        st.versions[slot] = st.versions.get(slot, 0) + 1
        st.writes.append(WriteRecord(var=var, key=key, value=value))

    # ------------------------------------------------------------ statements

    def run_block(self, stmts, states: list[_State], depth: int) -> list[_State]:
        for s in stmts:
            nxt: list[_State] = []
            for st in states:
                if st.alive:
                    nxt.extend(self.step(s, st, depth))
                else:
                    nxt.append(st)
            states = nxt
            if len(states) > self.max_paths:
                self.capped = True
                states = states[:self.max_paths]
                for st in states:
                    st.truncated = True
        return states

    def step(self, s: ast.Node, st: _State, depth: int) -> list[_State]:
        c = self.contract
        if isinstance(s, ast.Require):
            st.conjuncts.append(self.eval(s.cond, st))
            return [st]
        if isinstance(s, ast.Emit):
            args = tuple(self.eval(a, st) for a in s.args)
            st.emits.append(EmitRecord(event=s.event, args=args))
            return [st]
        if isinstance(s, ast.If):
            cond = self.eval(s.cond, st)
            other = st.fork()
            st.conjuncts.append(cond)
            other.conjuncts.append(NotOp(cond))
            taken = self.run_block(s.then, [st], depth)
            skipped = self.run_block(s.orelse, [other], depth)
            return taken + skipped
        if isinstance(s, ast.LocalDecl):
            st.env[s.name] = self.eval(s.value, st)
            return [st]
        if isinstance(s, ast.Assign):
            value = self.eval(s.value, st)
            if s.target in st.env:
                st.env[s.target] = value
            else:
                self.write_storage(s.target, None, value, st)
            return [st]
        if isinstance(s, ast.MapWrite):
            self.write_storage(s.target, self.eval(s.key, st),
                               self.eval(s.value, st), st)
            return [st]
        if isinstance(s, ast.CallStmt):
            site = f"{s.span[0]}#{next(self.call_sites)}"
            st.env[s.result] = CallSuccessSym(site=site)
            return [st]
        if isinstance(s, ast.InternalCall):
            callee = c.function(s.name)
            if depth >= INLINE_DEPTH:
                st.truncated = True
                return [st]
            args = [self.eval(a, st) for a in s.args]
            saved_env = st.env
            st.env = {p.name: v for p, v in zip(callee.params, args)}
            out = self.run_block(callee.body, [st], depth + 1)
            for o in out:
                o.env = saved_env
            return out
        if isinstance(s, ast.Revert):
            st.alive = False
            st.reverted = True
            return [st]
        if isinstance(s, ast.Return):
            # value, if any, is irrelevant to logging behavior
            st.alive = False
            return [st]
        raise TypeError(type(s).__name__)


def search_paths(contract: ast.Contract, fn_name: str,
                 max_paths: int = MAX_PATHS) -> PathSet:
    fn = contract.function(fn_name)
    if fn is None:
        raise KeyError(fn_name)
    ex = _Executor(contract, max_paths=max_paths)
    init = _State()
    init.env = {p.name: FreeVar(name=p.name, sort=sort_of_type(p.type))
                for p in fn.params}
    finals = ex.run_block(fn.body, [init], 0)
    paths = []
    for st in finals:
        if st.reverted:
            continue  # a reverted transaction publishes nothing
        paths.append(Path(
            function=fn_name,
            conjuncts=tuple(st.conjuncts),
            emits=tuple(st.emits),
            writes=tuple(st.writes),
            truncated=st.truncated,
        ))
    truncated = ex.capped or any(p.truncated for p in paths)
    return PathSet(function=fn_name, paths=paths, truncated=truncated)


# ------------------------------------------------------------------- checks

def _entry_functions(contract: ast.Contract) -> list[ast.Function]:
    return [f for f in contract.functions if f.is_entry]


def _validated_atoms(path: Path) -> set[SymValue]:
    out: set[SymValue] = set()
    for c in path.conjuncts:
        out |= input_atoms(c)
    for w in path.writes:
        if w.key is not None:
            out |= input_atoms(w.key)
        out |= input_atoms(w.value)
    return out


def check_logging_inconsistency(contract: ast.Contract) -> list[SourceFinding]:
    """Flag emissions carrying sender-controlled values that the path
    neither constrains nor records in storage."""
    findings: dict[tuple, SourceFinding] = {}
    for fn in _entry_functions(contract):
        ps = search_paths(contract, fn.name)
        for path in ps.paths:
            if not path.emits:
                continue
            ok_atoms = _validated_atoms(path)
            for emit in path.emits:
                event = contract.event(emit.event)
                unvalidated: dict[str, list[str]] = {}
                for param, arg in zip(event.params, emit.args):
                    bad = input_atoms(arg) - ok_atoms
                    if bad:
                        unvalidated[param.name] = sorted(str(a) for a in bad)
                if not unvalidated:
                    continue
                key = (fn.name, emit.event,
                       tuple(sorted((k, tuple(v)) for k, v in unvalidated.items())))
                if key in findings:
                    findings[key].detail["paths"] += 1
                    continue
                findings[key] = SourceFinding(
                    kind="INCONSISTENT_LOGGING",
                    event=event.signature,
                    topic0=event_topic(event.signature),
                    contract=contract.name,
                    functions=(fn.name,),
                    confidence="INCOMPLETE" if ps.truncated else "CONFIRMED",
                    detail={"unvalidated": unvalidated, "paths": 1},
                )
    return sorted(findings.values(), key=SourceFinding.sort_key)


def check_counterfeit_pair(contract: ast.Contract) -> list[SourceFinding]:
    """Find two entry points that can emit byte-identical payloads of
    the same event under compatible constraints."""
    emitters: dict[str, dict[str, list[tuple[Path, EmitRecord]]]] = {}
    truncated_fns: set[str] = set()
    for fn in _entry_functions(contract):
        ps = search_paths(contract, fn.name)
        if ps.truncated:
            truncated_fns.add(fn.name)
        for path in ps.paths:
            for emit in path.emits:
                emitters.setdefault(emit.event, {}) \
                        .setdefault(fn.name, []).append((path, emit))

    findings: list[SourceFinding] = []
    for event_name in sorted(emitters):
        by_fn = emitters[event_name]
        event = contract.event(event_name)
        for fn1, fn2 in itertools.combinations(sorted(by_fn), 2):
            hit = None
            for (p1, e1), (p2, e2) in itertools.product(by_fn[fn1], by_fn[fn2]):
                conjuncts = [rename(c, "@1") for c in p1.conjuncts]
                conjuncts += [rename(c, "@2") for c in p2.conjuncts]
                coupled = []
                for a1, a2 in zip(e1.args, e2.args):
                    coupled.append(BinOp("==", rename(a1, "@1"), rename(a2, "@2")))
                conjuncts += coupled
                verdict, model = solve(conjuncts)
                if verdict == SAT:
                    witness = {
                        p.name: evaluate(rename(a, "@1"), model)
                        for p, a in zip(event.params, e1.args)
                    }
                    hit = witness
                    break
            if hit is None:
                continue
            confidence = "INCOMPLETE" if (fn1 in truncated_fns or
                                          fn2 in truncated_fns) else "CONFIRMED"
            findings.append(SourceFinding(
                kind="EVENT_COUNTERFEITING",
                event=event.signature,
                topic0=event_topic(event.signature),
                contract=contract.name,
                functions=(fn1, fn2),
                confidence=confidence,
                detail={"witness": hit},
            ))
    return sorted(findings, key=SourceFinding.sort_key)


def analyze_source(contract: ast.Contract) -> list[SourceFinding]:
    findings = check_counterfeit_pair(contract)
    findings += check_logging_inconsistency(contract)
    return sorted(findings, key=SourceFinding.sort_key)
