"""Command line interface.

Exit codes are uniform across subcommands: 0 means the analysis ran
and found nothing, 1 means findings were produced, 2 means the input
could not be processed.  Output is deterministic; there are no
timestamps and all JSON is key-sorted.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import SCHEMA, __version__
from .evm.disasm import Bytecode
from .findings import from_bytecode, from_source, from_txlog
from .lifter.functions import SigDb, build_icfg
from .minisol import ResolutionError
from .minisol import SyntaxError as SourceSyntaxError
from .minisol import load as load_source
from .minisol import summarize, to_source
from .report import merge
from .taint import detect
from .symexec import analyze_source
from .txscan import load_rules_file, read_records_file, scan_records

_INPUT_ERRORS = (OSError, ValueError, SourceSyntaxError, ResolutionError)


def _fail(origin: str, exc: Exception) -> None:
    text = str(exc)
    # some loaders already put the file name in the message; don't repeat it
    name = Path(origin).name
    if text.startswith(f"{name}: "):
        text = text[len(name) + 2:]
    click.echo(f"error: {origin}: {text}", err=True)
    sys.exit(2)


def _load_sigdb(path: str | None) -> SigDb | None:
    if path is None:
        return None
    try:
        return SigDb.from_file(path)
    except _INPUT_ERRORS as exc:
        _fail(path, exc)


def _emit(report, as_json: bool) -> None:
    if as_json:
        click.echo(report.to_json())
    else:
        for f in report.findings:
            mark = " (superseded)" if f.id in report.superseded else ""
            subject = f.subject.get("event") or f.subject.get("txHash") or ""
            where = f.subject.get("origin") or f.subject.get("address") or ""
            extra = ""
            if f.subject.get("functions"):
                extra = " functions=" + ",".join(f.subject["functions"])
            elif f.subject.get("logIndex") is not None:
                extra = f" block={f.subject['blockNumber']} log={f.subject['logIndex']}"
            check = f.evidence.get("check") or f.evidence.get("condition")
            via = f" via {check}" if check else ""
            click.echo(
                f"[{f.confidence}] {f.kind} ({f.layer}) {where} {subject}{extra}{via}{mark}"
            )
        for c in report.caveats:
            click.echo(f"caveat: {c}")
        n = len(report.findings)
        click.echo(f"{n} finding{'s' if n != 1 else ''}")
    sys.exit(1 if report.findings else 0)


@click.group()
@click.version_option(__version__, prog_name="phantomscan")
def main() -> None:
    """Detect forged smart-contract events at three levels: compiled
    bytecode, restricted source, and logged transaction corpora."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--keep-metadata", is_flag=True, help="Do not strip the trailing metadata blob.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def disasm(file: str, keep_metadata: bool, as_json: bool) -> None:
    """Disassemble runtime bytecode from a hex FILE."""
    try:
        bc = Bytecode.from_hex_file(file, strip=not keep_metadata)
    except _INPUT_ERRORS as exc:
        _fail(file, exc)
    if as_json:
        import json as _json

        doc = {
            "schema": SCHEMA,
            "origin": bc.origin,
            "bytes": len(bc.code),
            "metadata_stripped": bc.metadata.hex() if bc.metadata else None,
            "instructions": [
                {
                    "pc": ins.offset,
                    "op": ins.mnemonic,
                    "arg": "0x" + ins.operand.hex() if ins.operand is not None else None,
                }
                for ins in bc.instructions
            ],
        }
        click.echo(_json.dumps(doc, indent=2, sort_keys=True))
    else:
        for ins in bc.instructions:
            click.echo(str(ins))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sigdb", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Signature database for naming selectors and topics.")
@click.option("--dot", "as_dot", is_flag=True, help="Emit Graphviz instead of JSON.")
def icfg(file: str, sigdb: str | None, as_dot: bool) -> None:
    """Lift bytecode into functions and print the recovered graph."""
    db = _load_sigdb(sigdb)
    try:
        bc = Bytecode.from_hex_file(file)
    except _INPUT_ERRORS as exc:
        _fail(file, exc)
    graph = build_icfg(bc, db)
    click.echo(graph.to_dot() if as_dot else graph.to_json())


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--summary", "as_summary", is_flag=True,
              help="Print an event/state/function digest instead of source.")
def parse(file: str, as_summary: bool) -> None:
    """Parse a restricted-Solidity contract and reprint it canonically."""
    try:
        contract = load_source(Path(file).read_text(encoding="utf-8"))
    except _INPUT_ERRORS as exc:
        _fail(file, exc)
    if as_summary:
        import json as _json

        click.echo(_json.dumps(summarize(contract), indent=2, sort_keys=True))
    else:
        click.echo(to_source(contract), nl=False)


@main.command("analyze-bytecode")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sigdb", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--max-paths", default=256, show_default=True,
              help="Backward-slice budget per log site.")
@click.option("--max-depth", default=64, show_default=True,
              help="Maximum blocks per backward slice.")
@click.option("--strict-eq2", is_flag=True,
              help="Also run the purely structural per-function check.")
@click.option("--json", "as_json", is_flag=True)
def analyze_bytecode(file: str, sigdb: str | None, max_paths: int, max_depth: int,
                     strict_eq2: bool, as_json: bool) -> None:
    """Taint-analyze every LOG site in compiled bytecode."""
    db = _load_sigdb(sigdb)
    try:
        bc = Bytecode.from_hex_file(file)
    except _INPUT_ERRORS as exc:
        _fail(file, exc)
    graph = build_icfg(bc, db)
    raw = detect(graph, db, max_paths=max_paths, max_depth=max_depth, strict_eq2=strict_eq2)
    _emit(merge(from_bytecode(f, origin=Path(file).name) for f in raw), as_json)


@main.command("analyze-source")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def analyze_source_cmd(file: str, as_json: bool) -> None:
    """Symbolically execute a restricted-Solidity contract."""
    try:
        contract = load_source(Path(file).read_text(encoding="utf-8"))
    except _INPUT_ERRORS as exc:
        _fail(file, exc)
    raw = analyze_source(contract)
    _emit(merge(from_source(f, origin=Path(file).name) for f in raw), as_json)


@main.command("scan-logs")
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Project ruleset (YAML).")
@click.option("--no-spoofing", is_flag=True, help="Skip the transfer-spoofing heuristic.")
@click.option("--json", "as_json", is_flag=True)
def scan_logs(corpus: str, rules: str | None, no_spoofing: bool, as_json: bool) -> None:
    """Scan a JSONL event-log corpus against rules and heuristics."""
    ruleset = None
    try:
        if rules is not None:
            ruleset = load_rules_file(rules)
    except _INPUT_ERRORS as exc:
        _fail(rules, exc)
    try:
        raw, caveats = scan_records(read_records_file(corpus), ruleset,
                                    spoofing=not no_spoofing)
    except _INPUT_ERRORS as exc:
        _fail(corpus, exc)
    _emit(merge((from_txlog(f) for f in raw), caveats), as_json)


@main.command()
@click.option("--bytecode", "bytecode_files", multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--source", "source_files", multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--logs", "log_files", multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--sigdb", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON report here instead of stdout.")
def report(bytecode_files, source_files, log_files, rules, sigdb, out) -> None:
    """Run every requested layer and merge the results.

    A confirmed source-level finding supersedes a potential
    bytecode-level one that points at the same event of the same
    artifact stem, so paired inputs like a .hex and .msol of one
    contract do not double-count.
    """
    if not bytecode_files and not source_files and not log_files:
        click.echo("error: nothing to analyze; pass --bytecode, --source or --logs", err=True)
        sys.exit(2)
    db = _load_sigdb(sigdb)
    ruleset = None
    try:
        if rules is not None:
            ruleset = load_rules_file(rules)
    except _INPUT_ERRORS as exc:
        _fail(rules, exc)

    findings = []
    caveats: list[str] = []
    for path in bytecode_files:
        try:
            bc = Bytecode.from_hex_file(path)
        except _INPUT_ERRORS as exc:
            _fail(path, exc)
        for f in detect(build_icfg(bc, db), db):
            findings.append(from_bytecode(f, origin=Path(path).name))
    for path in source_files:
        try:
            contract = load_source(Path(path).read_text(encoding="utf-8"))
        except _INPUT_ERRORS as exc:
            _fail(path, exc)
        for f in analyze_source(contract):
            findings.append(from_source(f, origin=Path(path).name))
    for path in log_files:
        try:
            raw, cavs = scan_records(read_records_file(path), ruleset)
        except _INPUT_ERRORS as exc:
            _fail(path, exc)
        findings.extend(from_txlog(f) for f in raw)
        caveats.extend(cavs)

    merged = merge(findings, caveats)
    text = merged.to_json()
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)
    sys.exit(1 if merged.findings else 0)


if __name__ == "__main__":
    main()
