"""One findings vocabulary across the three analysis layers.

Every detector result converts into a Finding with a content-derived
id, so merged reports stay stable across runs and duplicate inputs
collapse.  Confidence means: CONFIRMED carries a concrete witness or a
broken operator-declared rule, POTENTIAL is a static or heuristic
signal, INCOMPLETE means a search budget ran out before the question
was settled.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

LAYER_BYTECODE = "bytecode"
LAYER_SOURCE = "source"
LAYER_LOGS = "logs"

CONFIDENCE_RANK = {"CONFIRMED": 0, "POTENTIAL": 1, "INCOMPLETE": 2}


def jsonable(value):
    """Coerce detector payloads into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, bytes):
        return "0x" + value.hex()
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, float, str)):
        return value
    return str(value)


def _topic_hex(topic0) -> str | None:
    if topic0 is None:
        return None
    if isinstance(topic0, int):
        return f"{topic0:#066x}"
    return topic0


@dataclass(frozen=True)
class Finding:
    id: str
    layer: str
    kind: str
    confidence: str
    subject: dict
    evidence: dict

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "layer": self.layer,
            "kind": self.kind,
            "confidence": self.confidence,
            "subject": self.subject,
            "evidence": self.evidence,
        }

    @property
    def sort_key(self):
        return (
            CONFIDENCE_RANK.get(self.confidence, 9),
            self.layer,
            self.kind,
            json.dumps(self.subject, sort_keys=True),
            self.id,
        )


def make_finding(layer: str, kind: str, confidence: str, subject: dict, evidence: dict) -> Finding:
    subject = jsonable(subject)
    evidence = jsonable(evidence)
    blob = json.dumps(
        {"layer": layer, "kind": kind, "subject": subject, "evidence": evidence},
        sort_keys=True,
        separators=(",", ":"),
    )
    fid = hashlib.sha256(blob.encode("ascii")).digest()[:16].hex()
    return Finding(id=fid, layer=layer, kind=kind, confidence=confidence,
                   subject=subject, evidence=evidence)


def from_bytecode(finding, origin: str) -> Finding:
    """Wrap a taint-layer finding; origin names the analyzed artifact."""
    return make_finding(
        LAYER_BYTECODE,
        finding.kind,
        finding.confidence,
        subject={
            "origin": origin,
            "contract": finding.contract,
            "event": finding.event,
            "topic0": _topic_hex(finding.topic0),
            "functions": list(finding.entries),
        },
        evidence={"condition": finding.condition, "paths": list(finding.paths)},
    )


def from_source(finding, origin: str) -> Finding:
    return make_finding(
        LAYER_SOURCE,
        finding.kind,
        finding.confidence,
        subject={
            "origin": origin,
            "contract": finding.contract,
            "event": finding.event,
            "topic0": _topic_hex(finding.topic0),
            "functions": list(finding.functions),
        },
        evidence=finding.detail,
    )


def from_txlog(finding) -> Finding:
    evidence = dict(finding.detail)
    if finding.check is not None:
        evidence = {"check": finding.check, **evidence}
    return make_finding(
        LAYER_LOGS,
        finding.kind,
        finding.confidence,
        subject={
            "txHash": finding.tx_hash,
            "blockNumber": finding.block_number,
            "logIndex": finding.log_index,
            "address": finding.address,
            "project": finding.project,
            "event": finding.event,
        },
        evidence=evidence,
    )
