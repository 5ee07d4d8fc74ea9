"""Log-corpus scanning: records, ABI decode, rulesets, scanner checks."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phantomscan._keccak import event_topic
from phantomscan.resources import fixture_path
from phantomscan.txscan import (
    DecodeError,
    LogRecord,
    RecordError,
    RulesError,
    Scanner,
    decode_data,
    decode_event,
    decode_topic,
    event_topic0,
    load_rules,
    load_rules_file,
    parse_record,
    read_records,
    read_records_file,
    scan_records,
)

VAULT = "0x" + "11" * 20
PTOKEN = "0x" + "22" * 20
ATTACKER_CONTRACT = "0x" + "a7" * 20
ATTACKER = "0x" + "e0" * 20


def t_addr(addr: str) -> str:
    return "0x" + "0" * 24 + addr[2:]


def t_uint(v: int) -> str:
    return f"0x{v:064x}"


def enc(*items) -> str:
    """Head/tail event-data encoder, kept separate from the package decoder."""
    heads, tails = [], []
    tail_at = 32 * len(items)
    for type_, value in items:
        if type_ == "uint256":
            heads.append(f"{value:064x}")
        elif type_ == "address":
            heads.append("0" * 24 + value[2:])
        elif type_ == "bool":
            heads.append(f"{int(value):064x}")
        else:
            payload = value.encode("utf-8") if type_ == "string" else value
            heads.append(f"{tail_at:064x}")
            padded = payload + b"\x00" * (-len(payload) % 32)
            tails.append(f"{len(payload):064x}" + padded.hex())
            tail_at += 32 + len(padded)
    return "0x" + "".join(heads) + "".join(tails)


def rec(block, index, tx_hash, address, topics, data, tx_from, selector="0xaabbccdd"):
    return parse_record(
        {
            "txHash": f"0x{tx_hash:064x}" if isinstance(tx_hash, int) else tx_hash,
            "logIndex": index,
            "blockNumber": block,
            "address": address,
            "topics": topics,
            "data": data,
            "txFrom": tx_from,
            "txTo": address,
            "txSelector": selector,
        }
    )


# -- records ----------------------------------------------------------


def test_parse_record_normalizes_case():
    r = rec(5, 0, 1, VAULT.upper().replace("0X", "0x"), [t_uint(3)], "0xAB", ATTACKER)
    assert r.address == VAULT
    assert r.data == "0xab"
    assert r.topic0 == 3


def test_parse_record_rejects_bad_shapes():
    base = {
        "txHash": f"0x{1:064x}",
        "logIndex": 0,
        "blockNumber": 1,
        "address": VAULT,
        "topics": [],
        "data": "0x",
        "txFrom": ATTACKER,
        "txTo": None,
        "txSelector": None,
    }
    for field, value, fragment in [
        ("txHash", "0x1234", "32-byte"),
        ("address", "0x12", "20-byte"),
        ("logIndex", -1, "non-negative"),
        ("logIndex", True, "non-negative"),
        ("topics", [t_uint(1)] * 5, "0 to 4"),
        ("topics", ["0xzz"], "32-byte"),
        ("data", "0xabc", "even-length"),
        ("txSelector", "0x123456", "4-byte"),
    ]:
        bad = dict(base)
        bad[field] = value
        with pytest.raises(RecordError, match=fragment):
            parse_record(bad, lineno=7)
    with pytest.raises(RecordError, match="missing field"):
        parse_record({k: v for k, v in base.items() if k != "data"})


def test_read_records_reports_line_numbers():
    lines = ["", "not json"]
    with pytest.raises(RecordError, match="line 2"):
        list(read_records(lines))
    with pytest.raises(RecordError, match="JSON object"):
        list(read_records(['["a"]']))


# -- abi decoding ------------------------------------------------------


def test_decode_static_trio():
    data = bytes.fromhex(enc(("uint256", 42), ("address", VAULT), ("bool", True))[2:])
    assert decode_data(["uint256", "address", "bool"], data) == [42, VAULT, True]


def test_decode_dynamic_tail():
    data = bytes.fromhex(enc(("uint256", 7), ("string", "hi"), ("bytes", b"\x01\x02"))[2:])
    assert decode_data(["uint256", "string", "bytes"], data) == [7, "hi", b"\x01\x02"]


def test_decode_errors():
    with pytest.raises(DecodeError, match="runs past end"):
        decode_data(["uint256"], b"\x00" * 16)
    with pytest.raises(DecodeError, match="not word aligned"):
        decode_data(["bytes"], (7).to_bytes(32, "big") + b"\x00" * 32)
    oob = (32).to_bytes(32, "big") + (100).to_bytes(32, "big")
    with pytest.raises(DecodeError, match="out of bounds"):
        decode_data(["bytes"], oob)
    with pytest.raises(DecodeError, match="bool word"):
        decode_data(["bool"], (2).to_bytes(32, "big"))
    with pytest.raises(DecodeError, match="nonzero padding"):
        decode_data(["address"], b"\xff" * 32)


def test_decode_topic_values():
    assert decode_topic("address", t_addr(VAULT)) == VAULT
    assert decode_topic("uint256", t_uint(99)) == 99
    assert decode_topic("bool", t_uint(1)) is True
    # indexed dynamic params log only a hash; it comes back verbatim
    assert decode_topic("bytes", t_uint(0xABC)) == t_uint(0xABC)


@given(
    st.lists(
        st.one_of(
            st.tuples(st.just("uint256"), st.integers(0, 2**256 - 1)),
            st.tuples(st.just("address"), st.integers(0, 2**160 - 1).map(lambda v: f"0x{v:040x}")),
            st.tuples(st.just("bool"), st.booleans()),
            st.tuples(st.just("bytes"), st.binary(max_size=80)),
            st.tuples(st.just("string"), st.text(alphabet=st.characters(codec="utf-8"), max_size=40)),
        ),
        max_size=6,
    )
)
def test_decode_inverts_encode(items):
    data = bytes.fromhex(enc(*items)[2:])
    assert decode_data([t for t, _ in items], data) == [v for _, v in items]


# -- rulesets ----------------------------------------------------------


def bridge_rules():
    return load_rules_file(fixture_path("bridge_rules.yaml"))


def strict_rules():
    return load_rules_file(fixture_path("bridge_rules_strict.yaml"))


def test_ruleset_derives_topics():
    rs = bridge_rules()
    assert [p.name for p in rs.projects] == ["HarborBridge"]
    proj = rs.projects[0]
    assert proj.authentic_emitters == frozenset({VAULT, PTOKEN})
    assert {e.signature for e in proj.events} == {
        "Redeem(address,uint256,string,bytes)",
        "Burned(address,address,uint256,bytes,bytes)",
        "Transfer(address,address,uint256)",
    }
    for e in proj.events:
        assert e.topic0 == int(event_topic(e.signature), 16)
    assert set(rs.watched) == {e.topic0 for e in proj.events}


def test_strict_ruleset_adds_behavior_rules():
    redeem = next(e for e in strict_rules().projects[0].events if e.name == "Redeem")
    assert redeem.expected_selectors == frozenset({"0x24b76fd5"})
    assert [(p.param, p.op, p.value) for p in redeem.predicates] == [("value", ">", 0)]


def _rules_doc(**event_extra):
    event = {
        "name": "Ping",
        "params": [{"name": "x", "type": "uint256", "indexed": False}],
        **event_extra,
    }
    return {
        "version": 1,
        "projects": [
            {"name": "P", "authentic_emitters": [VAULT], "events": [event]}
        ],
    }


def test_ruleset_validation_errors():
    import yaml as _yaml

    def check(doc, fragment):
        with pytest.raises(RulesError, match=fragment):
            load_rules(_yaml.safe_dump(doc))

    check({"version": 2, "projects": []}, "version must be 1")
    check({"version": 1, "projects": []}, "non-empty list")
    check(_rules_doc(params=[{"name": "x", "type": "uint128", "indexed": False}]),
          "unsupported param type")
    check(_rules_doc(params=[{"name": "x", "type": "uint256", "indexed": False}] * 2),
          "duplicate param")
    check(_rules_doc(params=[{"name": "x", "type": "address", "indexed": True}] * 0 or
                     [{"name": f"p{i}", "type": "address", "indexed": True} for i in range(4)]),
          "at most 3")
    check(_rules_doc(predicates=[{"param": "y", "op": ">", "value": 0}]), "unknown param")
    check(_rules_doc(predicates=[{"param": "x", "op": "~", "value": 0}]), "op must be")
    check(_rules_doc(predicates=[{"param": "x", "op": ">", "value": -1}]),
          "non-negative integer")
    check(_rules_doc(expected_selectors=["0x123"]), "4-byte")
    check(_rules_doc(bogus=1), "unknown keys")
    doc = _rules_doc()
    doc["projects"].append(doc["projects"][0])
    check(doc, "share a name")
    addr_event = _rules_doc(
        params=[{"name": "who", "type": "address", "indexed": False}],
        predicates=[{"param": "who", "op": "<", "value": VAULT}],
    )
    check(addr_event, "only == and !=")


def test_event_topic0_matches_keccak_oracle():
    assert event_topic0("Transfer", ["address", "address", "uint256"]) == int(
        event_topic("Transfer(address,address,uint256)"), 16
    )


# -- scanner unit behavior ---------------------------------------------

T_TRANSFER = event_topic("Transfer(address,address,uint256)")
T_REDEEM = event_topic("Redeem(address,uint256,string,bytes)")
T_APPROVAL = event_topic("Approval(address,address,uint256)")


def redeem_log(block, index, tx, emitter, value=10):
    return rec(
        block, index, tx, emitter,
        [T_REDEEM, t_addr(ATTACKER)],
        enc(("uint256", value), ("string", "r"), ("bytes", b"")),
        ATTACKER,
    )


def test_blend_needs_both_sides():
    rs = bridge_rules()
    # all-foreign transaction: emitter violations only, nothing to blend with
    findings, _ = scan_records(
        [redeem_log(1, 0, 1, ATTACKER_CONTRACT), redeem_log(1, 1, 1, ATTACKER_CONTRACT)], rs
    )
    assert [f.kind for f in findings] == ["RULE_VIOLATION", "RULE_VIOLATION"]
    # all-authentic transaction: clean
    findings, _ = scan_records([redeem_log(1, 0, 1, VAULT)], rs)
    assert findings == []
    # a mixed one blends
    findings, _ = scan_records([redeem_log(1, 0, 1, VAULT), redeem_log(1, 1, 1, ATTACKER_CONTRACT)], rs)
    assert [f.kind for f in findings] == ["BLENDED_EVENT", "RULE_VIOLATION"]
    blend = findings[0]
    assert blend.log_index == 1 and blend.address == ATTACKER_CONTRACT
    assert blend.detail == {
        "authentic_logs": [0],
        "foreign_logs": [1],
        "foreign_emitters": [ATTACKER_CONTRACT],
    }


def test_blend_not_reported_across_transactions():
    rs = bridge_rules()
    findings, _ = scan_records(
        [redeem_log(1, 0, 1, VAULT), redeem_log(2, 0, 2, ATTACKER_CONTRACT)], rs
    )
    assert [f.kind for f in findings] == ["RULE_VIOLATION"]


def test_two_projects_watching_one_topic_both_flag():
    doc = {
        "version": 1,
        "projects": [
            {"name": "A", "authentic_emitters": [VAULT],
             "events": [{"name": "Redeem", "params": [
                 {"name": "redeemer", "type": "address", "indexed": True},
                 {"name": "value", "type": "uint256", "indexed": False},
                 {"name": "underlyingAssetRecipient", "type": "string", "indexed": False},
                 {"name": "userData", "type": "bytes", "indexed": False}]}]},
            {"name": "B", "authentic_emitters": [PTOKEN],
             "events": [{"name": "Redeem", "params": [
                 {"name": "redeemer", "type": "address", "indexed": True},
                 {"name": "value", "type": "uint256", "indexed": False},
                 {"name": "underlyingAssetRecipient", "type": "string", "indexed": False},
                 {"name": "userData", "type": "bytes", "indexed": False}]}]},
        ],
    }
    import yaml as _yaml

    rs = load_rules(_yaml.safe_dump(doc))
    findings, _ = scan_records([redeem_log(1, 0, 1, ATTACKER_CONTRACT)], rs)
    assert [(f.check, f.project) for f in findings] == [
        ("emitter-authenticity", "A"),
        ("emitter-authenticity", "B"),
    ]


def test_anonymous_log_from_authentic_emitter_is_undeclared():
    rs = bridge_rules()
    findings, _ = scan_records([rec(1, 0, 1, VAULT, [], "0x", ATTACKER)], rs)
    assert [(f.check, f.detail) for f in findings] == [
        ("undeclared-signature", {"topic0": None})
    ]


def test_out_of_order_records_rejected():
    scanner = Scanner(bridge_rules())
    scanner.feed(redeem_log(5, 1, 1, VAULT))
    with pytest.raises(RecordError, match="out of order"):
        scanner.feed(redeem_log(5, 1, 1, VAULT))
    with pytest.raises(RecordError, match="out of order"):
        scanner.feed(redeem_log(4, 0, 2, VAULT))


def test_finish_is_terminal():
    scanner = Scanner()
    scanner.finish()
    with pytest.raises(RuntimeError):
        scanner.finish()
    with pytest.raises(RuntimeError):
        scanner.feed(redeem_log(1, 0, 1, VAULT))


def test_no_caveat_from_block_zero():
    scanner = Scanner()
    scanner.feed(rec(0, 0, 1, PTOKEN,
                     [T_TRANSFER, t_addr(VAULT), t_addr(ATTACKER)],
                     enc(("uint256", 5)), ATTACKER))
    out = scanner.finish()
    assert scanner.caveats == []
    assert out == []  # findings came from feed(); none pending


def test_spoof_detail_omits_caveat_flag_when_complete():
    scanner = Scanner()
    found = scanner.feed(rec(0, 0, 1, PTOKEN,
                             [T_TRANSFER, t_addr(VAULT), t_addr(ATTACKER)],
                             enc(("uint256", 5)), ATTACKER))
    assert [f.kind for f in found] == ["TRANSFER_SPOOFING"]
    assert "approval_window_incomplete" not in found[0].detail


def test_spoofing_can_be_disabled():
    findings, caveats = scan_records(
        read_records_file(fixture_path("spoof_logs.jsonl")), spoofing=False
    )
    assert findings == []
    # the approval-window caveat only qualifies spoofing findings
    assert caveats == []


def test_streaming_equals_batch():
    for corpus, rules in [
        ("bridge_logs.jsonl", bridge_rules()),
        ("bridge_edge_logs.jsonl", strict_rules()),
        ("spoof_logs.jsonl", None),
    ]:
        records = list(read_records_file(fixture_path(corpus)))
        batch, caveats = scan_records(records, rules)
        scanner = Scanner(rules)
        streamed = []
        for r in records:
            streamed.extend(scanner.feed(r))
        streamed.extend(scanner.finish())
        assert sorted(streamed, key=lambda f: f.sort_key) == batch
        assert scanner.caveats == caveats


# -- frozen corpus outcomes --------------------------------------------


def test_bridge_corpus_findings():
    findings, caveats = scan_records(
        read_records_file(fixture_path("bridge_logs.jsonl")), bridge_rules()
    )
    assert [(f.kind, f.check) for f in findings] == [
        ("BLENDED_EVENT", None),
        ("RULE_VIOLATION", "emitter-authenticity"),
    ]
    blend, violation = findings
    assert blend.project == "HarborBridge"
    assert blend.block_number == 120 and blend.log_index == 2
    assert blend.address == ATTACKER_CONTRACT
    assert blend.event == "Redeem"
    assert blend.confidence == "POTENTIAL"
    assert blend.detail == {
        "authentic_logs": [0, 1, 3],
        "foreign_logs": [2],
        "foreign_emitters": [ATTACKER_CONTRACT],
    }
    assert violation.confidence == "CONFIRMED"
    assert violation.block_number == 120 and violation.log_index == 2
    assert violation.detail["signature"] == "Redeem(address,uint256,string,bytes)"
    assert sorted(violation.detail["authentic_emitters"]) == [VAULT, PTOKEN]
    assert len(caveats) == 1 and "block 120" in caveats[0]


def test_edge_corpus_under_plain_rules():
    findings, _ = scan_records(
        read_records_file(fixture_path("bridge_edge_logs.jsonl")), bridge_rules()
    )
    assert [(f.check, f.block_number) for f in findings] == [("undeclared-signature", 302)]
    assert findings[0].detail["topic0"] == event_topic("Pinged(uint256)")


def test_edge_corpus_under_strict_rules():
    findings, _ = scan_records(
        read_records_file(fixture_path("bridge_edge_logs.jsonl")), strict_rules()
    )
    assert [(f.check, f.block_number) for f in findings] == [
        ("unexpected-selector", 300),
        ("predicate", 301),
        ("undeclared-signature", 302),
        ("malformed-data", 303),
    ]
    selector, predicate, _, malformed = findings
    assert selector.detail == {"selector": "0x1badface", "expected": ["0x24b76fd5"]}
    assert predicate.detail == {"param": "value", "op": ">", "bound": 0, "got": 0}
    assert "runs past end" in malformed.detail["error"]
    assert all(f.confidence == "CONFIRMED" for f in findings)


def test_spoof_corpus_findings():
    findings, caveats = scan_records(read_records_file(fixture_path("spoof_logs.jsonl")))
    assert [(f.kind, f.block_number) for f in findings] == [
        ("TRANSFER_SPOOFING", 200),
        ("TRANSFER_SPOOFING", 205),
        ("TRANSFER_SPOOFING", 208),
    ]
    erc20, erc721, revoked = findings
    assert erc20.detail["standard"] == "erc20" and erc20.detail["value"] == 999
    assert erc721.detail["standard"] == "erc721" and erc721.detail["tokenId"] == 9
    assert revoked.detail["from"] == "0x" + "aa" * 20
    assert all(f.confidence == "POTENTIAL" for f in findings)
    assert all(f.detail["approval_window_incomplete"] for f in findings)
    assert len(caveats) == 1


def test_injected_approval_suppresses_spoof():
    findings, _ = scan_records(read_records_file(fixture_path("spoof_approved_logs.jsonl")))
    assert [f.block_number for f in findings] == [205, 208]


def test_findings_serialize_to_json():
    findings, _ = scan_records(
        read_records_file(fixture_path("bridge_logs.jsonl")), bridge_rules()
    )
    blob = json.dumps([f.to_json() for f in findings], sort_keys=True)
    again = json.dumps([f.to_json() for f in findings], sort_keys=True)
    assert blob == again
    parsed = json.loads(blob)
    assert parsed[0]["kind"] == "BLENDED_EVENT"
    assert parsed[1]["check"] == "emitter-authenticity"


def test_decode_event_against_rule_params():
    redeem = next(e for e in bridge_rules().projects[0].events if e.name == "Redeem")
    record = redeem_log(1, 0, 1, VAULT, value=55)
    decoded = decode_event(redeem.params, record.topics, record.data)
    assert decoded == {
        "redeemer": ATTACKER,
        "value": 55,
        "underlyingAssetRecipient": "r",
        "userData": b"",
    }
    with pytest.raises(DecodeError, match="topics"):
        decode_event(redeem.params, record.topics + (t_uint(1),), record.data)
