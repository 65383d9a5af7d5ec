import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from termselect.corpus import (
    Mode,
    RawRecord,
    TokenizedDocument,
    build_collection,
    collection_stats,
    filter_speakers,
    load_collection,
    read_records,
    save_collection,
    tokenize,
)
from termselect.errors import InsufficientData, MalformedInput, UnknownMode


def rec(rid, speaker="s1", committee="c1", initiative="i1", text="alpha beta"):
    return RawRecord(rid, speaker, committee, initiative, text)


def doc(doc_id, **freqs):
    return TokenizedDocument.from_counts(doc_id, (doc_id,), freqs)


def test_tokenize_examples():
    assert tokenize("La educación, la educación pública", {"la"}) == ["educación", "educación", "pública"]
    assert tokenize("", set()) == []
    assert tokenize("A1-b2 c", set()) == ["a1", "b2"]


def test_tokenize_drops_underscores_and_short_tokens():
    assert tokenize("foo_bar x yz", set()) == ["foo", "bar", "yz"]


@pytest.fixture
def three_records():
    return [
        rec("r1", committee="c1", initiative="i1", text="water policy"),
        rec("r2", committee="c1", initiative="i2", text="water budget"),
        rec("r3", committee="c2", initiative="i3", text="school budget"),
    ]


def test_grouping_modes(three_records):
    assert build_collection(three_records, Mode.COMMITTEE).stats.N == 2
    assert build_collection(three_records, Mode.ALL).stats.N == 1
    assert build_collection(three_records, "initiative").stats.N == 3


def test_group_doc_ids_and_counts(three_records):
    coll = build_collection(three_records, Mode.COMMITTEE)
    assert [d.doc_id for d in coll.documents] == ["s1|c1", "s1|c2"]
    assert dict(coll.document("s1|c1").term_freqs) == {"budget": 1, "policy": 1, "water": 2}


def test_unknown_mode():
    with pytest.raises(UnknownMode):
        Mode.parse("party")


def test_committee_mode_rejects_missing_ids():
    records = [rec("r1", committee=""), rec("r2", committee="c1")]
    coll = build_collection(records, Mode.COMMITTEE)
    assert coll.rejected_records == 1
    assert coll.stats.N == 1


def test_empty_groups_dropped():
    records = [rec("r1", speaker="a", text="a b c"), rec("r2", speaker="b", text="real words")]
    coll = build_collection(records, Mode.ALL)
    assert [d.doc_id for d in coll.documents] == ["b"]
    assert coll.dropped_groups == 1


def test_everything_empty_is_an_error():
    with pytest.raises(InsufficientData):
        build_collection([rec("r1", text="a b")], Mode.ALL)
    with pytest.raises(InsufficientData):
        build_collection([], Mode.ALL)


def test_duplicate_record_id():
    with pytest.raises(MalformedInput):
        build_collection([rec("r1"), rec("r1")], Mode.ALL)


def test_grouping_is_order_independent(three_records):
    a = build_collection(three_records, Mode.COMMITTEE)
    b = build_collection(list(reversed(three_records)), Mode.COMMITTEE)
    assert a == b


def _speaker_with(n_inits, speaker):
    return [rec(f"{speaker}-{i}", speaker=speaker, initiative=f"i{i}", text="some text") for i in range(n_inits)]


def test_filter_speakers_boundary():
    coll = build_collection(_speaker_with(9, "nine") + _speaker_with(10, "ten"), Mode.ALL)
    kept = filter_speakers(coll, 10)
    assert [d.doc_id for d in kept.documents] == ["ten"]
    assert kept.stats == collection_stats(kept.documents)
    assert filter_speakers(coll, 0) is coll
    with pytest.raises(InsufficientData):
        filter_speakers(coll, 11)


def test_collection_stats_examples():
    s = collection_stats([doc("d1", a=2, b=1), doc("d2", a=1)])
    assert (s.N, s.M, s.doc_freq["a"], s.coll_freq["a"]) == (2, 4, 2, 3)
    s = collection_stats([doc("d1", a=1)])
    assert (s.N, s.M) == (1, 1)
    s = collection_stats([doc("d1", a=1, b=2), doc("d2", c=4)])
    assert set(s.doc_freq.values()) == {1}


words = st.lists(st.sampled_from(["aa", "bb", "cc", "dd", "ee", "ff"]), min_size=1, max_size=20)


@given(st.lists(st.tuples(st.sampled_from(["s1", "s2", "s3"]), words), min_size=1, max_size=12))
def test_lengths_sum_to_M(items):
    records = [rec(f"r{i}", speaker=s, text=" ".join(w)) for i, (s, w) in enumerate(items)]
    coll = build_collection(records, Mode.ALL)
    assert sum(d.length for d in coll.documents) == coll.stats.M
    assert collection_stats(coll.documents) == coll.stats


def test_read_records_reports_line(tmp_path):
    path = tmp_path / "r.jsonl"
    good = json.dumps({"record_id": "1", "speaker_id": "s", "text": "hi there"})
    path.write_text(good + "\n\n{not json\n", encoding="utf-8")
    with pytest.raises(MalformedInput, match=r"r\.jsonl:3"):
        read_records(path)


def test_read_records_missing_key(tmp_path):
    path = tmp_path / "r.jsonl"
    path.write_text(json.dumps({"record_id": "1", "text": "x"}) + "\n", encoding="utf-8")
    with pytest.raises(MalformedInput, match="speaker_id"):
        read_records(path)


def test_collection_roundtrip(tmp_path, three_records):
    coll = build_collection(three_records, Mode.COMMITTEE)
    save_collection(coll, tmp_path / "c.json")
    assert load_collection(tmp_path / "c.json") == coll
    first = (tmp_path / "c.json").read_bytes()
    save_collection(load_collection(tmp_path / "c.json"), tmp_path / "c.json")
    assert (tmp_path / "c.json").read_bytes() == first


def test_collection_version_checked(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"format": "termselect/collection", "version": 99}))
    with pytest.raises(MalformedInput):
        load_collection(tmp_path / "c.json")
