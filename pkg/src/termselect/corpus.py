"""Speech ingestion: tokenization, grouping into source collections, corpus counts."""

from __future__ import annotations

import enum
import json
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InsufficientData, MalformedInput, UnknownMode

logger = logging.getLogger(__name__)

COLLECTION_FORMAT = "termselect/collection"
COLLECTION_VERSION = 1

# Unicode-aware alphanumeric run (\w minus underscore).
_TOKEN_RE = re.compile(r"[^\W_]+")


class Mode(str, enum.Enum):
    ALL = "all"
    COMMITTEE = "committee"
    INITIATIVE = "initiative"

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, Mode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise UnknownMode(f"unknown grouping mode {value!r}") from None


@dataclass(frozen=True)
class RawRecord:
    record_id: str
    speaker_id: str
    committee_id: str
    initiative_id: str
    text: str


@dataclass(frozen=True)
class TokenizedDocument:
    doc_id: str
    group_key: tuple[str, ...]
    term_freqs: Mapping[str, int]
    length: int

    @property
    def speaker_id(self) -> str:
        return self.group_key[0]

    @classmethod
    def from_counts(cls, doc_id: str, group_key: tuple[str, ...], counts: Mapping[str, int]) -> "TokenizedDocument":
        freqs = {t: int(counts[t]) for t in sorted(counts) if counts[t] > 0}
        return cls(doc_id, tuple(group_key), freqs, sum(freqs.values()))


@dataclass(frozen=True)
class CollectionStats:
    N: int
    M: int
    doc_freq: Mapping[str, int]
    coll_freq: Mapping[str, int]


@dataclass(frozen=True)
class SourceCollection:
    mode: Mode
    documents: tuple[TokenizedDocument, ...]
    stats: CollectionStats
    # Distinct initiatives per speaker over all ingested records; used by filter_speakers.
    speaker_initiatives: Mapping[str, frozenset[str]] = field(default_factory=dict)
    dropped_groups: int = 0
    rejected_records: int = 0

    def document(self, doc_id: str) -> TokenizedDocument:
        for doc in self.documents:
            if doc.doc_id == doc_id:
                return doc
        raise KeyError(doc_id)


def tokenize(text: str, stopwords: Iterable[str] = ()) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop stopwords and 1-char tokens.

    >>> tokenize("La educación, la educación pública", {"la"})
    ['educación', 'educación', 'pública']
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    return [tok for tok in _TOKEN_RE.findall(text.lower()) if len(tok) >= 2 and tok not in stop]


def collection_stats(documents: Sequence[TokenizedDocument]) -> CollectionStats:
    if not documents:
        raise InsufficientData("cannot compute statistics of an empty document set")
    doc_freq: Counter[str] = Counter()
    coll_freq: Counter[str] = Counter()
    for doc in documents:
        doc_freq.update(doc.term_freqs.keys())
        coll_freq.update(doc.term_freqs)
    return CollectionStats(
        N=len(documents),
        M=sum(doc.length for doc in documents),
        doc_freq=dict(sorted(doc_freq.items())),
        coll_freq=dict(sorted(coll_freq.items())),
    )


def _group_key(record: RawRecord, mode: Mode) -> tuple[str, ...] | None:
    if mode is Mode.ALL:
        return (record.speaker_id,)
    secondary = record.committee_id if mode is Mode.COMMITTEE else record.initiative_id
    if not secondary:
        return None
    return (record.speaker_id, secondary)


def _doc_id(key: tuple[str, ...]) -> str:
    return "|".join(key)


def build_collection(
    records: Sequence[RawRecord],
    mode: Mode | str,
    stopwords: Iterable[str] = (),
) -> SourceCollection:
    """Group speeches into one virtual document per speaker (or speaker/committee,
    speaker/initiative pair) and sum the token counts of the members.

    Records lacking the id needed by ``mode`` are rejected; groups that tokenize
    to nothing are dropped. Both counts are kept on the returned collection.
    """
    mode = Mode.parse(mode)
    if not records:
        raise InsufficientData("no records to build a collection from")
    stop = set(stopwords)

    seen: set[str] = set()
    groups: dict[tuple[str, ...], Counter[str]] = {}
    initiatives: dict[str, set[str]] = defaultdict(set)
    rejected = 0
    for rec in records:
        if rec.record_id in seen:
            raise MalformedInput(f"duplicate record_id {rec.record_id!r}")
        seen.add(rec.record_id)
        if rec.initiative_id:
            initiatives[rec.speaker_id].add(rec.initiative_id)
        key = _group_key(rec, mode)
        if key is None:
            rejected += 1
            continue
        groups.setdefault(key, Counter()).update(tokenize(rec.text, stop))

    documents = []
    dropped = 0
    for key in sorted(groups):
        counts = groups[key]
        if not counts:
            dropped += 1
            continue
        documents.append(TokenizedDocument.from_counts(_doc_id(key), key, counts))
    if dropped:
        logger.warning("dropped %d group(s) with no tokens after tokenization", dropped)
    if rejected:
        logger.warning("rejected %d record(s) lacking a %s id", rejected, mode.value)
    if not documents:
        raise InsufficientData("every group was empty after tokenization")

    return SourceCollection(
        mode=mode,
        documents=tuple(documents),
        stats=collection_stats(documents),
        speaker_initiatives={s: frozenset(v) for s, v in sorted(initiatives.items())},
        dropped_groups=dropped,
        rejected_records=rejected,
    )


def filter_speakers(collection: SourceCollection, min_initiatives: int) -> SourceCollection:
    """Drop every document of a speaker seen in fewer than ``min_initiatives`` initiatives."""
    if min_initiatives < 0:
        raise ValueError("min_initiatives must be >= 0")
    if min_initiatives == 0:
        return collection
    keep = {
        s for s, inits in collection.speaker_initiatives.items() if len(inits) >= min_initiatives
    }
    docs = tuple(d for d in collection.documents if d.speaker_id in keep)
    if not docs:
        raise InsufficientData(f"no speaker has at least {min_initiatives} initiatives")
    return SourceCollection(
        mode=collection.mode,
        documents=docs,
        stats=collection_stats(docs),
        speaker_initiatives={s: v for s, v in collection.speaker_initiatives.items() if s in keep},
        dropped_groups=collection.dropped_groups,
        rejected_records=collection.rejected_records,
    )


# --- file formats -----------------------------------------------------------

_REQUIRED_KEYS = ("record_id", "speaker_id", "text")


def parse_record(obj: object) -> RawRecord:
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    missing = [k for k in _REQUIRED_KEYS if k not in obj]
    if missing:
        raise ValueError(f"missing key(s): {', '.join(missing)}")
    if not isinstance(obj["text"], str):
        raise ValueError("text must be a string")
    rec = RawRecord(
        record_id=str(obj["record_id"]),
        speaker_id=str(obj["speaker_id"]),
        committee_id=str(obj.get("committee_id") or ""),
        initiative_id=str(obj.get("initiative_id") or ""),
        text=obj["text"],
    )
    if not rec.speaker_id:
        raise ValueError("speaker_id must be non-empty")
    return rec


def read_records(path: str | Path) -> list[RawRecord]:
    """Read a JSON Lines corpus. Blank lines are skipped."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(parse_record(json.loads(line)))
            except (json.JSONDecodeError, ValueError) as exc:
                raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
    return records


def read_stopwords(path: str | Path) -> set[str]:
    with open(path, encoding="utf-8") as fh:
        return {line.strip().lower() for line in fh if line.strip()}


def collection_to_dict(collection: SourceCollection) -> dict:
    return {
        "format": COLLECTION_FORMAT,
        "version": COLLECTION_VERSION,
        "mode": collection.mode.value,
        "N": collection.stats.N,
        "M": collection.stats.M,
        "dropped_groups": collection.dropped_groups,
        "rejected_records": collection.rejected_records,
        "speaker_initiatives": {s: sorted(v) for s, v in collection.speaker_initiatives.items()},
        "documents": [
            {"doc_id": d.doc_id, "group_key": list(d.group_key), "term_freqs": dict(d.term_freqs)}
            for d in collection.documents
        ],
    }


def collection_from_dict(data: Mapping) -> SourceCollection:
    if data.get("format") != COLLECTION_FORMAT:
        raise MalformedInput(f"not a collection file (format={data.get('format')!r})")
    if data.get("version") != COLLECTION_VERSION:
        raise MalformedInput(f"unsupported collection version {data.get('version')!r}")
    docs = tuple(
        TokenizedDocument.from_counts(d["doc_id"], tuple(d["group_key"]), d["term_freqs"])
        for d in data["documents"]
    )
    return SourceCollection(
        mode=Mode.parse(data["mode"]),
        documents=docs,
        stats=collection_stats(docs),
        speaker_initiatives={s: frozenset(v) for s, v in data["speaker_initiatives"].items()},
        dropped_groups=int(data.get("dropped_groups", 0)),
        rejected_records=int(data.get("rejected_records", 0)),
    )


def save_collection(collection: SourceCollection, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(collection_to_dict(collection), fh, ensure_ascii=False, sort_keys=True, indent=1)
        fh.write("\n")


def load_collection(path: str | Path) -> SourceCollection:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    return collection_from_dict(data)
