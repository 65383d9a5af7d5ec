"""Profile-based document filtering: BM25 over virtual documents, subprofile
fusion, NDCG@k, and the repeated-holdout evaluation loop."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .corpus import (
    Mode,
    RawRecord,
    SourceCollection,
    TokenizedDocument,
    build_collection,
    tokenize,
)
from .cutoff import CutoffSpec, Profile, apply_cutoff, round_half_away
from .errors import DuplicateProfileId, InsufficientData, MalformedInput, NoRelevant
from .weighting import Measure, rank_terms

logger = logging.getLogger(__name__)

INDEX_FORMAT = "termselect/bm25-index"
INDEX_VERSION = 1


@dataclass(frozen=True)
class VirtualDocument:
    profile_id: str
    speaker_id: str
    term_freqs: Mapping[str, int]

    @property
    def length(self) -> int:
        return sum(self.term_freqs.values())


def virtual_document(profile: Profile, source: TokenizedDocument) -> VirtualDocument:
    """Bag of words made of the profile's selected terms at their source counts."""
    if profile.doc_id != source.doc_id:
        raise ValueError(f"profile {profile.doc_id!r} does not belong to {source.doc_id!r}")
    freqs = {t: source.term_freqs[t] for t in sorted(profile.terms)}
    return VirtualDocument(profile.doc_id, source.speaker_id, freqs)


def virtual_documents(profiles: Sequence[Profile], collection: SourceCollection) -> list[VirtualDocument]:
    by_id = {d.doc_id: d for d in collection.documents}
    return [virtual_document(p, by_id[p.doc_id]) for p in profiles]


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise ValueError(f"k1 must be >= 0, got {self.k1}")
        if not 0 <= self.b <= 1:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")


class InvertedIndex:
    """Postings over virtual documents, held in profile_id order.

    Immutable once built; safe to query from several threads.
    """

    def __init__(self, docs: Iterable[VirtualDocument]):
        docs = sorted(docs, key=lambda d: d.profile_id)
        ids = [d.profile_id for d in docs]
        if len(set(ids)) != len(ids):
            dup = next(i for i, c in Counter(ids).items() if c > 1)
            raise DuplicateProfileId(f"profile id {dup!r} indexed twice")
        self.profile_ids: list[str] = ids
        self.speaker_ids: list[str] = [d.speaker_id for d in docs]
        self.lengths = np.array([d.length for d in docs], dtype=float)
        self.avg_length = float(self.lengths.mean()) if len(docs) else 0.0
        postings: dict[str, list[tuple[int, int]]] = defaultdict(list)
        for idx, d in enumerate(docs):
            for term, tf in d.term_freqs.items():
                postings[term].append((idx, tf))
        self.postings: dict[str, tuple[np.ndarray, np.ndarray]] = {
            t: (np.array([i for i, _ in p], dtype=np.int64), np.array([f for _, f in p], dtype=float))
            for t, p in sorted(postings.items())
        }
        self._position = {pid: i for i, pid in enumerate(ids)}

    def __len__(self) -> int:
        return len(self.profile_ids)

    def doc_freq(self, term: str) -> int:
        entry = self.postings.get(term)
        return 0 if entry is None else int(entry[0].size)

    def idf(self, term: str) -> float:
        """ln(1 + (P - n_t + 0.5) / (n_t + 0.5)); never negative."""
        n_t = self.doc_freq(term)
        return math.log(1.0 + (len(self) - n_t + 0.5) / (n_t + 0.5))

    def tf(self, term: str, profile_id: str) -> int:
        entry = self.postings.get(term)
        if entry is None:
            return 0
        idx = self._position[profile_id]
        hit = np.flatnonzero(entry[0] == idx)
        return int(entry[1][hit[0]]) if hit.size else 0

    def length(self, profile_id: str) -> float:
        return float(self.lengths[self._position[profile_id]])

    # persistence

    def to_dict(self) -> dict:
        docs = []
        for i, pid in enumerate(self.profile_ids):
            docs.append({"profile_id": pid, "speaker_id": self.speaker_ids[i], "term_freqs": {}})
        for term, (idx, tfs) in self.postings.items():
            for i, f in zip(idx.tolist(), tfs.tolist()):
                docs[i]["term_freqs"][term] = int(f)
        return {"format": INDEX_FORMAT, "version": INDEX_VERSION, "documents": docs}

    @classmethod
    def from_dict(cls, data: Mapping) -> "InvertedIndex":
        if data.get("format") != INDEX_FORMAT or data.get("version") != INDEX_VERSION:
            raise MalformedInput(
                f"unsupported index file (format={data.get('format')!r}, version={data.get('version')!r})"
            )
        return cls(VirtualDocument(d["profile_id"], d["speaker_id"], d["term_freqs"]) for d in data["documents"])

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def index_profiles(docs: Iterable[VirtualDocument]) -> InvertedIndex:
    return InvertedIndex(docs)


def _tf_part(tf: np.ndarray | float, length: np.ndarray | float, avg: float, params: Bm25Params):
    norm = 1.0 - params.b + (params.b * length / avg if avg > 0 else 0.0)
    return tf * (params.k1 + 1.0) / (tf + params.k1 * norm)


def bm25_score(
    query_tf: Mapping[str, int],
    vdoc: VirtualDocument | str,
    index: InvertedIndex,
    params: Bm25Params = Bm25Params(),
) -> float:
    """Okapi BM25 of one indexed profile; repeated query terms multiply their term.

    Collection statistics (P, n_t, average length) come from ``index``.
    """
    profile_id = vdoc.profile_id if isinstance(vdoc, VirtualDocument) else vdoc
    length = index.length(profile_id)
    score = 0.0
    for term in sorted(query_tf):
        tf = index.tf(term, profile_id)
        if tf:
            score += query_tf[term] * index.idf(term) * _tf_part(tf, length, index.avg_length, params)
    return float(score)


@dataclass(frozen=True)
class Hit:
    profile_id: str
    speaker_id: str
    score: float


@dataclass(frozen=True)
class ScoredRanking:
    query_id: str
    hits: tuple[Hit, ...]


def query(
    index: InvertedIndex,
    query_tf: Mapping[str, int],
    k: int | None = None,
    params: Bm25Params = Bm25Params(),
    query_id: str = "",
) -> ScoredRanking:
    """Rank every profile sharing a term with the query; keep the top ``k``
    (all when None). Ties go to the smaller profile_id."""
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    scores = np.zeros(len(index))
    matched = np.zeros(len(index), dtype=bool)
    for term in sorted(query_tf):
        entry = index.postings.get(term)
        if entry is None:
            continue
        idx, tfs = entry
        part = _tf_part(tfs, index.lengths[idx], index.avg_length, params)
        scores[idx] += query_tf[term] * index.idf(term) * part
        matched[idx] = True
    cand = np.flatnonzero(matched)
    # index order is profile_id order, so a stable sort on -score breaks ties correctly
    order = cand[np.argsort(-scores[cand], kind="stable")]
    if k is not None:
        order = order[:k]
    hits = tuple(Hit(index.profile_ids[i], index.speaker_ids[i], float(scores[i])) for i in order)
    return ScoredRanking(query_id, hits)


def fuse_subprofiles(ranking: ScoredRanking) -> list[tuple[str, float]]:
    """Per-speaker sum of hit scores, each divided by log2(rank + 1)."""
    fused: dict[str, float] = defaultdict(float)
    for rank, hit in enumerate(ranking.hits, start=1):
        fused[hit.speaker_id] += hit.score / math.log2(rank + 1)
    return sorted(fused.items(), key=lambda kv: (-kv[1], kv[0]))


def ndcg_at_k(ranking: Sequence[str | tuple[str, float]], relevant: Iterable[str], k: int = 10) -> float:
    """Binary-gain NDCG@k of a ranked list of speaker ids."""
    relevant = set(relevant)
    if not relevant:
        raise NoRelevant("NDCG needs at least one relevant item")
    ids = [r[0] if isinstance(r, tuple) else r for r in ranking[:k]]
    dcg = sum(1.0 / math.log2(i + 1) for i, sid in enumerate(ids, start=1) if sid in relevant)
    ideal = sum(1.0 / math.log2(i + 1) for i in range(1, min(k, len(relevant)) + 1))
    return dcg / ideal


# --- repeated holdout ---------------------------------------------------------


@dataclass(frozen=True)
class EvalConfig:
    mode: Mode = Mode.ALL
    measure: Measure = Measure.DIFF
    # None keeps every positively weighted term (the "full" profile).
    cutoff: CutoffSpec | None = None
    bm25: Bm25Params = Bm25Params()
    min_initiatives: int = 10
    train_frac: float = 0.8
    repetitions: int = 5
    seed: int = 0
    k: int = 10
    stopwords: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "measure", Measure.parse(self.measure))
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))
        if not 0 < self.train_frac < 1:
            raise ValueError(f"train_frac must lie in (0, 1), got {self.train_frac}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.min_initiatives < 0:
            raise ValueError("min_initiatives must be >= 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def echo(self) -> dict:
        return {
            "mode": self.mode.value,
            "measure": self.measure.value,
            "cutoff": None if self.cutoff is None else {"kind": self.cutoff.kind.value, "param": self.cutoff.param},
            "bm25": asdict(self.bm25),
            "min_initiatives": self.min_initiatives,
            "train_frac": self.train_frac,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "k": self.k,
            "stopwords": len(self.stopwords),
        }


@dataclass
class RepetitionResult:
    repetition: int
    ndcg: dict[str, float]
    n_profiles: int
    mean_profile_size: float
    std_profile_size: float

    @property
    def mean(self) -> float:
        return float(np.mean(list(self.ndcg.values()))) if self.ndcg else 0.0


@dataclass
class EvaluationReport:
    config: dict
    repetitions: list[RepetitionResult] = field(default_factory=list)

    @property
    def grand_mean(self) -> float:
        return float(np.mean([r.mean for r in self.repetitions]))

    @property
    def grand_std(self) -> float:
        return float(np.std([r.mean for r in self.repetitions]))

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "grand_mean_ndcg": self.grand_mean,
            "grand_std_ndcg": self.grand_std,
            "repetitions": [
                {
                    "repetition": r.repetition,
                    "mean_ndcg": r.mean,
                    "queries": len(r.ndcg),
                    "profiles": r.n_profiles,
                    "mean_profile_size": r.mean_profile_size,
                    "std_profile_size": r.std_profile_size,
                    "ndcg": dict(sorted(r.ndcg.items())),
                }
                for r in self.repetitions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def write_csv(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["repetition", "query_id", "ndcg10"])
        for r in self.repetitions:
            for qid, value in sorted(r.ndcg.items()):
                writer.writerow([r.repetition, qid, repr(value)])


def eligible_speakers(records: Sequence[RawRecord], min_initiatives: int) -> set[str]:
    inits: dict[str, set[str]] = defaultdict(set)
    speakers = set()
    for rec in records:
        speakers.add(rec.speaker_id)
        if rec.initiative_id:
            inits[rec.speaker_id].add(rec.initiative_id)
    return {s for s in speakers if len(inits[s]) >= min_initiatives}


# Provenance recorded on uncut profiles: 100% of the terms.
_FULL = CutoffSpec("fp", 100)


def build_index(
    collection: SourceCollection, measure: Measure, cutoff: CutoffSpec | None
) -> tuple[InvertedIndex, list[Profile]]:
    """Weigh, cut, and index every document of ``collection``."""
    profiles = []
    for doc in collection.documents:
        ranking = rank_terms(doc, measure, collection.stats)
        if cutoff is None:
            profiles.append(Profile(doc.doc_id, ranking.entries, _FULL, ranking.measure, ranking.n))
        else:
            profiles.append(apply_cutoff(ranking, cutoff))
    return index_profiles(virtual_documents(profiles, collection)), profiles


def holdout_evaluate(records: Sequence[RawRecord], config: EvalConfig) -> EvaluationReport:
    """Repeated random split of initiatives into train/test.

    Profiles come from training speeches only. Each test initiative's full
    text is a query whose relevant speakers are the eligible participants.
    """
    keep = eligible_speakers(records, config.min_initiatives)
    kept = [r for r in records if r.speaker_id in keep]
    by_init: dict[str, list[RawRecord]] = defaultdict(list)
    for rec in kept:
        if rec.initiative_id:
            by_init[rec.initiative_id].append(rec)
    initiatives = sorted(by_init)
    if len(initiatives) < 2:
        raise InsufficientData(f"holdout needs >= 2 initiatives, found {len(initiatives)}")

    n_train = min(max(round_half_away(config.train_frac * len(initiatives)), 1), len(initiatives) - 1)
    report = EvaluationReport(config.echo())
    for rep in range(config.repetitions):
        rng = np.random.default_rng([int(config.seed), rep])
        perm = rng.permutation(len(initiatives))
        train = {initiatives[i] for i in perm[:n_train]}
        test = sorted(initiatives[i] for i in perm[n_train:])

        train_records = [r for r in kept if not r.initiative_id or r.initiative_id in train]
        collection = build_collection(train_records, config.mode, config.stopwords)
        index, profiles = build_index(collection, config.measure, config.cutoff)
        sizes = np.array([p.l for p in profiles], dtype=float)

        ndcg: dict[str, float] = {}
        for init in test:
            members = by_init[init]
            relevant = {r.speaker_id for r in members}
            text = "\n".join(r.text for r in sorted(members, key=lambda r: r.record_id))
            qtf = Counter(tokenize(text, config.stopwords))
            ranking = query(index, qtf, None, config.bm25, query_id=init)
            ndcg[init] = ndcg_at_k(fuse_subprofiles(ranking), relevant, config.k)
        report.repetitions.append(
            RepetitionResult(rep, ndcg, len(profiles), float(sizes.mean()), float(sizes.std()))
        )
        logger.info("repetition %d: mean NDCG@%d = %.4f", rep, config.k, report.repetitions[-1].mean)
    return report
