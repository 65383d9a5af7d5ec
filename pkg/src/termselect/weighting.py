"""Term weights (TF, TFIDF, PPMI, Diff) and the ranked term lists cutoffs consume.

All logarithms are natural. Non-positive weights never enter a ranking, so the
clamp that turns PMI into PPMI (and the one applied to Diff) doubles as a
natural cutoff.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .corpus import CollectionStats, TokenizedDocument
from .errors import DegenerateCollection, TermAbsent


class Measure(str, enum.Enum):
    TF = "tf"
    TFIDF = "tfidf"
    PPMI = "ppmi"
    DIFF = "diff"

    @classmethod
    def parse(cls, value: "Measure | str") -> "Measure":
        if isinstance(value, Measure):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown weighting measure {value!r}") from None


@dataclass(frozen=True)
class WeightedTerm:
    term: str
    weight: float


@dataclass(frozen=True)
class RankedTermList:
    doc_id: str
    entries: tuple[WeightedTerm, ...]
    measure: Measure
    # True when every term of the document had a non-positive weight.
    all_nonpositive: bool = False

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def weights(self) -> np.ndarray:
        return np.fromiter((e.weight for e in self.entries), dtype=float, count=len(self.entries))

    @property
    def terms(self) -> list[str]:
        return [e.term for e in self.entries]


def _freq(term: str, doc: TokenizedDocument) -> int:
    try:
        return doc.term_freqs[term]
    except KeyError:
        raise TermAbsent(f"term {term!r} does not occur in {doc.doc_id!r}") from None


def tf(term: str, doc: TokenizedDocument) -> float:
    return float(_freq(term, doc))


def tfidf(term: str, doc: TokenizedDocument, stats: CollectionStats) -> float:
    f = _freq(term, doc)
    return f * math.log(stats.N / stats.doc_freq[term])


def ppmi(term: str, doc: TokenizedDocument, stats: CollectionStats) -> float:
    """max(0, ln(f_tj * M / (cf_t * |D_j|)))."""
    f = _freq(term, doc)
    return max(0.0, math.log(f * stats.M / (stats.coll_freq[term] * doc.length)))


def diff(term: str, doc: TokenizedDocument, stats: CollectionStats) -> float:
    """In-document relative frequency minus relative frequency in the rest of the
    collection, clamped at zero."""
    f = _freq(term, doc)
    outside = stats.M - doc.length
    if outside <= 0:
        raise DegenerateCollection(
            f"Diff needs text outside {doc.doc_id!r}; the collection has none"
        )
    return max(0.0, f / doc.length - (stats.coll_freq[term] - f) / outside)


_MEASURES: dict[Measure, Callable[..., float]] = {
    Measure.TF: lambda t, d, s: tf(t, d),
    Measure.TFIDF: tfidf,
    Measure.PPMI: ppmi,
    Measure.DIFF: diff,
}


def weigh(term: str, doc: TokenizedDocument, measure: Measure | str, stats: CollectionStats) -> float:
    return _MEASURES[Measure.parse(measure)](term, doc, stats)


def rank_terms(doc: TokenizedDocument, measure: Measure | str, stats: CollectionStats) -> RankedTermList:
    """Weigh every term of ``doc``, drop weights <= 0, sort by weight descending
    then term ascending."""
    measure = Measure.parse(measure)
    fn = _MEASURES[measure]
    scored = [(fn(t, doc, stats), t) for t in doc.term_freqs]
    kept = sorted(((w, t) for w, t in scored if w > 0), key=lambda wt: (-wt[0], wt[1]))
    entries = tuple(WeightedTerm(t, w) for w, t in kept)
    return RankedTermList(doc.doc_id, entries, measure, all_nonpositive=not entries)


def rank_collection(
    documents: Iterable[TokenizedDocument], measure: Measure | str, stats: CollectionStats
) -> list[RankedTermList]:
    return [rank_terms(doc, measure, stats) for doc in documents]


def write_rankings_csv(rankings: Sequence[RankedTermList], fh: TextIO) -> None:
    """CSV with header ``doc_id,rank,term,weight``; ranks are 1-based."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["doc_id", "rank", "term", "weight"])
    for ranking in rankings:
        for rank, entry in enumerate(ranking.entries, start=1):
            writer.writerow([ranking.doc_id, rank, entry.term, f"{entry.weight:.12g}"])
