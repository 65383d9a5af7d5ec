"""Concentration analytics over ranked term lists, exported as CSV for plotting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np
from numpy.typing import ArrayLike

from .corpus import SourceCollection
from .cutoff import cutoff_sc, similarity_curve
from .errors import ZeroMean
from .weighting import Measure, RankedTermList, rank_collection


@dataclass(frozen=True)
class ConcentrationCurve:
    doc_id: str
    fractions: np.ndarray
    similarities: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fractions.tolist(), self.similarities.tolist()))


def coefficient_of_variation(v: ArrayLike) -> float:
    """Population standard deviation over mean."""
    w = np.asarray(v, dtype=float)
    if w.size == 0:
        raise ZeroMean("coefficient of variation of an empty vector")
    mean = w.mean()
    if not mean > 0:
        raise ZeroMean("coefficient of variation needs a positive mean")
    return float(w.std() / mean)


def concentration_curve(L: RankedTermList | ArrayLike, doc_id: str | None = None) -> ConcentrationCurve:
    """Points (i/n, Sim(D^i, D)) for i = 1..n; the last point is exactly (1, 1)."""
    sims = similarity_curve(L)
    n = sims.size
    fractions = np.arange(1, n + 1) / n
    fractions[-1] = 1.0
    if doc_id is None:
        doc_id = L.doc_id if isinstance(L, RankedTermList) else ""
    return ConcentrationCurve(doc_id, fractions, sims)


def _nonempty(rankings: Sequence[RankedTermList]) -> list[RankedTermList]:
    return [r for r in rankings if r.entries]


def histogram_fractions(values: Sequence[float], bin_width: float) -> list[tuple[float, float, float]]:
    """Bin values into [k*w, (k+1)*w) and return (lo, hi, fraction) for every bin
    between the lowest and highest occupied one."""
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    if not len(values):
        return []
    idx = [math.floor(v / bin_width) for v in values]
    lo, hi = min(idx), max(idx)
    counts = [0] * (hi - lo + 1)
    for k in idx:
        counts[k - lo] += 1
    total = len(values)
    return [
        ((lo + j) * bin_width, (lo + j + 1) * bin_width, c / total) for j, c in enumerate(counts)
    ]


def cv_values(rankings: Sequence[RankedTermList]) -> list[tuple[str, float]]:
    return [(r.doc_id, coefficient_of_variation(r.weights)) for r in _nonempty(rankings)]


def cv_histogram(
    collection: SourceCollection, measure: Measure | str, bin_width: float = 0.25
) -> list[tuple[float, float, float]]:
    """Distribution of per-document CVs of the positive weights under ``measure``."""
    rankings = rank_collection(collection.documents, measure, collection.stats)
    return histogram_fractions([cv for _, cv in cv_values(rankings)], bin_width)


@dataclass(frozen=True)
class SizeRow:
    doc_id: str
    n: int
    cutoffs: tuple[int, ...]

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(l / self.n for l in self.cutoffs)


@dataclass(frozen=True)
class SizeTable:
    thresholds: tuple[float, ...]
    rows: tuple[SizeRow, ...]

    def mean_std(self) -> list[tuple[float, float]]:
        """Per-threshold mean and population standard deviation of the cutoffs."""
        if not self.rows:
            return [(math.nan, math.nan)] * len(self.thresholds)
        arr = np.array([r.cutoffs for r in self.rows], dtype=float)
        return list(zip(arr.mean(axis=0).tolist(), arr.std(axis=0).tolist()))


def size_table_from_rankings(rankings: Sequence[RankedTermList], sc_thresholds: Sequence[float]) -> SizeTable:
    thresholds = tuple(float(t) for t in sc_thresholds)
    rows = tuple(
        SizeRow(r.doc_id, r.n, tuple(cutoff_sc(r, t) for t in thresholds))
        for r in _nonempty(rankings)
    )
    return SizeTable(thresholds, rows)


def cutoff_vs_size_table(
    collection: SourceCollection, measure: Measure | str, sc_thresholds: Sequence[float]
) -> SizeTable:
    rankings = rank_collection(collection.documents, measure, collection.stats)
    return size_table_from_rankings(rankings, sc_thresholds)


# --- CSV writers ---------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _label(t: float) -> str:
    return f"{t:g}"


def write_curves_csv(rankings: Sequence[RankedTermList], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["doc_id", "fraction", "similarity"])
    for r in _nonempty(rankings):
        curve = concentration_curve(r)
        for x, y in curve.points:
            writer.writerow([r.doc_id, _fmt(x), _fmt(y)])


def write_histogram_csv(hist: Sequence[tuple[float, float, float]], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["bin_lo", "bin_hi", "fraction"])
    for lo, hi, frac in hist:
        writer.writerow([_fmt(lo), _fmt(hi), _fmt(frac)])


def write_size_table_csv(table: SizeTable, fh: TextIO) -> None:
    """Per-document rows, then ``__mean__`` and ``__std__`` summary rows."""
    labels = [_label(t) for t in table.thresholds]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["doc_id", "n"] + [f"l_{x}" for x in labels] + [f"frac_{x}" for x in labels])
    for row in table.rows:
        writer.writerow([row.doc_id, row.n, *row.cutoffs, *(_fmt(f) for f in row.fractions)])
    stats = table.mean_std()
    if table.rows:
        n_mean = _fmt(float(np.mean([r.n for r in table.rows])))
        n_std = _fmt(float(np.std([r.n for r in table.rows])))
        fr = np.array([r.fractions for r in table.rows])
        writer.writerow(["__mean__", n_mean, *(_fmt(m) for m, _ in stats), *(_fmt(x) for x in fr.mean(axis=0))])
        writer.writerow(["__std__", n_std, *(_fmt(s) for _, s in stats), *(_fmt(x) for x in fr.std(axis=0))])

