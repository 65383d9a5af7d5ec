"""Cutoff functions: how many of the top-ranked terms a profile keeps.

Every ``cutoff_*`` function takes the weights of a ranked list (anything array-like,
sorted non-increasing, or a :class:`RankedTermList`) and returns the cutoff index
``l``, i.e. the profile keeps the first ``l`` terms. Zero weights are allowed here so
that the axiom checks can pad lists with irrelevant terms.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO, Union

import numpy as np
from numpy.typing import ArrayLike

from .errors import EmptyRanking, InvalidCutoffSpec
from .weighting import Measure, RankedTermList, WeightedTerm

Weights = Union[ArrayLike, RankedTermList]

# Weights within this fraction of the list maximum (similarities within this
# absolute distance) of a threshold count as sitting on it. Keeps exact-math
# ties from flipping under rounding, e.g. after rescaling a list.
TIE_RTOL = 1e-12


class CutoffKind(str, enum.Enum):
    FN = "fn"  # fixed number of terms
    FP = "fp"  # fixed percentage of terms
    AT = "at"  # absolute weight threshold
    VT = "vt"  # threshold relative to the heaviest weight
    RC = "rc"  # threshold relative to the min-max weight range
    SC = "sc"  # cosine similarity of the prefix with the full list

    @classmethod
    def parse(cls, value: "CutoffKind | str") -> "CutoffKind":
        if isinstance(value, CutoffKind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidCutoffSpec(f"unknown cutoff kind {value!r}") from None


def _as_weights(L: Weights) -> np.ndarray:
    if isinstance(L, RankedTermList):
        return L.weights
    return np.asarray(L, dtype=float).reshape(-1)


def _require_nonempty(w: np.ndarray) -> None:
    if w.size == 0:
        raise EmptyRanking("cutoff needs at least one weighted term")


def _check_per(per: float, *, allow_zero: bool = False, allow_hundred: bool = True) -> float:
    per = float(per)
    lo_ok = per >= 0 if allow_zero else per > 0
    hi_ok = per <= 100 if allow_hundred else per < 100
    if not (lo_ok and hi_ok) or math.isnan(per):
        lo = "[0" if allow_zero else "(0"
        hi = "100]" if allow_hundred else "100)"
        raise InvalidCutoffSpec(f"percentage {per} outside {lo}, {hi}")
    return per


def _last_true(mask: np.ndarray) -> int:
    """1-based index of the last True entry, 0 when there is none."""
    hits = np.flatnonzero(mask)
    return int(hits[-1]) + 1 if hits.size else 0


def cutoff_fn(L: Weights, m: int) -> int:
    if m < 1 or int(m) != m:
        raise InvalidCutoffSpec(f"FN needs an integer m >= 1, got {m}")
    return min(int(m), _as_weights(L).size)


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def cutoff_fp(L: Weights, per: float) -> int:
    per = _check_per(per)
    return round_half_away(_as_weights(L).size * per / 100)


def cutoff_at(L: Weights, delta: float) -> int:
    if not delta > 0:
        raise InvalidCutoffSpec(f"AT needs delta > 0, got {delta}")
    return _last_true(_as_weights(L) >= delta)


def cutoff_vt(L: Weights, per: float) -> int:
    per = _check_per(per)
    w = _as_weights(L)
    _require_nonempty(w)
    hi = w.max()
    return _last_true(w >= hi * (per / 100) - TIE_RTOL * hi)


def cutoff_rc(L: Weights, per: float) -> int:
    """Largest i with w_i strictly above ``min + per/100 * (max - min)``.

    A flat list (max == min) therefore yields 0.
    """
    per = _check_per(per, allow_zero=True, allow_hundred=False)
    w = _as_weights(L)
    _require_nonempty(w)
    lo, hi = w.min(), w.max()
    return _last_true(w > lo + (per / 100) * (hi - lo) + TIE_RTOL * hi)


def similarity_curve(L: Weights) -> np.ndarray:
    """Cosine similarity of every prefix with the full list: entry i-1 holds Sim(D^i, D).

    With the prefix sharing the full list's weights the cosine reduces to
    sqrt(sum_{k<=i} w_k^2 / sum_k w_k^2).
    """
    w = _as_weights(L)
    _require_nonempty(w)
    sq = np.cumsum(w * w)
    total = sq[-1]
    if not total > 0:
        raise EmptyRanking("all weights are zero")
    sims = np.sqrt(sq / total)
    sims[-1] = 1.0
    return sims


def sim_prefix(L: Weights, i: int) -> float:
    w = _as_weights(L)
    _require_nonempty(w)
    if not 0 <= i <= w.size:
        raise IndexError(f"prefix length {i} outside [0, {w.size}]")
    if i == 0:
        return 0.0
    return float(similarity_curve(w)[i - 1])


def cutoff_sc(L: Weights, per: float) -> int:
    """Smallest i whose prefix reaches cosine similarity per/100 with the whole list."""
    per = _check_per(per)
    sims = similarity_curve(L)
    # sims is non-decreasing, so the first index reaching the target is a bisection.
    return int(np.searchsorted(sims, per / 100 - TIE_RTOL, side="left")) + 1


@dataclass(frozen=True)
class CutoffSpec:
    kind: CutoffKind
    param: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CutoffKind.parse(self.kind))
        p = float(self.param)
        if self.kind is CutoffKind.FN:
            if p < 1 or p != int(p):
                raise InvalidCutoffSpec(f"FN needs an integer m >= 1, got {self.param}")
        elif self.kind is CutoffKind.AT:
            if not p > 0:
                raise InvalidCutoffSpec(f"AT needs delta > 0, got {self.param}")
        elif self.kind is CutoffKind.RC:
            _check_per(p, allow_zero=True, allow_hundred=False)
        else:
            _check_per(p)
        object.__setattr__(self, "param", p)

    @property
    def label(self) -> str:
        return f"{self.kind.value.upper()}{self.param:g}"


_DISPATCH = {
    CutoffKind.FN: lambda w, p: cutoff_fn(w, int(p)),
    CutoffKind.FP: cutoff_fp,
    CutoffKind.AT: cutoff_at,
    CutoffKind.VT: cutoff_vt,
    CutoffKind.RC: cutoff_rc,
    CutoffKind.SC: cutoff_sc,
}


def cutoff_index(L: Weights, spec: CutoffSpec) -> int:
    return _DISPATCH[spec.kind](L, spec.param)


@dataclass(frozen=True)
class Profile:
    doc_id: str
    selected: tuple[WeightedTerm, ...]
    cutoff: CutoffSpec
    measure: Measure
    original_size: int

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.selected)

    @property
    def terms(self) -> list[str]:
        return [e.term for e in self.selected]

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "measure": self.measure.value,
            "cutoff_kind": self.cutoff.kind.value,
            "param": self.cutoff.param,
            "l": self.l,
            "n": self.original_size,
            "terms": [{"term": e.term, "weight": e.weight} for e in self.selected],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Profile":
        return cls(
            doc_id=data["doc_id"],
            selected=tuple(WeightedTerm(t["term"], float(t["weight"])) for t in data["terms"]),
            cutoff=CutoffSpec(data["cutoff_kind"], data["param"]),
            measure=Measure.parse(data["measure"]),
            original_size=int(data.get("n", len(data["terms"]))),
        )


def apply_cutoff(L: RankedTermList, spec: CutoffSpec) -> Profile:
    """Keep the first ``l`` entries of ``L``; an empty ranking gives an empty profile."""
    l = cutoff_index(L, spec) if L.entries else 0
    return Profile(L.doc_id, L.entries[:l], spec, L.measure, L.n)


def build_profiles(rankings: Iterable[RankedTermList], spec: CutoffSpec) -> list[Profile]:
    return [apply_cutoff(r, spec) for r in rankings]


def write_profiles_jsonl(profiles: Sequence[Profile], fh: TextIO) -> None:
    for profile in profiles:
        fh.write(json.dumps(profile.to_dict(), ensure_ascii=False, sort_keys=True))
        fh.write("\n")


def read_profiles_jsonl(fh: TextIO) -> list[Profile]:
    return [Profile.from_dict(json.loads(line)) for line in fh if line.strip()]
