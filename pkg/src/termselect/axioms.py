"""Randomized verification of the concentration axioms for cutoff functions.

A cutoff function maps a non-increasing weight vector to an integer ``l``. Each
property compares ``l`` before and after a transformation of the vector:

========== ==========================================================
P1         one-hot vector {w, 0, ..., 0} gives l == 1
P2         the flat vector of the same length and mass gives the largest l
P3         appending zeros leaves l unchanged
P4         multiplying every weight by k > 0 leaves l unchanged
P5         adding h > 0 to every weight never decreases l
P6         moving mass from a lighter to a heavier term never increases l
wP6        two-sided transfer rule around the receiver's rank l_a+, for
           transfers that leave the receiver at its rank
wP6-resort wP6 for arbitrary transfers, receiver free to overtake (diagnostic)
P7         adding h to the heaviest weight never increases l
P7-poorer  removing h from the lightest weight never increases l
========== ==========================================================

Vectors are plain float arrays here (zeros allowed), unlike ranked term lists.
Transfer indices are 0-based; the rank ``l_a+`` is 1-based so it compares
directly with cutoff values.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .cutoff import CutoffKind, CutoffSpec, cutoff_index, similarity_curve
from .errors import InvalidAmount, InvalidTransfer, NonPositiveFactor, UnsupportedProperty

CutoffFn = Callable[[np.ndarray], int]


class Property(str, enum.Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"
    P6 = "P6"
    WP6 = "wP6"
    WP6_RESORT = "wP6-resort"
    P7 = "P7"
    P7_POORER = "P7-poorer"

    @classmethod
    def parse(cls, value: "Property | str") -> "Property":
        if isinstance(value, Property):
            return value
        for p in cls:
            if p.value.lower() == str(value).lower():
                return p
        raise UnsupportedProperty(f"unknown property {value!r}")


# Table of expectations: True = must hold, False = a counterexample is expected,
# missing = not applicable / not asserted.
EXPECTED_PATTERN: dict[CutoffKind, dict[Property, bool]] = {
    CutoffKind.FP: {
        Property.P3: False,
        Property.P4: True,
        Property.P5: True,
        Property.P6: True,
        Property.P7: True,
    },
    CutoffKind.VT: {
        Property.P1: True,
        Property.P2: True,
        Property.P3: True,
        Property.P4: True,
        Property.P5: True,
        Property.P6: False,
        Property.P7: True,
    },
    CutoffKind.RC: {
        Property.P1: True,
        Property.P2: True,
        Property.P3: False,
        Property.P4: True,
        Property.P5: True,
        Property.P6: False,
        Property.P7: True,
    },
    CutoffKind.SC: {
        Property.P1: True,
        Property.P2: True,
        Property.P3: True,
        Property.P4: True,
        Property.P5: True,
        Property.P6: False,
        Property.WP6: True,
        Property.P7: True,
    },
    CutoffKind.FN: {
        Property.P4: True,
        Property.P5: True,
        Property.P6: True,
        Property.P7: True,
    },
    CutoffKind.AT: {
        Property.P4: False,
    },
}

# FN and FP ignore weights, so the extremal properties say nothing about them.
_EXEMPT = {CutoffKind.FN: {Property.P1, Property.P2}, CutoffKind.FP: {Property.P1, Property.P2}}

SIM_TOL = 1e-9


# --- vectors and transformations --------------------------------------------


def weight_vector(values: ArrayLike) -> np.ndarray:
    """Validate and copy a weight vector: finite, non-negative, non-increasing."""
    v = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValueError("weights must be finite and non-negative")
    if np.any(np.diff(v) > 0):
        raise ValueError("weights must be sorted non-increasing")
    return v


def _desc(v: np.ndarray) -> np.ndarray:
    return np.sort(v)[::-1].copy()


def add_zeros(v: ArrayLike, k: int) -> np.ndarray:
    if k < 0:
        raise InvalidAmount("cannot append a negative number of zeros")
    return np.concatenate([np.asarray(v, dtype=float), np.zeros(int(k))])


def scale(v: ArrayLike, k: float) -> np.ndarray:
    if not k > 0:
        raise NonPositiveFactor(f"scale factor must be positive, got {k}")
    return np.asarray(v, dtype=float) * k


def shift_all(v: ArrayLike, h: float) -> np.ndarray:
    if not h > 0:
        raise InvalidAmount(f"shift must be positive, got {h}")
    return np.asarray(v, dtype=float) + h


def transfer(v: ArrayLike, a_idx: int, b_idx: int, h: float) -> tuple[np.ndarray, int]:
    """Move ``h`` from ``v[b_idx]`` to the heavier ``v[a_idx]`` and re-sort.

    Returns the new vector and ``l_a+``, the 1-based rank of the receiving weight
    in it. Among equal weights the receiver is ranked last, so a transfer that
    does not lift it above a heavier neighbour leaves ``l_a+ == a_idx + 1``.
    """
    w = np.asarray(v, dtype=float)
    n = w.size
    if not (0 <= a_idx < n and 0 <= b_idx < n) or a_idx == b_idx:
        raise InvalidTransfer(f"bad indices a={a_idx}, b={b_idx} for length {n}")
    if not w[a_idx] > w[b_idx]:
        raise InvalidTransfer("the receiving weight must be strictly heavier than the donor")
    if not 0 < h <= w[b_idx]:
        raise InvalidTransfer(f"amount {h} outside (0, {w[b_idx]}]")
    received = w[a_idx] + h
    out = w.copy()
    out[a_idx] = received
    out[b_idx] = w[b_idx] - h
    others = np.delete(out, a_idx)
    rank = int(np.count_nonzero(others >= received)) + 1
    return _desc(out), rank


def rank_preserving_limit(v: ArrayLike, a_idx: int, b_idx: int) -> float:
    """Largest transfer amount that keeps the receiver at its rank."""
    w = np.asarray(v, dtype=float)
    limit = float(w[b_idx])
    if a_idx > 0:
        limit = min(limit, float(w[a_idx - 1] - w[a_idx]))
    return limit


def enrich_top(v: ArrayLike, h: float) -> np.ndarray:
    if not h > 0:
        raise InvalidAmount(f"amount must be positive, got {h}")
    w = np.array(v, dtype=float)
    if w.size == 0:
        raise InvalidAmount("cannot enrich an empty vector")
    w[0] += h
    return _desc(w)


def impoverish_bottom(v: ArrayLike, h: float) -> np.ndarray:
    w = np.array(v, dtype=float)
    if w.size == 0:
        raise InvalidAmount("cannot impoverish an empty vector")
    if not 0 < h <= w[-1]:
        raise InvalidAmount(f"amount {h} outside (0, {w[-1]}]")
    w[-1] -= h
    return _desc(w)


# --- single property checks -------------------------------------------------


@dataclass
class PropertyVerdict:
    property: Property
    holds: bool
    # Present when holds is False: enough to replay the check exactly.
    witness: dict[str, Any] | None = None
    detail: dict[str, Any] = field(default_factory=dict)


def _resolve(cutoff: CutoffSpec | CutoffFn) -> CutoffFn:
    if isinstance(cutoff, CutoffSpec):
        return partial(cutoff_index, spec=cutoff)
    return cutoff


def _draw_params(prop: Property, v: np.ndarray, rng: np.random.Generator) -> dict[str, Any]:
    n = v.size
    mean = float(v.mean()) if n else 1.0
    mean = mean if mean > 0 else 1.0
    if prop in (Property.P1, Property.P2):
        return {}
    if prop is Property.P3:
        return {"k": int(rng.integers(1, max(2, n) + 1))}
    if prop is Property.P4:
        return {"k": float(10 ** rng.uniform(-3, 3))}
    if prop is Property.P5:
        return {"h": float(mean * 10 ** rng.uniform(-3, 2))}
    if prop is Property.P7:
        return {"h": float(max(v[0], mean) * 10 ** rng.uniform(-3, 1))}
    if prop is Property.P7_POORER:
        lo = float(v[-1])
        if not lo > 0:
            raise UnsupportedProperty("P7-poorer needs a positive lightest weight")
        # a quarter of the draws remove the lightest term's weight entirely
        if rng.uniform() < 0.25:
            return {"h": lo}
        return {"h": lo * float(rng.uniform(0.0, 1.0)) or lo}
    # transfers
    rank_preserving = prop is Property.WP6
    pair = _draw_pair(v, rng, rank_preserving)
    if pair is None:
        raise UnsupportedProperty(f"{prop.value} needs a heavier receiver and a positive lighter donor")
    a, b = pair
    limit = rank_preserving_limit(v, a, b) if rank_preserving else float(v[b])
    # Bias towards large transfers; they are the ones that move cutoffs.
    u = 1.0 - float(rng.uniform(0.0, 1.0)) ** 2
    return {"a": a, "b": b, "h": max(limit * u, limit * 1e-6)}


def _draw_pair(
    v: np.ndarray, rng: np.random.Generator, rank_preserving: bool
) -> tuple[int, int] | None:
    """Pick receiver a and donor b with v[a] > v[b] > 0 (v sorted non-increasing)."""
    positive = int(np.count_nonzero(v > 0))
    # first index holding a weight strictly below v[a]
    first_lower = np.searchsorted(-v, -v, side="right")
    ok = first_lower < positive
    if rank_preserving:
        # the receiver must be strictly lighter than its heavier neighbour
        ok[1:] &= v[:-1] > v[1:]
    candidates = np.flatnonzero(ok)
    if candidates.size == 0:
        return None
    a = int(candidates[rng.integers(candidates.size)])
    b = int(rng.integers(first_lower[a], positive))
    return a, b


def check_property(
    cutoff: CutoffSpec | CutoffFn,
    prop: Property | str,
    v: ArrayLike,
    params: Mapping[str, Any] | None = None,
    rng_seed: int | Sequence[int] | None = None,
) -> PropertyVerdict:
    """Evaluate one property's inequality on ``v`` and its transformed copy.

    Missing transformation parameters are drawn from ``rng_seed``; the verdict's
    witness records the parameters actually used.
    """
    prop = Property.parse(prop)
    fn = _resolve(cutoff)
    v = weight_vector(v)
    if v.size == 0 or not v[0] > 0:
        raise UnsupportedProperty("properties need a vector with a positive weight")
    if params is None:
        params = _draw_params(prop, v, np.random.default_rng(rng_seed))
    params = dict(params)

    transformed: np.ndarray
    extra: dict[str, Any] = {}
    if prop is Property.P1:
        transformed = np.zeros(max(v.size, 2))
        transformed[0] = v[0]
        before, after = None, fn(transformed)
        holds = after == 1
    elif prop is Property.P2:
        transformed = np.full(v.size, v.sum() / v.size)
        before, after = fn(v), fn(transformed)
        holds = after >= before
    else:
        before = fn(v)
        if prop is Property.P3:
            transformed = add_zeros(v, params["k"])
        elif prop is Property.P4:
            transformed = scale(v, params["k"])
        elif prop is Property.P5:
            transformed = shift_all(v, params["h"])
        elif prop is Property.P7:
            transformed = enrich_top(v, params["h"])
        elif prop is Property.P7_POORER:
            transformed = impoverish_bottom(v, params["h"])
        else:
            a, b, h = int(params["a"]), int(params["b"]), float(params["h"])
            if prop is Property.WP6 and h > rank_preserving_limit(v, a, b):
                raise InvalidTransfer("wP6 applies to transfers that keep the receiver at its rank")
            transformed, rank = transfer(v, a, b, h)
            extra["l_a_plus"] = rank
        after = fn(transformed)
        if prop in (Property.P3, Property.P4):
            holds = after == before
        elif prop is Property.P5:
            holds = before <= after
        elif prop in (Property.P6, Property.P7, Property.P7_POORER):
            holds = after <= before
        else:
            rank = extra["l_a_plus"]
            holds = before <= after if before < rank else before >= after

    detail = {"before": before, "after": after, **extra}
    witness = None
    if not holds:
        witness = {
            "input": v.tolist(),
            "transformed": transformed.tolist(),
            "params": params,
            **detail,
        }
    return PropertyVerdict(prop, bool(holds), witness, detail)


def recheck(cutoff: CutoffSpec | CutoffFn, verdict: PropertyVerdict) -> PropertyVerdict:
    """Replay a failing verdict from its witness."""
    if verdict.witness is None:
        raise ValueError("only failing verdicts carry a witness")
    return check_property(cutoff, verdict.property, verdict.witness["input"], verdict.witness["params"])


# --- random vectors ----------------------------------------------------------


def random_vector(rng: np.random.Generator, min_len: int = 2, max_len: int = 200) -> np.ndarray:
    """A non-increasing positive vector from a mix of light- and heavy-tailed draws."""
    n = int(rng.integers(min_len, max_len + 1))
    kind = int(rng.integers(5))
    if kind == 0:
        w = rng.uniform(0.0, 1.0, n)
    elif kind == 1:
        w = rng.exponential(1.0, n)
    elif kind == 2:
        # Zipf-distributed counts: integer weights with many ties
        w = np.minimum(rng.zipf(1.1, n), 1e9).astype(float)
    elif kind == 3:
        # rank-frequency Zipf profile with multiplicative noise
        w = np.arange(1, n + 1) ** -1.1 * rng.lognormal(0.0, 0.3, n)
    else:
        w = rng.integers(1, 20, n).astype(float)
    w = w[w > 0]
    if w.size == 0:
        w = np.ones(1)
    return _desc(w)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


# --- suite -------------------------------------------------------------------


@dataclass
class PropertyTally:
    trials: int = 0
    passes: int = 0
    skipped: int = 0
    counterexample: dict[str, Any] | None = None

    @property
    def failures(self) -> int:
        return self.trials - self.passes

    def to_dict(self) -> dict[str, Any]:
        return {
            "trials": self.trials,
            "passes": self.passes,
            "failures": self.failures,
            "skipped": self.skipped,
            "counterexample": self.counterexample,
        }


@dataclass
class SuiteReport:
    cutoff: str
    n_trials: int
    seed: int
    properties: dict[Property, PropertyTally]
    expected: dict[Property, bool]

    def holds(self, prop: Property | str) -> bool:
        tally = self.properties[Property.parse(prop)]
        return tally.trials > 0 and tally.failures == 0

    def unmet(self, expect: str = "table1") -> list[Property]:
        """Properties expected to hold that produced a counterexample.

        ``expect="table1"`` uses the reference expectations for this cutoff,
        ``expect="all"`` demands every checked property hold.
        """
        out = []
        for prop, tally in self.properties.items():
            must_hold = self.expected.get(prop) is True if expect == "table1" else True
            if must_hold and tally.failures > 0:
                out.append(prop)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "cutoff": self.cutoff,
            "trials": self.n_trials,
            "seed": self.seed,
            "properties": {
                p.value: {**t.to_dict(), "expected": self.expected.get(p)}
                for p, t in self.properties.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def applicable_properties(kind: CutoffKind | None) -> list[Property]:
    exempt = _EXEMPT.get(kind, set()) if kind is not None else set()
    return [p for p in Property if p not in exempt]


def run_axiom_suite(
    cutoff: CutoffSpec | CutoffFn,
    n_trials: int,
    rng_seed: int = 0,
    properties: Sequence[Property | str] | None = None,
    max_len: int = 200,
) -> SuiteReport:
    """Check every applicable property on ``n_trials`` random vectors.

    Trial ``t`` draws from ``default_rng([rng_seed, t])`` so results do not
    depend on trial order and the run is reproducible.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    kind = cutoff.kind if isinstance(cutoff, CutoffSpec) else None
    props = (
        [Property.parse(p) for p in properties]
        if properties is not None
        else applicable_properties(kind)
    )
    tallies = {p: PropertyTally() for p in props}
    for t in range(n_trials):
        rng = trial_rng(rng_seed, t)
        v = random_vector(rng, max_len=max_len)
        for prop in props:
            tally = tallies[prop]
            try:
                verdict = check_property(cutoff, prop, v, rng_seed=rng.integers(2**63))
            except UnsupportedProperty:
                tally.skipped += 1
                continue
            tally.trials += 1
            if verdict.holds:
                tally.passes += 1
            elif tally.counterexample is None:
                tally.counterexample = {"trial": t, **verdict.witness}
    label = cutoff.label if isinstance(cutoff, CutoffSpec) else getattr(cutoff, "__name__", "custom")
    expected = dict(EXPECTED_PATTERN.get(kind, {})) if kind is not None else {}
    return SuiteReport(label, n_trials, rng_seed, tallies, expected)


# --- cosine-curve inequalities behind SC's properties -----------------------------


def nominal_increase_violations(v: ArrayLike, h: float, tol: float = SIM_TOL) -> list[int]:
    """Prefix lengths i where Sim((D+h)^i, D+h) exceeds Sim(D^i, D) by more than tol."""
    v = weight_vector(v)
    diffs = similarity_curve(shift_all(v, h)) - similarity_curve(v)
    return [int(i) + 1 for i in np.flatnonzero(diffs > tol)]


def richest_violations(v: ArrayLike, h: float, tol: float = SIM_TOL) -> list[int]:
    """Prefix lengths i where enriching the top term lowers the prefix similarity."""
    v = weight_vector(v)
    diffs = similarity_curve(enrich_top(v, h)) - similarity_curve(v)
    return [int(i) + 1 for i in np.flatnonzero(diffs < -tol)]


def transfer_curve_violations(
    v: ArrayLike, a_idx: int, b_idx: int, h: float, tol: float = SIM_TOL
) -> list[int]:
    """Prefix lengths where a transfer moves the similarity curve the wrong way:
    it must not rise before ``l_a+`` nor fall from ``l_a+`` on."""
    v = weight_vector(v)
    moved, rank = transfer(v, a_idx, b_idx, h)
    diffs = similarity_curve(moved) - similarity_curve(v)
    bad = []
    for i, d in enumerate(diffs, start=1):
        if (i < rank and d > tol) or (i >= rank and d < -tol):
            bad.append(i)
    return bad


@dataclass
class CurveCheckReport:
    trials: int
    violations: dict[str, int]
    first_violation: dict[str, Any] = field(default_factory=dict)


def run_curve_checks(n_trials: int, rng_seed: int = 0, max_len: int = 200) -> CurveCheckReport:
    """Numerically exercise the three cosine lemmas on random (vector, h) pairs.

    ``shift``: adding h to every weight never raises a prefix similarity.
    ``weak-transfer``: SC obeys wP6 at a random threshold; ``weak-transfer-curve``
    is the curve-level statement behind it. ``enrich-top``: adding h to the
    heaviest weight never lowers a prefix similarity.
    """
    counts = {"shift": 0, "weak-transfer": 0, "weak-transfer-curve": 0, "enrich-top": 0}
    first: dict[str, Any] = {}
    for t in range(n_trials):
        rng = trial_rng(rng_seed, t)
        v = random_vector(rng, max_len=max_len)
        mean = float(v.mean())
        h = mean * 10 ** rng.uniform(-3, 2)
        if nominal_increase_violations(v, h):
            counts["shift"] += 1
            first.setdefault("shift", {"trial": t, "input": v.tolist(), "h": h})
        h7 = float(v[0]) * 10 ** rng.uniform(-3, 1)
        if richest_violations(v, h7):
            counts["enrich-top"] += 1
            first.setdefault("enrich-top", {"trial": t, "input": v.tolist(), "h": h7})
        per = float(rng.uniform(1.0, 100.0))
        spec = CutoffSpec(CutoffKind.SC, per)
        try:
            params = _draw_params(Property.WP6, v, rng)
        except UnsupportedProperty:
            continue
        verdict = check_property(spec, Property.WP6, v, params)
        if not verdict.holds:
            counts["weak-transfer"] += 1
            first.setdefault("weak-transfer", {"trial": t, "per": per, **verdict.witness})
        if transfer_curve_violations(v, params["a"], params["b"], params["h"]):
            counts["weak-transfer-curve"] += 1
            first.setdefault("weak-transfer-curve", {"trial": t, "input": v.tolist(), **params})
    return CurveCheckReport(n_trials, counts, first)


def expectation_summary(report: SuiteReport) -> list[str]:
    """One human-readable line per property."""
    lines = []
    for prop, tally in report.properties.items():
        exp = report.expected.get(prop)
        tag = {True: "expected hold", False: "expected fail", None: "informative"}[exp]
        status = "holds" if tally.failures == 0 and tally.trials else (
            "n/a" if not tally.trials else f"FAILS ({tally.failures}/{tally.trials})"
        )
        lines.append(f"{prop.value:<11} {status:<22} [{tag}]")
    return lines

