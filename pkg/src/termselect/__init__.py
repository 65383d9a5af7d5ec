"""Term selection for profile construction: weighting measures, cutoff
functions, concentration axioms, and profile-based retrieval."""

from .corpus import Mode, RawRecord, SourceCollection, build_collection, tokenize
from .cutoff import CutoffKind, CutoffSpec, Profile, apply_cutoff, cutoff_index
from .weighting import Measure, RankedTermList, rank_terms

__version__ = "0.1.0"

__all__ = [
    "CutoffKind",
    "CutoffSpec",
    "Measure",
    "Mode",
    "Profile",
    "RankedTermList",
    "RawRecord",
    "SourceCollection",
    "apply_cutoff",
    "build_collection",
    "cutoff_index",
    "rank_terms",
    "tokenize",
]
