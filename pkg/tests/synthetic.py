"""Synthetic speech corpora with known speaker vocabularies."""

from __future__ import annotations

import numpy as np

from termselect.corpus import RawRecord


def speaker_corpus(
    overlap: float = 0.0,
    seed: int = 0,
    n_speakers: int = 20,
    vocab: int = 50,
    n_initiatives: int = 100,
    words: int = 40,
) -> list[RawRecord]:
    """Every speaker owns a 50-term vocabulary; ``overlap`` of it is one shared
    block common to all speakers, so any two vocabularies overlap by that fraction.

    Each speaker draws words from a fixed private Zipf ordering of its
    vocabulary. Initiative i has the three participants i, i+7 and i+13
    (mod 20), which puts every speaker in exactly 15 initiatives.
    """
    rng = np.random.default_rng(seed)
    shared = int(round(vocab * overlap))
    common = [f"common{i:03d}" for i in range(shared)]
    vocabs = []
    for s in range(n_speakers):
        v = [f"s{s:02d}w{i:03d}" for i in range(vocab - shared)] + common
        vocabs.append([v[i] for i in rng.permutation(vocab)])
    p = 1.0 / np.arange(1, vocab + 1)
    p /= p.sum()
    records = []
    for it in range(n_initiatives):
        for off in (0, 7, 13):
            s = (it + off) % n_speakers
            toks = rng.choice(vocab, size=words, p=p)
            records.append(
                RawRecord(
                    record_id=f"r{it:03d}-{s:02d}",
                    speaker_id=f"sp{s:02d}",
                    committee_id=f"c{it % 4}",
                    initiative_id=f"i{it:03d}",
                    text=" ".join(vocabs[s][t] for t in toks),
                )
            )
    return records
