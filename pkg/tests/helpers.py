"""Shared builders for tests: records, corpora, and scripted providers."""

from __future__ import annotations

import hashlib
import random
from pathlib import Path
from typing import List, Optional, Sequence

from bookforge.model import CognitiveClass, CorpusRecord, Persona, Source

DATA_DIR = Path(__file__).parent / "data"


def make_record(
    rid: str,
    domain: str = "d1",
    persona: Persona = Persona.HIGH_SCHOOL,
    cognitive: CognitiveClass = CognitiveClass.BOOK,
    token_count: int = 100,
    part_idx: int = 0,
    chapter_idx: int = 0,
    section_idx: int = 0,
    source: Source = Source.SYNTHETIC,
    text: Optional[str] = None,
) -> CorpusRecord:
    return CorpusRecord(
        id=rid,
        text=text if text is not None else f"text of {rid}",
        domain=domain,
        persona=persona,
        cognitive=cognitive,
        part_idx=part_idx,
        chapter_idx=chapter_idx,
        section_idx=section_idx,
        token_count=token_count,
        source=source,
    )


def random_corpus(
    rng: random.Random,
    n_records: int,
    domains: Sequence[str] = ("d1", "d2", "d3"),
    personas: Sequence[Persona] = tuple(Persona),
    cognitives: Sequence[CognitiveClass] = tuple(CognitiveClass),
    max_tokens: int = 120,
) -> List[CorpusRecord]:
    """Random synthetic records with per-stream section counters so that
    document order within each stream stays plausible."""
    counters = {}
    records = []
    for i in range(n_records):
        domain = rng.choice(list(domains))
        persona = rng.choice(list(personas))
        cog = rng.choice(list(cognitives))
        key = (domain, persona, cog)
        seq = counters.get(key, 0)
        counters[key] = seq + 1
        records.append(
            make_record(
                f"{domain}-{persona.wire}-{cog.wire}-{seq:04d}",
                domain=domain,
                persona=persona,
                cognitive=cog,
                token_count=rng.randint(20, max_tokens),
                section_idx=seq,
            )
        )
    return records


def hex_text(tag: str, repeats: int = 1) -> str:
    """Deterministic high-entropy text with negligible trigram overlap
    against English benchmark sentences."""
    out = []
    for i in range(repeats):
        out.append(hashlib.sha256(f"{tag}:{i}".encode()).hexdigest())
    return " ".join(out)


def random_outline(rng: random.Random):
    """A structurally valid random outline (strict count bounds)."""
    from bookforge.model import (
        BookOutline,
        OutlineChapter,
        OutlinePart,
        OutlineSection,
        OutlineSubsection,
    )

    def title(prefix: str) -> str:
        return f"{prefix} {rng.randint(1, 9999)}-{rng.choice('ABCDEFGH')}"

    parts = []
    for _ in range(rng.randint(4, 6)):
        chapters = []
        for _ in range(rng.randint(4, 6)):
            sections = []
            for _ in range(rng.randint(3, 6)):
                subs = None
                if rng.random() < 0.5:
                    subs = tuple(
                        OutlineSubsection(title("Sub"))
                        for _ in range(rng.randint(2, 3))
                    )
                sections.append(OutlineSection(title=title("Section"), subsections=subs))
            chapters.append(
                OutlineChapter(
                    title=title("Chapter"),
                    description=f"Covers {title('topic')}.",
                    sections=tuple(sections),
                )
            )
        parts.append(
            OutlinePart(
                title=title("Part"),
                description=f"Explores {title('theme')}.",
                chapters=tuple(chapters),
            )
        )
    return BookOutline(title=title("Book"), parts=tuple(parts))


def plant_near_miss(embed_client, base_text: str, tag: str,
                    lo: float = 0.82, hi: float = 0.88) -> str:
    """A variant of base_text whose mock-embedding similarity to the base
    measurably lands inside (lo, hi): above the report threshold, below the
    removal threshold. Deterministic for a given (base_text, tag)."""
    import numpy as np

    for extra in range(10, 48):
        candidate = base_text + " " + hex_text(tag)[:extra]
        va, vb = embed_client.embed([base_text, candidate])
        sim = float(np.dot(va.values, vb.values))
        if lo <= sim <= hi:
            return candidate
    raise AssertionError(f"no suffix length puts {tag!r} in ({lo}, {hi})")


def assert_scan_equivalent(ids_a, sims_a, ids_b, sims_b, tie_tol=1e-12):
    """Two nearest-neighbor passes are equivalent when they pick the same
    neighbor, or disagree only on an exact tie (similarities equal within
    float reordering noise). Similarity values must always agree."""
    import numpy as np

    sims_a = np.asarray(sims_a, dtype=np.float64)
    sims_b = np.asarray(sims_b, dtype=np.float64)
    assert sims_a.shape == sims_b.shape
    assert np.allclose(sims_a, sims_b, atol=tie_tol, rtol=0.0)
    for i, (ia, ib) in enumerate(zip(ids_a, ids_b)):
        if ia != ib:
            assert abs(float(sims_a[i]) - float(sims_b[i])) <= tie_tol, (
                f"record {i}: different neighbors {ia!r} vs {ib!r} with "
                f"non-tied sims {sims_a[i]} vs {sims_b[i]}"
            )


class ScriptedProvider:
    """Raises the scripted exceptions in order, then returns the payload."""

    def __init__(self, failures: Sequence[Exception], payload: str = "ok"):
        self.failures = list(failures)
        self.payload = payload
        self.attempts = 0

    def complete(self, request) -> str:
        self.attempts += 1
        if self.failures:
            raise self.failures.pop(0)
        return self.payload


class RecordingSleeper:
    def __init__(self):
        self.delays: List[float] = []

    def __call__(self, seconds: float) -> None:
        self.delays.append(seconds)
