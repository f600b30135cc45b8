"""Curriculum ordering of the synthetic corpus plus replay mixing.

Four regimes:

* flat: one uniform shuffle, no ordering constraints;
* cog: Book -> EasyQA -> HardQA blocks, randomly mixed inside each block;
* cog_con: cog with persona sub-blocks (HighSchool -> ... -> Researcher)
  nested inside each cognitive block;
* interleaved: cog_con at chunk granularity, with chunks of consecutive
  sections rotated across domains in a fixed cyclic pattern.

Every operation is a pure function of (records, seed). Randomness comes
from independent per-block streams derived from the master seed, so adding
a domain or persona never perturbs another block's order.
"""

from __future__ import annotations

import hashlib
from collections import OrderedDict, deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InsufficientReplay, OversizeRecord, SchemaShape
from .model import CognitiveClass, CorpusRecord, Persona, Source

_SEED_MASK = (1 << 64) - 1


def _stream_rng(seed: int, *key) -> np.random.Generator:
    tag = "\x1f".join(str(k) for k in key)
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    entropy = [seed & _SEED_MASK, int.from_bytes(digest, "big")]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _shuffled(rng: np.random.Generator, items: list) -> list:
    perm = rng.permutation(len(items))
    return [items[i] for i in perm]


# -- record-level schedules ------------------------------------------------------


def schedule_flat(records: Sequence[CorpusRecord], seed: int) -> List[CorpusRecord]:
    """Uniform seed-deterministic permutation; multiset preserved."""
    return _shuffled(_stream_rng(seed, "flat"), list(records))


def schedule_cog(records: Sequence[CorpusRecord], seed: int) -> List[CorpusRecord]:
    """Cognitive blocks in order; domains and personas mixed inside each."""
    out: List[CorpusRecord] = []
    for cog in CognitiveClass:
        block = [r for r in records if r.cognitive is cog]
        out.extend(_shuffled(_stream_rng(seed, "cog", cog.name), block))
    return out


def schedule_cog_con(records: Sequence[CorpusRecord], seed: int) -> List[CorpusRecord]:
    """Cognitive blocks outer, persona sub-blocks inner, domains mixed."""
    out: List[CorpusRecord] = []
    for cog in CognitiveClass:
        for persona in Persona:
            block = [
                r for r in records if r.cognitive is cog and r.persona is persona
            ]
            out.extend(
                _shuffled(_stream_rng(seed, "cog_con", cog.name, persona.name), block)
            )
    return out


# -- chunking and interleaving ---------------------------------------------------


@dataclass(frozen=True)
class Chunk:
    """A run of consecutive same-stream records packed to a token target."""

    domain: str
    persona: Persona
    cognitive: CognitiveClass
    seq: int
    records: tuple
    token_count: int

    def __post_init__(self):
        for r in self.records:
            if (r.domain, r.persona, r.cognitive) != (
                self.domain,
                self.persona,
                self.cognitive,
            ):
                raise SchemaShape(
                    f"chunk {self.domain}/{self.persona.wire}/{self.cognitive.wire} "
                    f"contains foreign record {r.id!r}"
                )


StreamKey = Tuple[str, Persona, CognitiveClass]


def chunk_streams(
    records: Sequence[CorpusRecord], chunk_target_tokens: int
) -> Dict[StreamKey, List[Chunk]]:
    """Greedy packing per (domain, persona, cognitive) stream.

    A chunk closes when the next record would push it past the target;
    record order inside and across chunks follows the input stream order.
    """
    if chunk_target_tokens < 1:
        raise SchemaShape("chunk_target_tokens must be >= 1")
    streams: "OrderedDict[StreamKey, List[CorpusRecord]]" = OrderedDict()
    for r in records:
        streams.setdefault((r.domain, r.persona, r.cognitive), []).append(r)

    result: Dict[StreamKey, List[Chunk]] = OrderedDict()
    for key, recs in streams.items():
        domain, persona, cognitive = key
        chunks: List[Chunk] = []
        current: List[CorpusRecord] = []
        tokens = 0
        for r in recs:
            if r.token_count > chunk_target_tokens:
                raise OversizeRecord(r.id, r.token_count, chunk_target_tokens)
            if current and tokens + r.token_count > chunk_target_tokens:
                chunks.append(
                    Chunk(domain, persona, cognitive, len(chunks), tuple(current), tokens)
                )
                current, tokens = [], 0
            current.append(r)
            tokens += r.token_count
        if current:
            chunks.append(
                Chunk(domain, persona, cognitive, len(chunks), tuple(current), tokens)
            )
        result[key] = chunks
    return result


def interleaved_chunk_plan(
    records: Sequence[CorpusRecord], chunk_target_tokens: int, seed: int
) -> List[Chunk]:
    """Chunk emission order for the interleaved regime.

    Within each (cognitive, persona) sub-block the participating domains
    rotate cyclically; the rotation order is drawn once per sub-block from
    the seed, and exhausted domains drop out of the cycle.
    """
    all_chunks = chunk_streams(records, chunk_target_tokens)
    plan: List[Chunk] = []
    for cog in CognitiveClass:
        for persona in Persona:
            queues: "OrderedDict[str, deque]" = OrderedDict()
            for (domain, p, c), chunks in all_chunks.items():
                if p is persona and c is cog and chunks:
                    queues[domain] = deque(chunks)
            if not queues:
                continue
            rotation = _shuffled(
                _stream_rng(seed, "interleave", cog.name, persona.name),
                list(queues),
            )
            while rotation:
                for domain in rotation:
                    plan.append(queues[domain].popleft())
                rotation = [d for d in rotation if queues[d]]
    return plan


def schedule_interleaved(
    records: Sequence[CorpusRecord], chunk_target_tokens: int, seed: int
) -> List[CorpusRecord]:
    """Record stream corresponding to interleaved_chunk_plan."""
    out: List[CorpusRecord] = []
    for chunk in interleaved_chunk_plan(records, chunk_target_tokens, seed):
        out.extend(chunk.records)
    return out


# -- replay mixing ----------------------------------------------------------------


def mix_with_replay(
    ordered_synthetic: Sequence[CorpusRecord],
    replay_pool: Sequence[CorpusRecord],
    ratio: Tuple[int, int],
    seed: int,
) -> List[CorpusRecord]:
    """Token-budget interleave of replay data into a scheduled stream.

    For ratio s:r the cumulative synthetic:replay token counts stay within
    one record of s:r at every prefix. Synthetic relative order is preserved
    exactly; replay records are drawn without replacement in a
    seed-deterministic order. Raises InsufficientReplay when the pool cannot
    cover the ratio for the whole stream.
    """
    s, r = ratio
    if s < 1 or r < 0:
        raise SchemaShape(f"ratio must have synthetic >= 1, replay >= 0, got {s}:{r}")
    synthetic = list(ordered_synthetic)
    if r == 0:
        return synthetic

    syn_total = sum(rec.token_count for rec in synthetic)
    pool_total = sum(rec.token_count for rec in replay_pool)
    if pool_total * s < syn_total * r:
        shortfall = (syn_total * r - pool_total * s + s - 1) // s
        raise InsufficientReplay(shortfall)

    order = _stream_rng(seed, "replay").permutation(len(replay_pool))
    replay_iter = iter([replay_pool[i] for i in order])

    out: List[CorpusRecord] = []
    syn_tokens = 0
    rep_tokens = 0
    replay_dry = False
    for rec in synthetic:
        while not replay_dry and rep_tokens * s < syn_tokens * r:
            nxt = next(replay_iter, None)
            if nxt is None:
                replay_dry = True
                break
            out.append(nxt)
            rep_tokens += nxt.token_count
        out.append(rec)
        syn_tokens += rec.token_count
    while rep_tokens * s < syn_tokens * r:
        nxt = next(replay_iter, None)
        if nxt is None:
            break
        out.append(nxt)
        rep_tokens += nxt.token_count
    return out


# -- ordering predicates (shared by tests and the CLI validator) -------------------


def _synthetic(records: Sequence[CorpusRecord]):
    return [r for r in records if r.source is Source.SYNTHETIC]


def first_cog_violation(records: Sequence[CorpusRecord]) -> Optional[int]:
    """Index of the first synthetic record whose cognitive class decreases,
    or None when the Book -> EasyQA -> HardQA order holds."""
    prev = None
    for i, r in enumerate(records):
        if r.source is not Source.SYNTHETIC:
            continue
        if prev is not None and r.cognitive < prev:
            return i
        prev = r.cognitive
    return None


def first_cog_con_violation(records: Sequence[CorpusRecord]) -> Optional[int]:
    """Like first_cog_violation, plus persona must not decrease within one
    cognitive block."""
    bad = first_cog_violation(records)
    if bad is not None:
        return bad
    prev: Optional[CorpusRecord] = None
    for i, r in enumerate(records):
        if r.source is not Source.SYNTHETIC:
            continue
        if prev is not None and r.cognitive is prev.cognitive and r.persona < prev.persona:
            return i
        prev = r
    return None


def check_multiset_preserved(
    before: Sequence[CorpusRecord], after: Sequence[CorpusRecord]
) -> bool:
    return sorted(r.id for r in before) == sorted(r.id for r in after)


def check_interleaved_plan(plan: Sequence[Chunk]) -> None:
    """Validate the cyclic-rotation properties of an interleaved plan.

    Within each (cognitive, persona) sub-block: chunk seq numbers per domain
    ascend contiguously from 0, and no two consecutive chunks share a domain
    while more than one domain still has chunks left.
    """
    groups: "OrderedDict[tuple, List[Chunk]]" = OrderedDict()
    for chunk in plan:
        groups.setdefault((chunk.cognitive, chunk.persona), []).append(chunk)
    for (cog, persona), chunks in groups.items():
        where = f"{cog.wire}/{persona.wire}"
        totals: Dict[str, int] = {}
        for c in chunks:
            totals[c.domain] = totals.get(c.domain, 0) + 1
        seen: Dict[str, int] = {d: 0 for d in totals}
        prev_domain = None
        for c in chunks:
            if c.seq != seen[c.domain]:
                raise SchemaShape(
                    f"{where}: domain {c.domain} chunk seq {c.seq}, "
                    f"expected {seen[c.domain]}"
                )
            seen[c.domain] += 1
            live_before = sum(1 for d in totals if seen[d] - (1 if d == c.domain else 0) < totals[d])
            if prev_domain == c.domain and live_before > 1:
                raise SchemaShape(
                    f"{where}: consecutive chunks share domain {c.domain} "
                    f"while {live_before} domains were live"
                )
            prev_domain = c.domain
        if seen != totals:
            raise SchemaShape(f"{where}: chunk counts mismatch: {seen} vs {totals}")


def block_counts(records: Sequence[CorpusRecord]) -> Dict[str, int]:
    """Record counts per cognitive/persona/domain block, for manifests."""
    counts: Dict[str, int] = {}
    for r in records:
        key = f"{r.cognitive.wire}/{r.persona.wire}/{r.domain}"
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))


__all__ = [
    "Chunk",
    "schedule_flat",
    "schedule_cog",
    "schedule_cog_con",
    "chunk_streams",
    "interleaved_chunk_plan",
    "schedule_interleaved",
    "mix_with_replay",
    "first_cog_violation",
    "first_cog_con_violation",
    "check_multiset_preserved",
    "check_interleaved_plan",
    "block_counts",
]
