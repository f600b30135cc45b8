"""Benchmark decontamination: drop generated records that sit too close to
benchmark items in embedding space, and report near-miss statistics.

Removal uses strict ``> threshold_remove`` (default 0.9); reporting counts
``>= threshold_report`` (default 0.8). The two comparators are deliberate:
the removal rule is exclusive, the report rule inclusive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import DimMismatch, EmptyBenchmark, SchemaShape
from .model import CorpusRecord, DecontamReport, FlaggedExample
from .providers import EmbeddingVector, cosine  # noqa: F401  (cosine is part of
# this module's public surface; it operates on the same vectors we scan)

EMBED_BATCH = 1024


@dataclass
class BenchmarkItem:
    id: str
    text: str
    vector: Optional[EmbeddingVector] = None


def load_benchmark(path) -> List[BenchmarkItem]:
    """Read a JSONL benchmark of {id, text} objects."""
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise SchemaShape(f"benchmark line {lineno}: {err}") from err
            if "id" not in obj or "text" not in obj or not str(obj["text"]):
                raise SchemaShape(f"benchmark line {lineno}: need id and text")
            items.append(BenchmarkItem(id=str(obj["id"]), text=obj["text"]))
    return items


def _embed_texts(embed_client, texts: Sequence[str]) -> List[EmbeddingVector]:
    out: List[EmbeddingVector] = []
    for start in range(0, len(texts), EMBED_BATCH):
        out.extend(embed_client.embed(texts[start : start + EMBED_BATCH]))
    return out


def embed_benchmark(bench: Sequence[BenchmarkItem], embed_client) -> None:
    """Fill missing vectors in place."""
    todo = [item for item in bench if item.vector is None]
    if not todo:
        return
    vectors = _embed_texts(embed_client, [item.text for item in todo])
    for item, vec in zip(todo, vectors):
        item.vector = vec


def _bench_matrix(bench: Sequence[BenchmarkItem]) -> Tuple[list, np.ndarray]:
    """Benchmark items sorted by id plus their stacked vector matrix.

    Scanning in id order makes the first-maximum tie rule equivalent to
    'lowest benchmark id wins'.
    """
    if not bench:
        raise EmptyBenchmark("benchmark set is empty")
    ordered = sorted(bench, key=lambda item: item.id)
    dims = {item.vector.dim for item in ordered}
    if len(dims) != 1:
        raise DimMismatch(f"benchmark vectors disagree on dim: {sorted(dims)}")
    matrix = np.stack([item.vector.values for item in ordered])
    return ordered, matrix


def nearest_benchmark(
    query: EmbeddingVector, bench: Sequence[BenchmarkItem]
) -> Tuple[BenchmarkItem, float]:
    """The benchmark item most similar to ``query``; ties break toward the
    lowest benchmark id."""
    ordered, matrix = _bench_matrix(bench)
    if matrix.shape[1] != query.dim:
        raise DimMismatch(f"dims differ: {query.dim} vs {matrix.shape[1]}")
    sims = matrix @ query.values
    best = int(np.argmax(sims))
    return ordered[best], float(sims[best])


def scan_nearest(
    queries: Sequence[EmbeddingVector],
    bench: Sequence[BenchmarkItem],
    backend: Optional[str] = None,
) -> Tuple[list, np.ndarray]:
    """Vectorized nearest-benchmark for many queries at once.

    Returns (items, sims) aligned with ``queries``. ``backend`` picks the
    scan kernel (compiled or numpy); results are identical either way.
    """
    ordered, matrix = _bench_matrix(bench)
    if not queries:
        return [], np.empty(0, dtype=np.float64)
    qdims = {q.dim for q in queries}
    if qdims != {matrix.shape[1]}:
        raise DimMismatch(
            f"query dims {sorted(qdims)} vs benchmark dim {matrix.shape[1]}"
        )
    qmatrix = np.stack([q.values for q in queries])
    idx, sims = kernels.argmax_dot(qmatrix, matrix, backend=backend)
    return [ordered[i] for i in idx], sims


def decontaminate(
    records: Sequence[CorpusRecord],
    bench: Sequence[BenchmarkItem],
    embed_client,
    threshold_remove: float = 0.9,
    threshold_report: float = 0.8,
    backend: Optional[str] = None,
) -> Tuple[List[CorpusRecord], DecontamReport]:
    """Remove records whose nearest benchmark similarity exceeds the removal
    threshold; keep everything else in input order.

    The report covers the *generated* set: how many records sit at or above
    the report threshold, with their nearest benchmark texts.
    """
    if not 0 < threshold_remove <= 1 or not 0 < threshold_report <= 1:
        raise SchemaShape("thresholds must lie in (0, 1]")
    if threshold_report > threshold_remove:
        raise SchemaShape("threshold_report must be <= threshold_remove")
    if not bench:
        raise EmptyBenchmark("benchmark set is empty")

    embed_benchmark(bench, embed_client)
    records = list(records)
    if not records:
        return [], DecontamReport(
            total_generated=0,
            removed=0,
            threshold_remove=threshold_remove,
            threshold_report=threshold_report,
            frac_above_report=0.0,
        )
    vectors = _embed_texts(embed_client, [r.text for r in records])
    items, sims = scan_nearest(vectors, bench, backend=backend)

    kept: List[CorpusRecord] = []
    flagged: List[FlaggedExample] = []
    removed = 0
    above_report = 0
    for record, item, sim in zip(records, items, sims):
        sim = float(sim)
        if sim >= threshold_report:
            above_report += 1
            flagged.append(
                FlaggedExample(
                    generated_text=record.text,
                    nearest_benchmark_text=item.text,
                    similarity=sim,
                )
            )
        if sim > threshold_remove:
            removed += 1
        else:
            kept.append(record)

    report = DecontamReport(
        total_generated=len(records),
        removed=removed,
        threshold_remove=threshold_remove,
        threshold_report=threshold_report,
        frac_above_report=100.0 * above_report / len(records),
        flagged_examples=tuple(flagged),
    )
    return kept, report


# -- report rendering -----------------------------------------------------------


def truncate_pct(value: float, decimals: int = 4) -> str:
    """Floor-truncate a percentage for display, e.g. 0.096969 -> '0.0969'."""
    scale = 10 ** decimals
    return f"{math.floor(value * scale) / scale:.{decimals}f}"


def render_domain_stats(rows: Sequence[Tuple[str, int, float]]) -> str:
    """Per-domain generated-sample counts with the share at or above the
    report threshold, as an aligned text table."""
    header = ("Domain", "#Generated Samples", "% Similarity >= 0.8")
    body = [(domain, str(total), truncate_pct(pct)) for domain, total, pct in rows]
    widths = [
        max(len(header[c]), *(len(r[c]) for r in body)) if body else len(header[c])
        for c in range(3)
    ]
    lines = [
        "  ".join(header[c].ljust(widths[c]) for c in range(3)),
        "  ".join("-" * widths[c] for c in range(3)),
    ]
    for r in body:
        lines.append("  ".join(r[c].ljust(widths[c]) for c in range(3)))
    return "\n".join(lines)


def render_flagged_examples(report: DecontamReport, limit: int = 20) -> str:
    """Generated/nearest-benchmark/similarity triples, most similar first."""
    examples = sorted(
        report.flagged_examples, key=lambda ex: ex.similarity, reverse=True
    )[:limit]
    if not examples:
        return "(no samples at or above the report threshold)"
    blocks = []
    for ex in examples:
        blocks.append(
            "\n".join(
                (
                    f"Generated Sample: {ex.generated_text}",
                    f"Closest Benchmark Sample: {ex.nearest_benchmark_text}",
                    f"Cosine Similarity: {ex.similarity:.4f}",
                )
            )
        )
    return ("\n" + "-" * 60 + "\n").join(blocks)


__all__ = [
    "BenchmarkItem",
    "cosine",
    "load_benchmark",
    "embed_benchmark",
    "nearest_benchmark",
    "scan_nearest",
    "decontaminate",
    "truncate_pct",
    "render_domain_stats",
    "render_flagged_examples",
]
