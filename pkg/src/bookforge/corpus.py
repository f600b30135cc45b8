"""Token accounting, corpus serialization, and reporting.

Token counts are stored as exact integers; millions-with-two-decimals
formatting happens only at render time. JSONL line order IS the training
order, so read/write must round-trip byte-identically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from .errors import SchemaShape, TokenizerLoadError
from .model import CognitiveClass, CorpusRecord, Persona, Source

# -- tokenizers -------------------------------------------------------------------


class WhitespaceTokenizer:
    """Fallback tokenizer: whitespace-delimited words."""

    name = "whitespace"

    def count(self, text: str) -> int:
        return len(text.split())


class HFTokenizer:
    """Wrapper over a Hugging Face tokenizer asset (e.g. the Llama vocab)."""

    def __init__(self, name_or_path: str):
        self.name = f"hf:{name_or_path}"
        try:
            from transformers import AutoTokenizer

            self._tok = AutoTokenizer.from_pretrained(name_or_path)
        except Exception as err:
            raise TokenizerLoadError(
                f"could not load tokenizer {name_or_path!r}: {err}"
            ) from err

    def count(self, text: str) -> int:
        if not text:
            return 0
        return len(self._tok.encode(text, add_special_tokens=False))


def load_tokenizer(spec: str = "whitespace"):
    if spec == "whitespace":
        return WhitespaceTokenizer()
    if spec.startswith("hf:"):
        return HFTokenizer(spec[3:])
    raise TokenizerLoadError(f"unknown tokenizer spec {spec!r}")


def count_tokens(text: str, tokenizer) -> int:
    return tokenizer.count(text)


# -- token report -------------------------------------------------------------------

PERSONA_REPORT_LABELS = {
    Persona.HIGH_SCHOOL: "Highschool",
    Persona.UNDERGRADUATE: "Undergraduate",
    Persona.GRADUATE: "Graduate",
    Persona.RESEARCHER: "Researcher",
}


def millions(tokens: int, places: int = 2) -> Decimal:
    """Exact integer tokens -> millions, half-up rounded for display."""
    quantum = Decimal(1).scaleb(-places)
    return (Decimal(tokens) / Decimal(1_000_000)).quantize(
        quantum, rounding=ROUND_HALF_UP
    )


@dataclass(frozen=True)
class TokenReport:
    """Domain x persona token matrix over synthetic records."""

    domains: tuple
    cells: dict  # (domain, Persona) -> int tokens

    def cell(self, domain: str, persona: Persona) -> int:
        return self.cells.get((domain, persona), 0)

    def col_total(self, domain: str) -> int:
        return sum(self.cell(domain, p) for p in Persona)

    def row_total(self, persona: Persona) -> int:
        return sum(self.cell(d, persona) for d in self.domains)

    @property
    def grand_total(self) -> int:
        return sum(self.col_total(d) for d in self.domains)

    def to_json_value(self) -> dict:
        return {
            "domains": list(self.domains),
            "cells": {
                d: {p.wire: self.cell(d, p) for p in Persona} for d in self.domains
            },
            "col_totals": {d: self.col_total(d) for d in self.domains},
            "row_totals": {p.wire: self.row_total(p) for p in Persona},
            "grand_total": self.grand_total,
        }

    @classmethod
    def from_json_value(cls, obj: dict) -> "TokenReport":
        domains = tuple(obj["domains"])
        cells = {
            (d, Persona.parse(p)): int(v)
            for d, row in obj["cells"].items()
            for p, v in row.items()
        }
        return cls(domains=domains, cells=cells)

    def render(self) -> str:
        """Aligned text table: personas as rows, domains as columns, token
        counts in millions (2 dp), with a raw grand-total line."""
        headers = ["Persona"] + [d.title() for d in self.domains]
        rows = []
        for persona in Persona:
            rows.append(
                [PERSONA_REPORT_LABELS[persona]]
                + [str(millions(self.cell(d, persona))) for d in self.domains]
            )
        rows.append(
            ["Total"] + [str(millions(self.col_total(d))) for d in self.domains]
        )
        widths = [
            max(len(headers[c]), *(len(r[c]) for r in rows))
            for c in range(len(headers))
        ]
        lines = [
            "  ".join(headers[c].ljust(widths[c]) for c in range(len(headers))),
            "  ".join("-" * w for w in widths),
        ]
        for r in rows:
            lines.append("  ".join(r[c].ljust(widths[c]) for c in range(len(headers))))
        lines.append("")
        lines.append(
            f"Total synthetic tokens: {self.grand_total} "
            f"({millions(self.grand_total)} M)"
        )
        return "\n".join(lines)


def token_report(records: Sequence[CorpusRecord]) -> TokenReport:
    """Aggregate synthetic records into the domain x persona matrix.

    Domain column order follows first appearance in the record stream.
    """
    domains: List[str] = []
    cells: Dict[tuple, int] = {}
    for r in records:
        if r.source is not Source.SYNTHETIC:
            continue
        if r.domain not in domains:
            domains.append(r.domain)
        key = (r.domain, r.persona)
        cells[key] = cells.get(key, 0) + r.token_count
    return TokenReport(domains=tuple(domains), cells=cells)


# -- teacher/student gap ranking -----------------------------------------------------


@dataclass(frozen=True)
class DomainGap:
    domain: str
    student_acc: float
    teacher_acc: float

    def __post_init__(self):
        if not 0 <= self.student_acc <= 1 or not 0 <= self.teacher_acc <= 1:
            raise SchemaShape(f"accuracies for {self.domain!r} must lie in [0, 1]")

    @property
    def gap(self) -> float:
        return self.student_acc - self.teacher_acc

    def to_json_value(self) -> dict:
        return {
            "domain": self.domain,
            "student_acc": self.student_acc,
            "teacher_acc": self.teacher_acc,
            "gap": self.gap,
        }


def rank_domain_gaps(
    student_scores: Dict[str, float],
    teacher_scores: Dict[str, float],
    k: int,
) -> List[DomainGap]:
    """The k domains where the student trails its teacher the most
    (most negative student-minus-teacher gap first; ties by domain name)."""
    if set(student_scores) != set(teacher_scores):
        only_s = sorted(set(student_scores) - set(teacher_scores))
        only_t = sorted(set(teacher_scores) - set(student_scores))
        raise SchemaShape(
            f"score maps cover different domains (student-only: {only_s}, "
            f"teacher-only: {only_t})"
        )
    gaps = [
        DomainGap(domain=d, student_acc=student_scores[d], teacher_acc=teacher_scores[d])
        for d in student_scores
    ]
    gaps.sort(key=lambda g: (g.gap, g.domain))
    return gaps[: max(k, 0)]


# -- JSONL corpus I/O ------------------------------------------------------------------


def write_corpus(records: Iterable[CorpusRecord], path) -> int:
    """One JSON object per line, in training order. Returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json_value(), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_corpus(path) -> List[CorpusRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                records.append(CorpusRecord.from_json_value(obj))
            except (json.JSONDecodeError, SchemaShape, KeyError, ValueError) as err:
                raise SchemaShape(f"corpus line {lineno}: {err}") from err
    return records


def read_replay_pool(path, tokenizer) -> List[CorpusRecord]:
    """Replay pool loader. Accepts full CorpusRecord lines or bare
    {id, text} lines, which get wrapped as replay records with placeholder
    persona/cognitive labels."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise SchemaShape(f"replay line {lineno}: {err}") from err
            try:
                if all(k in obj for k in ("persona", "cognitive", "source")):
                    records.append(CorpusRecord.from_json_value(obj))
                else:
                    records.append(
                        CorpusRecord(
                            id=str(obj["id"]),
                            text=obj["text"],
                            domain=str(obj.get("domain", "replay")),
                            persona=Persona.HIGH_SCHOOL,
                            cognitive=CognitiveClass.BOOK,
                            part_idx=0,
                            chapter_idx=0,
                            section_idx=0,
                            token_count=count_tokens(obj["text"], tokenizer),
                            source=Source.REPLAY,
                        )
                    )
            except (SchemaShape, KeyError) as err:
                raise SchemaShape(f"replay line {lineno}: {err}") from err
    return records


# -- manifests ----------------------------------------------------------------------


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, payload: dict) -> None:
    """Deterministic manifest: sorted keys, no timestamps."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


__all__ = [
    "WhitespaceTokenizer",
    "HFTokenizer",
    "load_tokenizer",
    "count_tokens",
    "millions",
    "TokenReport",
    "token_report",
    "PERSONA_REPORT_LABELS",
    "DomainGap",
    "rank_domain_gaps",
    "write_corpus",
    "read_corpus",
    "read_replay_pool",
    "file_sha256",
    "write_manifest",
]
