"""The three-stage generation pipeline for one (topic, persona) book.

Stage 1 details the domain into an editable schema; stage 2 expands it
into a full outline and blueprint tree; stage 3 walks the tree in document
order, writing section prose and then a difficulty-escalating QA sequence
per section. Progress is checkpointed after every section so interrupted
runs resume without regenerating completed work.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .errors import (
    CheckpointMismatch,
    EmptyGeneration,
    LocatorError,
    ProviderError,
    QaGenerationInterrupted,
    SchemaShape,
)
from .jsonx import extract_json
from .model import (
    BookOutline,
    CognitiveClass,
    CorpusRecord,
    DomainSchema,
    NodeKind,
    Persona,
    QaBucket,
    QaPair,
    Source,
    StyleProfile,
    TocNode,
    build_toc_tree,
    easy_count,
)
from .prompts import TemplateId, render_prompt
from .providers import GenerationRequest

PROSE_TEMPERATURE = 0.7
ANSWER_TEMPERATURE = 0.3
DEFAULT_QA_PER_SECTION = 4


def slugify(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", text.strip().lower()).strip("_")
    return slug or "topic"


def atomic_write_text(path, text: str) -> None:
    """Write-temp-then-rename so concurrent readers never see partial files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


@dataclass(frozen=True)
class SectionContext:
    """Everything the section and QA prompts need about one Section node."""

    book_title: str
    part_title: str
    part_description: str
    chapter_title: str
    chapter_description: str
    section_title: str
    subsection_titles: tuple
    style: StyleProfile
    schema: DomainSchema

    @classmethod
    def from_tree(
        cls,
        tree: TocNode,
        locator: Tuple[int, int, int],
        style: StyleProfile,
        schema: DomainSchema,
    ) -> "SectionContext":
        section = resolve_section(tree, locator)
        pi, ci, _ = locator
        part = tree.children[pi]
        chapter = part.children[ci]
        return cls(
            book_title=tree.title,
            part_title=part.title,
            part_description=part.description,
            chapter_title=chapter.title,
            chapter_description=chapter.description,
            section_title=section.title,
            subsection_titles=tuple(sub.title for sub in section.children),
            style=style,
            schema=schema,
        )


def resolve_section(tree: TocNode, locator: Tuple[int, int, int]) -> TocNode:
    pi, ci, si = locator
    try:
        node = tree.children[pi].children[ci].children[si]
    except IndexError:
        raise LocatorError(f"locator {locator} out of range") from None
    if node.kind is not NodeKind.SECTION:
        raise LocatorError(f"locator {locator} addresses a {node.kind.value} node")
    return node


# -- stage 1: domain detailing ---------------------------------------------------


def detail_topic(
    style: StyleProfile,
    client,
    schema_path=None,
    permissive: bool = False,
) -> DomainSchema:
    """Generate the editable domain schema (description, subtopics, key
    questions). When ``schema_path`` is given the schema is persisted there
    before any later stage runs, as the expert-refinement checkpoint."""
    prompt = render_prompt(
        TemplateId.TOPIC_DETAIL,
        {
            "topic": style.topic,
            "audience": style.audience.prompt_label,
            "intent": style.intent,
        },
    )
    raw = client.generate(
        GenerationRequest(prompt=prompt, temperature=PROSE_TEMPERATURE)
    )
    schema = DomainSchema.from_json_value(extract_json(raw), permissive=permissive)
    if schema_path is not None:
        atomic_write_text(
            schema_path,
            json.dumps(schema.to_json_value(), indent=2, ensure_ascii=False) + "\n",
        )
    return schema


def load_schema(schema_path, permissive: bool = False) -> DomainSchema:
    with open(schema_path, "r", encoding="utf-8") as fh:
        return DomainSchema.from_json_value(json.load(fh), permissive=permissive)


# -- stage 2: outline generation --------------------------------------------------


def _bullet_list(items) -> str:
    return "\n".join(f"- {item}" for item in items)


def generate_outline(
    style: StyleProfile,
    schema: DomainSchema,
    client,
    permissive: bool = False,
) -> BookOutline:
    prompt = render_prompt(
        TemplateId.TOC_GEN,
        {
            "topic": style.topic,
            "audience": style.audience.prompt_label,
            "intent": style.intent,
            "genre": style.genre,
            "tone": style.tone,
            "voice": style.voice,
            "language": style.language,
            "description": schema.description,
            "subtopics": _bullet_list(schema.subtopics),
            "key_questions": _bullet_list(schema.key_questions),
        },
    )
    raw = client.generate(
        GenerationRequest(prompt=prompt, temperature=PROSE_TEMPERATURE)
    )
    return BookOutline.from_json_value(extract_json(raw), permissive=permissive)


# -- stage 3: section prose --------------------------------------------------------


def generate_section(
    tree: TocNode,
    locator: Tuple[int, int, int],
    style: StyleProfile,
    schema: DomainSchema,
    client,
) -> str:
    """Generate prose for one Section node and store it on the node.

    Subsection titles are passed as hints for the prose to integrate;
    subsections never carry content of their own.
    """
    ctx = SectionContext.from_tree(tree, locator, style, schema)
    prompt = render_prompt(
        TemplateId.SECTION_GEN,
        {
            "intent": style.intent,
            "audience": style.audience.prompt_label,
            "genre": style.genre,
            "tone": style.tone,
            "voice": style.voice,
            "language": style.language,
            "description": schema.description,
            "book_title": ctx.book_title,
            "part_title": ctx.part_title,
            "part_description": ctx.part_description,
            "chapter_title": ctx.chapter_title,
            "chapter_description": ctx.chapter_description,
            "section_title": ctx.section_title,
            "subsection_titles": ", ".join(ctx.subsection_titles) or "(none)",
        },
    )
    text = client.generate(
        GenerationRequest(prompt=prompt, temperature=PROSE_TEMPERATURE)
    ).strip()
    if not text:
        raise EmptyGeneration(f"blank section content for locator {locator}")
    section = resolve_section(tree, locator)
    section.content = text
    return text


# -- stage 3b: QA escalation --------------------------------------------------------


def generate_qa_sequence(
    ctx: SectionContext,
    content: str,
    n: int,
    client,
) -> List[QaPair]:
    """Generate n QA pairs of escalating difficulty for one section.

    Question 1 uses the factual-recall prompt branch; each later question
    passes the previous question into the escalation branch. Every answer
    call is grounded in the full section text. Ranks run 1..n; the first
    ceil(n/2) pairs land in the Easy bucket, the rest in Hard.
    """
    if n < 2:
        raise SchemaShape("qa_per_section must be >= 2 so both buckets are non-empty")
    if not content.strip():
        raise SchemaShape("section content must be non-empty before QA generation")

    base = {
        "topic_name": ctx.style.topic,
        "book_title": ctx.book_title,
        "target_audience": ctx.style.audience.prompt_label,
        "intent": ctx.style.intent,
        "topic_description": ctx.schema.description,
        "chapter_title": ctx.chapter_title,
        "section_title": ctx.section_title,
        "section_text": content,
    }
    cut = easy_count(n)
    pairs: List[QaPair] = []
    previous: Optional[str] = None
    for rank in range(1, n + 1):
        q_bindings = dict(
            base, guiding_questions="; ".join(ctx.schema.key_questions)
        )
        if previous is not None:
            q_bindings["previous_question"] = previous
        q_prompt = render_prompt(TemplateId.QUESTION_GEN, q_bindings)
        try:
            question = client.generate(
                GenerationRequest(prompt=q_prompt, temperature=PROSE_TEMPERATURE)
            ).strip()
            if not question:
                raise EmptyGeneration(f"blank question at rank {rank}")
            a_prompt = render_prompt(
                TemplateId.ANSWER_GEN, dict(base, question=question)
            )
            answer = client.generate(
                GenerationRequest(prompt=a_prompt, temperature=ANSWER_TEMPERATURE)
            ).strip()
            if not answer:
                raise EmptyGeneration(f"blank answer at rank {rank}")
        except ProviderError as err:
            raise QaGenerationInterrupted(rank, err) from err
        pairs.append(
            QaPair(
                question=question,
                answer=answer,
                rank=rank,
                bucket=QaBucket.EASY if rank <= cut else QaBucket.HARD,
            )
        )
        previous = question
    return pairs


# -- whole-book orchestration ---------------------------------------------------------


Locator = Tuple[int, int, int]


@dataclass
class BookArtifact:
    """A fully or partially populated book: tree plus per-section QA."""

    style: StyleProfile
    schema: DomainSchema
    tree: TocNode
    qa: Dict[Locator, List[QaPair]]

    def fingerprint(self, qa_per_section: int) -> str:
        payload = json.dumps(
            {
                "style": _style_to_json(self.style),
                "schema": self.schema.to_json_value(),
                "qa_per_section": qa_per_section,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def section_complete(self, locator: Locator, qa_per_section: int) -> bool:
        section = resolve_section(self.tree, locator)
        return bool(section.content) and len(self.qa.get(locator, ())) == qa_per_section

    def is_complete(self, qa_per_section: int) -> bool:
        return all(
            self.section_complete(loc, qa_per_section)
            for loc, _ in self.tree.sections()
        )

    def to_json_value(self, qa_per_section: int) -> dict:
        return {
            "fingerprint": self.fingerprint(qa_per_section),
            "qa_per_section": qa_per_section,
            "style": _style_to_json(self.style),
            "schema": self.schema.to_json_value(),
            "tree": self.tree.to_json_value(),
            "qa": {
                f"{p}-{c}-{s}": [pair.to_json_value() for pair in pairs]
                for (p, c, s), pairs in sorted(self.qa.items())
            },
        }

    @classmethod
    def from_json_value(cls, obj: dict) -> "BookArtifact":
        qa: Dict[Locator, List[QaPair]] = {}
        for key, pairs in obj.get("qa", {}).items():
            p, c, s = (int(x) for x in key.split("-"))
            qa[(p, c, s)] = [QaPair.from_json_value(v) for v in pairs]
        return cls(
            style=_style_from_json(obj["style"]),
            schema=DomainSchema.from_json_value(obj["schema"], permissive=True),
            tree=TocNode.from_json_value(obj["tree"]),
            qa=qa,
        )


def _style_to_json(style: StyleProfile) -> dict:
    return {
        "topic": style.topic,
        "intent": style.intent,
        "audience": style.audience.wire,
        "genre": style.genre,
        "tone": style.tone,
        "voice": style.voice,
        "language": style.language,
    }


def _style_from_json(obj: dict) -> StyleProfile:
    return StyleProfile(
        topic=obj["topic"],
        intent=obj["intent"],
        audience=Persona.parse(obj["audience"]),
        genre=obj["genre"],
        tone=obj["tone"],
        voice=obj["voice"],
        language=obj["language"],
    )


def _write_checkpoint(path, artifact: BookArtifact, qa_per_section: int) -> None:
    atomic_write_text(
        path,
        json.dumps(artifact.to_json_value(qa_per_section), ensure_ascii=False) + "\n",
    )


def load_checkpoint(path) -> BookArtifact:
    with open(path, "r", encoding="utf-8") as fh:
        return BookArtifact.from_json_value(json.load(fh))


def synthesize_book(
    style: StyleProfile,
    qa_per_section: int,
    client,
    schema: Optional[DomainSchema] = None,
    schema_path=None,
    outline: Optional[BookOutline] = None,
    checkpoint_path=None,
    permissive: bool = False,
    progress: Optional[Callable[[str], None]] = None,
) -> BookArtifact:
    """End-to-end synthesis of one book, resumable at section granularity.

    Schema resolution order: explicit ``schema`` argument, then an existing
    file at ``schema_path`` (the expert-edited version wins), then a fresh
    detailing call persisted to ``schema_path``. A pre-generated ``outline``
    skips the outline stage. When ``checkpoint_path`` exists, work continues
    from it; completed sections trigger no provider calls. A checkpoint
    written under a different style/schema/qa configuration raises
    CheckpointMismatch instead of silently mixing runs.
    """

    def note(msg: str) -> None:
        if progress:
            progress(msg)

    if schema is None:
        if schema_path is not None and Path(schema_path).exists():
            schema = load_schema(schema_path, permissive=True)
            note(f"loaded schema from {schema_path}")
        else:
            schema = detail_topic(
                style, client, schema_path=schema_path, permissive=permissive
            )
            note("domain schema generated")

    artifact: Optional[BookArtifact] = None
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        artifact = load_checkpoint(checkpoint_path)
        expected = BookArtifact(
            style=style, schema=schema, tree=artifact.tree, qa={}
        ).fingerprint(qa_per_section)
        if artifact.fingerprint(qa_per_section) != expected:
            raise CheckpointMismatch(
                f"checkpoint {checkpoint_path} was written under a different "
                f"style/schema/qa configuration"
            )
        note(f"resuming from checkpoint {checkpoint_path}")

    if artifact is None:
        if outline is None:
            outline = generate_outline(style, schema, client, permissive=permissive)
        artifact = BookArtifact(
            style=style, schema=schema, tree=build_toc_tree(outline), qa={}
        )
        if checkpoint_path is not None:
            _write_checkpoint(checkpoint_path, artifact, qa_per_section)
        note(f"outline generated: {artifact.tree.node_count()} nodes")

    locators = [loc for loc, _ in artifact.tree.sections()]
    for idx, locator in enumerate(locators, start=1):
        if artifact.section_complete(locator, qa_per_section):
            continue
        section = resolve_section(artifact.tree, locator)
        if not section.content:
            generate_section(artifact.tree, locator, style, schema, client)
        if len(artifact.qa.get(locator, ())) != qa_per_section:
            ctx = SectionContext.from_tree(artifact.tree, locator, style, schema)
            artifact.qa[locator] = generate_qa_sequence(
                ctx, section.content, qa_per_section, client
            )
        if checkpoint_path is not None:
            _write_checkpoint(checkpoint_path, artifact, qa_per_section)
        note(f"section {idx}/{len(locators)} done: {section.title}")
    return artifact


# -- corpus emission --------------------------------------------------------------------


def records_from_artifact(
    artifact: BookArtifact,
    tokenizer,
    domain: Optional[str] = None,
) -> List[CorpusRecord]:
    """Flatten a populated book into corpus records, document order.

    Each section yields one Book record followed by its QA records in rank
    order; QA text is a plain "Question: ...\\nAnswer: ..." rendering.
    """
    domain = domain or slugify(artifact.style.topic)
    persona = artifact.style.audience
    records: List[CorpusRecord] = []
    for (p, c, s), section in artifact.tree.sections():
        if not section.content:
            continue
        stem = f"{domain}-{persona.wire}-p{p:02d}c{c:02d}s{s:02d}"
        records.append(
            CorpusRecord(
                id=f"{stem}-book",
                text=section.content,
                domain=domain,
                persona=persona,
                cognitive=CognitiveClass.BOOK,
                part_idx=p,
                chapter_idx=c,
                section_idx=s,
                token_count=tokenizer.count(section.content),
                source=Source.SYNTHETIC,
            )
        )
        for pair in artifact.qa.get((p, c, s), ()):
            text = f"Question: {pair.question}\nAnswer: {pair.answer}"
            records.append(
                CorpusRecord(
                    id=f"{stem}-q{pair.rank:02d}",
                    text=text,
                    domain=domain,
                    persona=persona,
                    cognitive=pair.bucket.cognitive,
                    part_idx=p,
                    chapter_idx=c,
                    section_idx=s,
                    token_count=tokenizer.count(text),
                    source=Source.SYNTHETIC,
                )
            )
    return records


__all__ = [
    "SectionContext",
    "resolve_section",
    "detail_topic",
    "load_schema",
    "generate_outline",
    "generate_section",
    "generate_qa_sequence",
    "BookArtifact",
    "synthesize_book",
    "load_checkpoint",
    "records_from_artifact",
    "slugify",
    "atomic_write_text",
    "DEFAULT_QA_PER_SECTION",
]
