"""Domain types shared by every pipeline stage.

Style context, domain schema, the book blueprint tree, corpus records,
schedule specs, and the decontamination report.  Everything here is a plain
dataclass or enum; the only algorithmic piece is the outline <-> tree
conversion at the bottom.

All types are safe to share across workers: they are frozen, except
TocNode whose ``content`` field is filled in during section generation and
treated as immutable afterwards.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from .errors import BoundViolation, IllegalShape, SchemaShape

log = logging.getLogger(__name__)


class Persona(enum.IntEnum):
    """Audience level, the content axis. Declaration order is the total order."""

    HIGH_SCHOOL = 0
    UNDERGRADUATE = 1
    GRADUATE = 2
    RESEARCHER = 3

    @property
    def wire(self) -> str:
        return self.name.lower()

    @property
    def prompt_label(self) -> str:
        """Human phrasing used inside prompts ("high school", "graduate", ...)."""
        return self.name.lower().replace("_", " ")

    @classmethod
    def parse(cls, text: str) -> "Persona":
        key = text.strip().lower().replace(" ", "_").replace("-", "_")
        aliases = {"highschool": "high_school", "undergrad": "undergraduate"}
        key = aliases.get(key, key)
        try:
            return cls[key.upper()]
        except KeyError:
            raise SchemaShape(f"unknown persona {text!r}") from None


class CognitiveClass(enum.IntEnum):
    """Cognitive depth axis: book prose, then easy QA, then hard QA."""

    BOOK = 0
    EASY_QA = 1
    HARD_QA = 2

    @property
    def wire(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "CognitiveClass":
        key = text.strip().lower().replace(" ", "_").replace("-", "_")
        try:
            return cls[key.upper()]
        except KeyError:
            raise SchemaShape(f"unknown cognitive class {text!r}") from None


class QaBucket(enum.Enum):
    EASY = "easy"
    HARD = "hard"

    @property
    def cognitive(self) -> CognitiveClass:
        return (
            CognitiveClass.EASY_QA if self is QaBucket.EASY else CognitiveClass.HARD_QA
        )


class Source(enum.Enum):
    SYNTHETIC = "synthetic"
    REPLAY = "replay"


@dataclass(frozen=True)
class StyleProfile:
    """Generation context threaded through every prompt."""

    topic: str
    intent: str
    audience: Persona
    genre: str = "educational textbook"
    tone: str = "clear, engaging, and rigorous"
    voice: str = "active and direct"
    language: str = "plain English with precise terminology"

    def __post_init__(self):
        if not self.topic.strip():
            raise SchemaShape("StyleProfile.topic must be non-empty")
        if not self.intent.strip():
            raise SchemaShape("StyleProfile.intent must be non-empty")


SCHEMA_LIST_MIN = 6
SCHEMA_LIST_MAX = 8


@dataclass(frozen=True)
class DomainSchema:
    """Description plus core subtopics and key questions for one domain."""

    description: str
    subtopics: tuple
    key_questions: tuple

    def __post_init__(self):
        object.__setattr__(self, "subtopics", tuple(self.subtopics))
        object.__setattr__(self, "key_questions", tuple(self.key_questions))

    def validate(self, permissive: bool = False) -> None:
        for name, items in (
            ("subtopics", self.subtopics),
            ("key_questions", self.key_questions),
        ):
            if any(not str(s).strip() for s in items):
                raise SchemaShape(f"DomainSchema.{name} contains empty entries")
            if not SCHEMA_LIST_MIN <= len(items) <= SCHEMA_LIST_MAX:
                msg = (
                    f"DomainSchema.{name} has {len(items)} entries, expected "
                    f"{SCHEMA_LIST_MIN}-{SCHEMA_LIST_MAX}"
                )
                if permissive:
                    log.warning("%s (accepted under permissive validation)", msg)
                else:
                    raise BoundViolation(msg)

    def to_json_value(self) -> dict:
        return {
            "description": self.description,
            "subtopics": list(self.subtopics),
            "key_questions": list(self.key_questions),
        }

    @classmethod
    def from_json_value(cls, obj: Any, permissive: bool = False) -> "DomainSchema":
        if not isinstance(obj, dict):
            raise SchemaShape("domain schema must be a JSON object")
        missing = [k for k in ("description", "subtopics", "key_questions") if k not in obj]
        if missing:
            raise SchemaShape(f"domain schema missing keys: {', '.join(missing)}")
        if not isinstance(obj["description"], str):
            raise SchemaShape("domain schema 'description' must be a string")
        for key in ("subtopics", "key_questions"):
            if not isinstance(obj[key], list) or not all(
                isinstance(s, str) for s in obj[key]
            ):
                raise SchemaShape(f"domain schema {key!r} must be a list of strings")
        schema = cls(
            description=obj["description"],
            subtopics=tuple(obj["subtopics"]),
            key_questions=tuple(obj["key_questions"]),
        )
        schema.validate(permissive=permissive)
        return schema


# -- book outline -------------------------------------------------------------

PARTS_RANGE = (4, 6)
CHAPTERS_RANGE = (4, 6)
SECTIONS_RANGE = (3, 6)
SUBSECTIONS_RANGE = (2, 3)


@dataclass(frozen=True)
class OutlineSubsection:
    title: str


@dataclass(frozen=True)
class OutlineSection:
    title: str
    subsections: Optional[tuple] = None


@dataclass(frozen=True)
class OutlineChapter:
    title: str
    description: str
    sections: tuple = ()


@dataclass(frozen=True)
class OutlinePart:
    title: str
    description: str
    chapters: tuple = ()


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise SchemaShape(f"{where} missing key {key!r}")
    return obj[key]


def _require_str(obj: dict, key: str, where: str) -> str:
    val = _require(obj, key, where)
    if not isinstance(val, str) or not val.strip():
        raise SchemaShape(f"{where} key {key!r} must be a non-empty string")
    return val


def _check_bound(count: int, lo: int, hi: int, what: str, permissive: bool) -> None:
    if not lo <= count <= hi:
        msg = f"{what}: {count} outside [{lo}, {hi}]"
        if permissive:
            log.warning("%s (accepted under permissive validation)", msg)
        else:
            raise BoundViolation(msg)


@dataclass(frozen=True)
class BookOutline:
    """Hierarchical blueprint parsed from provider JSON.

    Structural-shape problems (missing keys, wrong types, empty titles)
    always raise SchemaShape; count bounds raise BoundViolation unless
    validated permissively, in which case they log a warning.
    """

    title: str
    parts: tuple = ()

    def validate(self, permissive: bool = False) -> None:
        if not self.title.strip():
            raise SchemaShape("outline title must be non-empty")
        _check_bound(len(self.parts), *PARTS_RANGE, "parts per book", permissive)
        for part in self.parts:
            _check_bound(
                len(part.chapters), *CHAPTERS_RANGE,
                f"chapters in part {part.title!r}", permissive,
            )
            for chap in part.chapters:
                _check_bound(
                    len(chap.sections), *SECTIONS_RANGE,
                    f"sections in chapter {chap.title!r}", permissive,
                )
                for sec in chap.sections:
                    if sec.subsections is not None:
                        _check_bound(
                            len(sec.subsections), *SUBSECTIONS_RANGE,
                            f"subsections in section {sec.title!r}", permissive,
                        )

    def to_json_value(self) -> dict:
        parts = []
        for part in self.parts:
            chapters = []
            for chap in part.chapters:
                sections = []
                for sec in chap.sections:
                    entry: dict = {"title": sec.title}
                    if sec.subsections is not None:
                        entry["subsections"] = [
                            {"title": sub.title} for sub in sec.subsections
                        ]
                    sections.append(entry)
                chapters.append(
                    {
                        "title": chap.title,
                        "description": chap.description,
                        "sections": sections,
                    }
                )
            parts.append(
                {
                    "title": part.title,
                    "description": part.description,
                    "chapters": chapters,
                }
            )
        return {"title": self.title, "parts": parts}

    @classmethod
    def from_json_value(cls, obj: Any, permissive: bool = False) -> "BookOutline":
        if not isinstance(obj, dict):
            raise SchemaShape("outline must be a JSON object")
        title = _require_str(obj, "title", "outline")
        raw_parts = _require(obj, "parts", "outline")
        if not isinstance(raw_parts, list):
            raise SchemaShape("outline 'parts' must be a list")
        parts = []
        for pi, rp in enumerate(raw_parts):
            where = f"parts[{pi}]"
            if not isinstance(rp, dict):
                raise SchemaShape(f"{where} must be an object")
            chapters = []
            raw_chaps = _require(rp, "chapters", where)
            if not isinstance(raw_chaps, list):
                raise SchemaShape(f"{where} 'chapters' must be a list")
            for ci, rc in enumerate(raw_chaps):
                cwhere = f"{where}.chapters[{ci}]"
                if not isinstance(rc, dict):
                    raise SchemaShape(f"{cwhere} must be an object")
                sections = []
                raw_secs = _require(rc, "sections", cwhere)
                if not isinstance(raw_secs, list):
                    raise SchemaShape(f"{cwhere} 'sections' must be a list")
                for si, rs in enumerate(raw_secs):
                    swhere = f"{cwhere}.sections[{si}]"
                    if not isinstance(rs, dict):
                        raise SchemaShape(f"{swhere} must be an object")
                    subs = None
                    if "subsections" in rs and rs["subsections"] is not None:
                        if not isinstance(rs["subsections"], list):
                            raise SchemaShape(f"{swhere} 'subsections' must be a list")
                        subs = tuple(
                            OutlineSubsection(
                                _require_str(rb, "title", f"{swhere}.subsections[{bi}]")
                            )
                            for bi, rb in enumerate(rs["subsections"])
                        )
                    sections.append(
                        OutlineSection(
                            title=_require_str(rs, "title", swhere),
                            subsections=subs,
                        )
                    )
                chapters.append(
                    OutlineChapter(
                        title=_require_str(rc, "title", cwhere),
                        description=_require_str(rc, "description", cwhere),
                        sections=tuple(sections),
                    )
                )
            parts.append(
                OutlinePart(
                    title=_require_str(rp, "title", where),
                    description=_require_str(rp, "description", where),
                    chapters=tuple(chapters),
                )
            )
        outline = cls(title=title, parts=tuple(parts))
        outline.validate(permissive=permissive)
        return outline


# -- table-of-contents tree ---------------------------------------------------


class NodeKind(enum.Enum):
    ROOT = "root"
    PART = "part"
    CHAPTER = "chapter"
    SECTION = "section"
    SUBSECTION = "subsection"


LEGAL_CHILDREN = {
    NodeKind.ROOT: NodeKind.PART,
    NodeKind.PART: NodeKind.CHAPTER,
    NodeKind.CHAPTER: NodeKind.SECTION,
    NodeKind.SECTION: NodeKind.SUBSECTION,
    NodeKind.SUBSECTION: None,
}


@dataclass
class TocNode:
    """One node of the book blueprint.

    ``content`` stays empty everywhere except Section nodes, which receive
    their generated prose (subsection material is folded into the parent
    section; subsections are structural hints only).
    """

    kind: NodeKind
    title: str
    description: str = ""
    content: str = ""
    children: list = field(default_factory=list)

    def __post_init__(self):
        if not self.title.strip():
            raise IllegalShape(f"{self.kind.value} node with empty title")
        allowed = LEGAL_CHILDREN[self.kind]
        for child in self.children:
            if allowed is None or child.kind is not allowed:
                raise IllegalShape(
                    f"{self.kind.value} node may not contain {child.kind.value}"
                )

    def walk(self) -> Iterator["TocNode"]:
        """Depth-first, document order, including self."""
        yield self
        for child in self.children:
            yield from child.walk()

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    def sections(self) -> Iterator[tuple]:
        """Yield ((part_idx, chapter_idx, section_idx), section_node)."""
        if self.kind is not NodeKind.ROOT:
            raise IllegalShape("sections() must be called on the root node")
        for pi, part in enumerate(self.children):
            for ci, chap in enumerate(part.children):
                for si, sec in enumerate(chap.children):
                    yield (pi, ci, si), sec

    def to_json_value(self) -> dict:
        return {
            "kind": self.kind.value,
            "title": self.title,
            "description": self.description,
            "content": self.content,
            "children": [c.to_json_value() for c in self.children],
        }

    @classmethod
    def from_json_value(cls, obj: Any) -> "TocNode":
        if not isinstance(obj, dict):
            raise SchemaShape("tree node must be a JSON object")
        missing = [k for k in ("kind", "title") if k not in obj]
        if missing:
            raise SchemaShape(f"tree node missing keys: {', '.join(missing)}")
        try:
            kind = NodeKind(obj["kind"])
        except ValueError:
            raise IllegalShape(f"unknown node kind {obj['kind']!r}") from None
        return cls(
            kind=kind,
            title=obj["title"],
            description=obj.get("description", ""),
            content=obj.get("content", ""),
            children=[cls.from_json_value(c) for c in obj.get("children", [])],
        )


def build_toc_tree(outline: BookOutline) -> TocNode:
    """Expand a validated outline into its Root/Part/Chapter/Section tree."""
    parts = []
    for part in outline.parts:
        chapters = []
        for chap in part.chapters:
            sections = []
            for sec in chap.sections:
                subs = [
                    TocNode(kind=NodeKind.SUBSECTION, title=sub.title)
                    for sub in (sec.subsections or ())
                ]
                sections.append(
                    TocNode(kind=NodeKind.SECTION, title=sec.title, children=subs)
                )
            chapters.append(
                TocNode(
                    kind=NodeKind.CHAPTER,
                    title=chap.title,
                    description=chap.description,
                    children=sections,
                )
            )
        parts.append(
            TocNode(
                kind=NodeKind.PART,
                title=part.title,
                description=part.description,
                children=chapters,
            )
        )
    return TocNode(kind=NodeKind.ROOT, title=outline.title, children=parts)


def outline_from_tree(root: TocNode) -> BookOutline:
    """Inverse of build_toc_tree; drops generated content, keeps structure."""
    if root.kind is not NodeKind.ROOT:
        raise IllegalShape("outline_from_tree expects a root node")
    parts = []
    for part in root.children:
        chapters = []
        for chap in part.children:
            sections = []
            for sec in chap.children:
                subs = (
                    tuple(OutlineSubsection(sub.title) for sub in sec.children)
                    if sec.children
                    else None
                )
                sections.append(OutlineSection(title=sec.title, subsections=subs))
            chapters.append(
                OutlineChapter(
                    title=chap.title,
                    description=chap.description,
                    sections=tuple(sections),
                )
            )
        parts.append(
            OutlinePart(
                title=part.title,
                description=part.description,
                chapters=tuple(chapters),
            )
        )
    return BookOutline(title=root.title, parts=tuple(parts))


# -- QA pairs and corpus records ----------------------------------------------


def easy_count(n: int) -> int:
    """Ranks 1..easy_count(n) are Easy, the rest Hard: ceil(n/2)."""
    return (n + 1) // 2


@dataclass(frozen=True)
class QaPair:
    question: str
    answer: str
    rank: int
    bucket: QaBucket

    def __post_init__(self):
        if not self.question.strip() or not self.answer.strip():
            raise SchemaShape("QaPair question/answer must be non-empty")
        if self.rank < 1:
            raise SchemaShape("QaPair rank must be >= 1")

    def to_json_value(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "rank": self.rank,
            "bucket": self.bucket.value,
        }

    @classmethod
    def from_json_value(cls, obj: dict) -> "QaPair":
        return cls(
            question=obj["question"],
            answer=obj["answer"],
            rank=obj["rank"],
            bucket=QaBucket(obj["bucket"]),
        )


def check_qa_sequence(pairs) -> None:
    """Ranks must be exactly 1..n and buckets must follow the rank split."""
    n = len(pairs)
    ranks = [p.rank for p in pairs]
    if ranks != list(range(1, n + 1)):
        raise SchemaShape(f"QA ranks must be 1..{n} in order, got {ranks}")
    cut = easy_count(n)
    for p in pairs:
        expected = QaBucket.EASY if p.rank <= cut else QaBucket.HARD
        if p.bucket is not expected:
            raise SchemaShape(
                f"QA rank {p.rank}/{n} should be {expected.value}, got {p.bucket.value}"
            )


CORPUS_FIELDS = (
    "id",
    "text",
    "domain",
    "persona",
    "cognitive",
    "part_idx",
    "chapter_idx",
    "section_idx",
    "token_count",
    "source",
)


@dataclass(frozen=True)
class CorpusRecord:
    """One training unit: section prose or a QA pair, plus replay filler.

    Replay records carry cognitive=BOOK and persona=HIGH_SCHOOL as inert
    placeholders; ordering checks skip them via ``source``.
    """

    id: str
    text: str
    domain: str
    persona: Persona
    cognitive: CognitiveClass
    part_idx: int
    chapter_idx: int
    section_idx: int
    token_count: int
    source: Source = Source.SYNTHETIC

    def __post_init__(self):
        if not self.text:
            raise SchemaShape(f"record {self.id!r} has empty text")
        if self.token_count < 0:
            raise SchemaShape(f"record {self.id!r} has negative token_count")

    def to_json_value(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "domain": self.domain,
            "persona": self.persona.wire,
            "cognitive": self.cognitive.wire,
            "part_idx": self.part_idx,
            "chapter_idx": self.chapter_idx,
            "section_idx": self.section_idx,
            "token_count": self.token_count,
            "source": self.source.value,
        }

    @classmethod
    def from_json_value(cls, obj: dict) -> "CorpusRecord":
        missing = [k for k in CORPUS_FIELDS if k not in obj]
        if missing:
            raise SchemaShape(f"corpus record missing fields: {', '.join(missing)}")
        return cls(
            id=obj["id"],
            text=obj["text"],
            domain=obj["domain"],
            persona=Persona.parse(obj["persona"]),
            cognitive=CognitiveClass.parse(obj["cognitive"]),
            part_idx=obj["part_idx"],
            chapter_idx=obj["chapter_idx"],
            section_idx=obj["section_idx"],
            token_count=obj["token_count"],
            source=Source(obj["source"]),
        )


# -- schedule spec -------------------------------------------------------------


class ScheduleKind(enum.Enum):
    FLAT = "flat"
    COG = "cog"
    COG_CON = "cog_con"
    INTERLEAVED = "interleaved"

    @classmethod
    def parse(cls, text: str) -> "ScheduleKind":
        key = text.strip().lower().replace("+", "_").replace("-", "_")
        aliases = {"cognitive": "cog", "cognitive_content": "cog_con", "cogcon": "cog_con"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise SchemaShape(f"unknown schedule kind {text!r}") from None


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class ScheduleSpec:
    """Which regime to apply, replay ratio, chunk target, and the seed."""

    kind: ScheduleKind
    replay_ratio: tuple = (1, 1)
    chunk_target_tokens: int = 8192
    seed: int = 0

    def __post_init__(self):
        s, r = self.replay_ratio
        if s < 1 or r < 0:
            raise SchemaShape(
                f"replay_ratio must have synthetic >= 1 and replay >= 0, got {s}:{r}"
            )
        g = _gcd(s, r) if r else s
        object.__setattr__(self, "replay_ratio", (s // g, r // g))
        if self.chunk_target_tokens < 1:
            raise SchemaShape("chunk_target_tokens must be >= 1")

    @staticmethod
    def parse_ratio(text: str) -> tuple:
        try:
            s, r = text.split(":")
            return (int(s), int(r))
        except ValueError:
            raise SchemaShape(f"ratio must look like '1:1', got {text!r}") from None


# -- decontamination report -----------------------------------------------------


@dataclass(frozen=True)
class FlaggedExample:
    generated_text: str
    nearest_benchmark_text: str
    similarity: float

    def to_json_value(self) -> dict:
        return {
            "generated_text": self.generated_text,
            "nearest_benchmark_text": self.nearest_benchmark_text,
            "similarity": self.similarity,
        }


@dataclass(frozen=True)
class DecontamReport:
    total_generated: int
    removed: int
    threshold_remove: float
    threshold_report: float
    frac_above_report: float
    flagged_examples: tuple = ()

    def __post_init__(self):
        if self.removed > self.total_generated:
            raise SchemaShape("removed cannot exceed total_generated")
        if not 0 < self.threshold_remove <= 1 or not 0 < self.threshold_report <= 1:
            raise SchemaShape("thresholds must lie in (0, 1]")
        for ex in self.flagged_examples:
            if ex.similarity < self.threshold_report:
                raise SchemaShape(
                    "flagged example below the report threshold: "
                    f"{ex.similarity} < {self.threshold_report}"
                )

    def to_json_value(self) -> dict:
        return {
            "total_generated": self.total_generated,
            "removed": self.removed,
            "threshold_remove": self.threshold_remove,
            "threshold_report": self.threshold_report,
            "frac_above_report": self.frac_above_report,
            "flagged_examples": [ex.to_json_value() for ex in self.flagged_examples],
        }


__all__ = [
    "Persona",
    "CognitiveClass",
    "QaBucket",
    "Source",
    "StyleProfile",
    "DomainSchema",
    "BookOutline",
    "OutlinePart",
    "OutlineChapter",
    "OutlineSection",
    "OutlineSubsection",
    "NodeKind",
    "TocNode",
    "build_toc_tree",
    "outline_from_tree",
    "QaPair",
    "check_qa_sequence",
    "easy_count",
    "CorpusRecord",
    "CORPUS_FIELDS",
    "ScheduleKind",
    "ScheduleSpec",
    "FlaggedExample",
    "DecontamReport",
]
