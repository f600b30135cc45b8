"""Prompt templates and verbatim placeholder substitution.

Templates live as text assets under ``templates/``; rendering replaces
``{placeholder}`` slots and touches nothing else, so rendered prompts are
byte-stable and golden-testable. The question template has two branches:
the first-question variant and the escalation variant, selected by whether
``previous_question`` is bound.
"""

from __future__ import annotations

import enum
import re
from importlib import resources
from typing import Dict, Mapping

from .errors import MissingBinding, UnknownPlaceholder


class TemplateId(enum.Enum):
    TOPIC_DETAIL = "topic_detail"
    TOC_GEN = "toc_gen"
    SECTION_GEN = "section_gen"
    QUESTION_GEN = "question_gen"
    ANSWER_GEN = "answer_gen"


_ASSET_FOR = {
    TemplateId.TOPIC_DETAIL: "topic_detail.txt",
    TemplateId.TOC_GEN: "toc_gen.txt",
    TemplateId.SECTION_GEN: "section_gen.txt",
    TemplateId.ANSWER_GEN: "answer_gen.txt",
}
_QUESTION_FIRST = "question_first.txt"
_QUESTION_NEXT = "question_next.txt"

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")

_cache: Dict[str, str] = {}


def _load_asset(name: str) -> str:
    if name not in _cache:
        _cache[name] = (
            resources.files("bookforge.templates").joinpath(name).read_text("utf-8")
        )
    return _cache[name]


def template_text(template_id: TemplateId, with_previous: bool = False) -> str:
    """Raw template text; for QUESTION_GEN, pick the branch explicitly."""
    if template_id is TemplateId.QUESTION_GEN:
        return _load_asset(_QUESTION_NEXT if with_previous else _QUESTION_FIRST)
    return _load_asset(_ASSET_FOR[template_id])


def placeholders(template_id: TemplateId, with_previous: bool = False) -> frozenset:
    return frozenset(
        _PLACEHOLDER_RE.findall(template_text(template_id, with_previous))
    )


def render_prompt(
    template_id: TemplateId,
    bindings: Mapping[str, str],
    strict: bool = True,
) -> str:
    """Substitute bindings into the template, verbatim, single pass.

    Raises MissingBinding for any declared placeholder left unbound and,
    under strict mode, UnknownPlaceholder for bindings the template does
    not declare. Brace sequences that are not declared placeholders (the
    JSON skeleton in the outline template) pass through untouched.
    """
    with_previous = (
        template_id is TemplateId.QUESTION_GEN and "previous_question" in bindings
    )
    text = template_text(template_id, with_previous)
    declared = placeholders(template_id, with_previous)

    for name in sorted(declared):
        if name not in bindings:
            raise MissingBinding(name, template_id.value)
    if strict:
        extras = set(bindings) - declared
        if extras:
            raise UnknownPlaceholder(extras, template_id.value)

    def _sub(match: re.Match) -> str:
        name = match.group(1)
        if name in declared:
            return str(bindings[name])
        return match.group(0)

    return _PLACEHOLDER_RE.sub(_sub, text)


__all__ = ["TemplateId", "render_prompt", "template_text", "placeholders"]
