import pytest

from bookforge.errors import MissingBinding, UnknownPlaceholder
from bookforge.prompts import TemplateId, placeholders, render_prompt, template_text
from helpers import DATA_DIR

GOLD = DATA_DIR / "golden_prompts"

DESC = (
    "Microeconomics is the study of how individuals, families, and businesses "
    "make choices about using limited resources."
)
SECTION_TEXT = (
    "Scarcity, as we've established, means we can't have everything we want. "
    "This universal truth forces us to confront some tough questions."
)
TOC_BINDINGS = {
    "topic": "Microeconomics",
    "audience": "high school",
    "intent": "creating introductory learning materials",
    "genre": "educational textbook",
    "tone": "clear, engaging, and rigorous",
    "voice": "active and direct",
    "language": "plain English with precise terminology",
    "description": DESC,
    "subtopics": "- Scarcity and Choice\n- Supply and Demand\n- Market Structures\n- Consumer Behavior\n- Producer Theory\n- Market Failures",
    "key_questions": "- What fundamental economic problem does microeconomics primarily address?\n- How do prices coordinate economic activity?\n- Why do markets sometimes fail?\n- How do firms decide how much to produce?\n- What determines consumer choices?\n- How does competition shape market outcomes?",
}
QUESTION_BINDINGS = {
    "topic_name": "Microeconomics",
    "book_title": "The Lemonade Stand Economy",
    "target_audience": "high school",
    "intent": "creating introductory learning materials",
    "topic_description": DESC,
    "guiding_questions": "What fundamental economic problem does microeconomics primarily address?; How do prices coordinate economic activity?",
    "chapter_title": "Chapter 1: Welcome to Microeconomics!",
    "section_title": "What is Microeconomics?",
    "section_text": SECTION_TEXT,
}

GOLDEN_CASES = [
    (
        "topic_detail.txt",
        TemplateId.TOPIC_DETAIL,
        {
            "topic": "Anatomy",
            "audience": "undergraduate",
            "intent": "training domain experts",
        },
    ),
    ("toc_gen.txt", TemplateId.TOC_GEN, TOC_BINDINGS),
    (
        "section_gen.txt",
        TemplateId.SECTION_GEN,
        {
            "intent": "creating introductory learning materials",
            "audience": "high school",
            "genre": "educational textbook",
            "tone": "clear, engaging, and rigorous",
            "voice": "active and direct",
            "language": "plain English with precise terminology",
            "description": DESC,
            "book_title": "The Lemonade Stand Economy",
            "part_title": "Part 1: The Basics of Making Choices",
            "part_description": "This section introduces the foundational ideas of economic decision making.",
            "chapter_title": "Chapter 1: Welcome to Microeconomics!",
            "chapter_description": "This chapter introduces the world of microeconomics.",
            "section_title": "What is Microeconomics?",
            "subsection_titles": "The 'Micro' in Microeconomics, Lemonade Stands and Economies",
        },
    ),
    ("question_first.txt", TemplateId.QUESTION_GEN, QUESTION_BINDINGS),
    (
        "question_next.txt",
        TemplateId.QUESTION_GEN,
        dict(QUESTION_BINDINGS, previous_question="What is scarcity?"),
    ),
    (
        "answer_gen.txt",
        TemplateId.ANSWER_GEN,
        {
            k: v for k, v in QUESTION_BINDINGS.items() if k != "guiding_questions"
        }
        | {"question": "What are the three main decision-makers studied in microeconomics?"},
    ),
]


class TestGoldenPrompts:
    @pytest.mark.parametrize(
        "golden_name,template_id,bindings",
        GOLDEN_CASES,
        ids=[c[0].removesuffix(".txt") for c in GOLDEN_CASES],
    )
    def test_byte_match(self, golden_name, template_id, bindings):
        expected = (GOLD / golden_name).read_bytes()
        rendered = render_prompt(template_id, bindings).encode("utf-8")
        assert rendered == expected

    def test_rendering_is_pure(self):
        a = render_prompt(TemplateId.TOC_GEN, TOC_BINDINGS)
        b = render_prompt(TemplateId.TOC_GEN, TOC_BINDINGS)
        assert a == b


class TestTemplateContent:
    def test_topic_detail_required_line(self):
        text = render_prompt(
            TemplateId.TOPIC_DETAIL,
            {"topic": "Anatomy", "audience": "undergraduate",
             "intent": "training domain experts"},
        )
        assert "A factual and high-level description of the topic" in text
        assert 'Topic:"Anatomy".' in text

    def test_question_first_branch(self):
        text = render_prompt(TemplateId.QUESTION_GEN, QUESTION_BINDINGS)
        assert "You are generating the **first question**" in text
        assert "factual recall" in text
        assert "Previous Question" not in text

    def test_question_next_branch(self):
        text = render_prompt(
            TemplateId.QUESTION_GEN,
            dict(QUESTION_BINDINGS, previous_question="What is scarcity?"),
        )
        assert "slightly more challenging" in text
        assert "- What is scarcity?" in text

    def test_answer_grounding_block(self):
        text = render_prompt(
            TemplateId.ANSWER_GEN,
            {
                k: v
                for k, v in QUESTION_BINDINGS.items()
                if k != "guiding_questions"
            }
            | {"question": "Why?"},
        )
        assert "--- Section Content Start ---" in text
        assert SECTION_TEXT in text
        assert "### Answer ###" in text

    def test_json_skeleton_braces_survive(self):
        text = render_prompt(TemplateId.TOC_GEN, TOC_BINDINGS)
        assert '"title": "<book_title>"' in text
        assert "{{" not in text


class TestRenderErrors:
    def test_missing_binding_named(self):
        with pytest.raises(MissingBinding) as err:
            render_prompt(TemplateId.TOPIC_DETAIL, {"topic": "X", "intent": "y"})
        assert err.value.placeholder == "audience"

    def test_unknown_placeholder_strict(self):
        bindings = {
            "topic": "X", "audience": "a", "intent": "i", "bogus": "?",
        }
        with pytest.raises(UnknownPlaceholder) as err:
            render_prompt(TemplateId.TOPIC_DETAIL, bindings)
        assert "bogus" in str(err.value)

    def test_unknown_placeholder_lenient(self):
        bindings = {
            "topic": "X", "audience": "a", "intent": "i", "bogus": "?",
        }
        text = render_prompt(TemplateId.TOPIC_DETAIL, bindings, strict=False)
        assert "?" not in text

    def test_binding_values_not_rescanned(self):
        text = render_prompt(
            TemplateId.TOPIC_DETAIL,
            {"topic": "{audience}", "audience": "grown-ups", "intent": "i"},
        )
        assert 'Topic:"{audience}".' in text
        assert 'Target audience: "grown-ups".' in text

    def test_placeholder_sets(self):
        assert placeholders(TemplateId.TOPIC_DETAIL) == {
            "topic", "audience", "intent",
        }
        assert "previous_question" in placeholders(
            TemplateId.QUESTION_GEN, with_previous=True
        )
        assert "previous_question" not in placeholders(TemplateId.QUESTION_GEN)

    def test_question_branches_share_common_header(self):
        first = template_text(TemplateId.QUESTION_GEN, with_previous=False)
        nxt = template_text(TemplateId.QUESTION_GEN, with_previous=True)
        cut = "### TASK ###"
        assert first.split(cut)[0] == nxt.split(cut)[0]
