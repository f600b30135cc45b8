"""bookforge: synthetic textbook + QA corpus builder with curriculum
scheduling, benchmark decontamination, and token accounting."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    BookOutline,
    CognitiveClass,
    CorpusRecord,
    DecontamReport,
    DomainSchema,
    NodeKind,
    Persona,
    QaBucket,
    QaPair,
    ScheduleKind,
    ScheduleSpec,
    Source,
    StyleProfile,
    TocNode,
    build_toc_tree,
    outline_from_tree,
)
from .prompts import TemplateId, render_prompt  # noqa: F401
from .providers import (  # noqa: F401
    EmbeddingVector,
    GenerationRequest,
    MockEmbedder,
    MockProvider,
    ProviderConfig,
    RetryingClient,
    cosine,
)
from .jsonx import extract_json  # noqa: F401
from .synthesis import (  # noqa: F401
    BookArtifact,
    SectionContext,
    detail_topic,
    generate_outline,
    generate_qa_sequence,
    generate_section,
    records_from_artifact,
    synthesize_book,
)
from .decontam import BenchmarkItem, decontaminate, nearest_benchmark  # noqa: F401
from .schedule import (  # noqa: F401
    Chunk,
    chunk_streams,
    mix_with_replay,
    schedule_cog,
    schedule_cog_con,
    schedule_flat,
    schedule_interleaved,
)
from .corpus import (  # noqa: F401
    DomainGap,
    TokenReport,
    count_tokens,
    load_tokenizer,
    rank_domain_gaps,
    read_corpus,
    token_report,
    write_corpus,
)
