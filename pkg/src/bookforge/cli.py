"""Operator surface: resumable subcommands over one job config.

    bookforge detail       --config job.json [--mock]
    bookforge outline      --config job.json [--mock] [--auto-schema]
    bookforge generate     --config job.json [--mock] [--auto-schema]
    bookforge decontaminate --config job.json [--mock]
    bookforge schedule     --config job.json [--kind cog_con] [--ratio 1:1]
    bookforge report       --config job.json [--input corpus.jsonl]
    bookforge inspect-tree --input book.json [--tokens] [--json]

Every subcommand is independently runnable, idempotent on completed
checkpoints, and writes a manifest next to its outputs. Exit codes:
0 success, 2 config error, 3 provider error, 4 validation error,
5 resumable interruption.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import __version__
from .corpus import (
    file_sha256,
    load_tokenizer,
    rank_domain_gaps,
    read_corpus,
    read_replay_pool,
    token_report,
    write_corpus,
    write_manifest,
)
from .decontam import (
    decontaminate,
    load_benchmark,
    render_domain_stats,
    render_flagged_examples,
)
from .errors import (
    BookforgeError,
    CheckpointMismatch,
    ConfigError,
    ProviderError,
    QaGenerationInterrupted,
    TokenizerLoadError,
    ValidationError,
)
from .model import (
    BookOutline,
    Persona,
    ScheduleKind,
    ScheduleSpec,
    StyleProfile,
    TocNode,
)
from .providers import ProviderConfig, make_clients
from .schedule import (
    block_counts,
    check_interleaved_plan,
    first_cog_con_violation,
    first_cog_violation,
    interleaved_chunk_plan,
    mix_with_replay,
    schedule_cog,
    schedule_cog_con,
    schedule_flat,
)
from .synthesis import (
    BookArtifact,
    detail_topic,
    generate_outline,
    load_schema,
    records_from_artifact,
    slugify,
    synthesize_book,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_VALIDATION = 4
EXIT_INTERRUPTED = 5


# -- job configuration -----------------------------------------------------------


class JobConfig:
    """Single auditable source of truth for a multi-stage job."""

    def __init__(self, raw: dict, base_dir: Path, config_path: Optional[Path] = None):
        self.raw = raw
        self.base_dir = base_dir
        self.config_path = config_path
        try:
            self.topics: List[str] = list(raw["topics"])
        except KeyError:
            raise ConfigError("topics", "missing") from None
        if not self.topics:
            raise ConfigError("topics", "must list at least one topic")
        personas = raw.get("personas", [p.wire for p in Persona])
        try:
            self.personas = [Persona.parse(p) for p in personas]
        except BookforgeError as err:
            raise ConfigError("personas", str(err)) from None
        style = raw.get("style", {})
        if "intent" not in style:
            raise ConfigError("style.intent", "missing")
        self.style_fields = {
            "intent": style["intent"],
            **{
                k: style[k]
                for k in ("genre", "tone", "voice", "language")
                if k in style
            },
        }
        self.qa_per_section = int(raw.get("qa_per_section", 4))
        if self.qa_per_section < 2:
            raise ConfigError("qa_per_section", "must be >= 2")
        self.tokenizer_spec = raw.get("tokenizer", "whitespace")
        self.seed = int(raw.get("seed", 0))

        providers = raw.get("providers", {})
        self.gen_config = self._provider_config(providers.get("generation", {}), "generation")
        self.embed_config = self._provider_config(providers.get("embedding", {}), "embedding")

        sched = raw.get("schedule", {})
        try:
            self.schedule_spec = ScheduleSpec(
                kind=ScheduleKind.parse(sched.get("kind", "cog_con")),
                replay_ratio=ScheduleSpec.parse_ratio(sched.get("replay_ratio", "1:1")),
                chunk_target_tokens=int(sched.get("chunk_target_tokens", 8192)),
                seed=int(sched.get("seed", self.seed)),
            )
        except BookforgeError as err:
            raise ConfigError("schedule", str(err)) from None

        decontam = raw.get("decontam", {})
        self.threshold_remove = float(decontam.get("threshold_remove", 0.9))
        self.threshold_report = float(decontam.get("threshold_report", 0.8))

        paths = raw.get("paths", {})
        self.workdir = self._path(paths.get("workdir", "work"))
        self.output_dir = self._path(paths.get("output_dir", "out"))
        self.replay_pool = self._opt_path(paths.get("replay_pool"))
        self.benchmark = self._opt_path(paths.get("benchmark"))

    def _path(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def _opt_path(self, p) -> Optional[Path]:
        return self._path(p) if p else None

    def _provider_config(self, obj: dict, where: str) -> ProviderConfig:
        try:
            return ProviderConfig(
                endpoint=obj.get("endpoint", "mock://local"),
                model_name=obj.get("model_name", "mock"),
                auth_source=obj.get("auth_source", ""),
                timeout=float(obj.get("timeout", 60.0)),
                max_retries=int(obj.get("max_retries", 3)),
                backoff_base=float(obj.get("backoff_base", 0.5)),
                parallelism=int(obj.get("parallelism", 4)),
            )
        except BookforgeError as err:
            raise ConfigError(f"providers.{where}", str(err)) from None

    @classmethod
    def load(cls, path: str) -> "JobConfig":
        cfg_path = Path(path)
        if not cfg_path.exists():
            raise ConfigError("config", f"file not found: {path}")
        try:
            raw = json.loads(cfg_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ConfigError("config", f"invalid JSON: {err}") from None
        return cls(raw, cfg_path.parent.resolve(), cfg_path)

    def style_for(self, topic: str, persona: Persona) -> StyleProfile:
        return StyleProfile(topic=topic, audience=persona, **self.style_fields)

    def jobs(self) -> List[Tuple[str, Persona]]:
        return [(t, p) for t in self.topics for p in self.personas]

    def schema_path(self, topic: str, persona: Persona) -> Path:
        return self.workdir / "schemas" / f"{slugify(topic)}__{persona.wire}.json"

    def outline_path(self, topic: str, persona: Persona) -> Path:
        return self.workdir / "outlines" / f"{slugify(topic)}__{persona.wire}.json"

    def checkpoint_path(self, topic: str, persona: Persona) -> Path:
        return self.workdir / "books" / f"{slugify(topic)}__{persona.wire}.json"

    def config_sha(self) -> str:
        return file_sha256(self.config_path) if self.config_path else ""


def _apply_overrides(cfg: JobConfig, args) -> JobConfig:
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
        cfg.schedule_spec = ScheduleSpec(
            kind=cfg.schedule_spec.kind,
            replay_ratio=cfg.schedule_spec.replay_ratio,
            chunk_target_tokens=cfg.schedule_spec.chunk_target_tokens,
            seed=args.seed,
        )
    if getattr(args, "workdir", None):
        cfg.workdir = Path(args.workdir)
    if getattr(args, "output_dir", None):
        cfg.output_dir = Path(args.output_dir)
    if getattr(args, "kind", None):
        cfg.schedule_spec = ScheduleSpec(
            kind=ScheduleKind.parse(args.kind),
            replay_ratio=cfg.schedule_spec.replay_ratio,
            chunk_target_tokens=cfg.schedule_spec.chunk_target_tokens,
            seed=cfg.schedule_spec.seed,
        )
    if getattr(args, "ratio", None):
        cfg.schedule_spec = ScheduleSpec(
            kind=cfg.schedule_spec.kind,
            replay_ratio=ScheduleSpec.parse_ratio(args.ratio),
            chunk_target_tokens=cfg.schedule_spec.chunk_target_tokens,
            seed=cfg.schedule_spec.seed,
        )
    return cfg


def _manifest_base(cfg: JobConfig, command: str) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config_sha256": cfg.config_sha(),
    }


def _say(msg: str) -> None:
    print(msg, flush=True)


# -- subcommands -------------------------------------------------------------------


def cmd_detail(args) -> int:
    cfg = _apply_overrides(JobConfig.load(args.config), args)
    gen, _ = make_clients(args.mock, cfg.seed, cfg.gen_config, cfg.embed_config)
    written = {}
    for topic, persona in cfg.jobs():
        path = cfg.schema_path(topic, persona)
        if path.exists():
            _say(f"detail: {path.name} exists, skipping")
            continue
        style = cfg.style_for(topic, persona)
        detail_topic(style, gen, schema_path=path, permissive=args.permissive)
        written[path.name] = file_sha256(path)
        _say(f"detail: wrote {path.name}")
    manifest = _manifest_base(cfg, "detail")
    manifest["outputs"] = written
    manifest["jobs"] = len(cfg.jobs())
    write_manifest(cfg.workdir / "detail.manifest.json", manifest)
    _say(
        "detail: schemas are editable; review them before running outline/generate "
        "(or pass --auto-schema there to skip the review gate)"
    )
    return EXIT_OK


def _ensure_schema(cfg: JobConfig, topic: str, persona: Persona, gen, auto: bool,
                   permissive: bool):
    path = cfg.schema_path(topic, persona)
    if path.exists():
        return load_schema(path, permissive=True)
    if not auto:
        raise ConfigError(
            "schemas",
            f"missing schema for ({topic}, {persona.wire}); run `bookforge detail` "
            f"first (and optionally edit the file), or pass --auto-schema",
        )
    style = cfg.style_for(topic, persona)
    return detail_topic(style, gen, schema_path=path, permissive=permissive)


def cmd_outline(args) -> int:
    cfg = _apply_overrides(JobConfig.load(args.config), args)
    gen, _ = make_clients(args.mock, cfg.seed, cfg.gen_config, cfg.embed_config)
    written = {}
    for topic, persona in cfg.jobs():
        path = cfg.outline_path(topic, persona)
        if path.exists():
            _say(f"outline: {path.name} exists, skipping")
            continue
        schema = _ensure_schema(cfg, topic, persona, gen, args.auto_schema,
                                args.permissive)
        style = cfg.style_for(topic, persona)
        outline = generate_outline(style, schema, gen, permissive=args.permissive)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(outline.to_json_value(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        written[path.name] = file_sha256(path)
        _say(f"outline: wrote {path.name}")
    manifest = _manifest_base(cfg, "outline")
    manifest["outputs"] = written
    write_manifest(cfg.workdir / "outline.manifest.json", manifest)
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = _apply_overrides(JobConfig.load(args.config), args)
    gen, _ = make_clients(args.mock, cfg.seed, cfg.gen_config, cfg.embed_config)
    tokenizer = load_tokenizer(cfg.tokenizer_spec)

    def run_one(job: Tuple[str, Persona]) -> Tuple[Tuple[str, Persona], BookArtifact]:
        topic, persona = job
        schema = _ensure_schema(cfg, topic, persona, gen, args.auto_schema,
                                args.permissive)
        style = cfg.style_for(topic, persona)
        outline = None
        outline_path = cfg.outline_path(topic, persona)
        if outline_path.exists():
            outline = BookOutline.from_json_value(
                json.loads(outline_path.read_text(encoding="utf-8")), permissive=True
            )
        artifact = synthesize_book(
            style,
            cfg.qa_per_section,
            gen,
            schema=schema,
            outline=outline,
            checkpoint_path=cfg.checkpoint_path(topic, persona),
            permissive=args.permissive,
            progress=(lambda m, t=topic, p=persona: _say(f"[{slugify(t)}/{p.wire}] {m}"))
            if args.verbose
            else None,
        )
        return job, artifact

    jobs = cfg.jobs()
    artifacts: Dict[Tuple[str, Persona], BookArtifact] = {}
    workers = min(cfg.gen_config.parallelism, len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for job, artifact in pool.map(run_one, jobs):
                artifacts[job] = artifact
    else:
        for job in jobs:
            job_key, artifact = run_one(job)
            artifacts[job_key] = artifact

    records = []
    per_book = {}
    for job in jobs:  # config order defines corpus order
        topic, persona = job
        recs = records_from_artifact(artifacts[job], tokenizer)
        per_book[f"{slugify(topic)}/{persona.wire}"] = len(recs)
        records.extend(recs)

    out_path = cfg.output_dir / "synthetic.jsonl"
    n = write_corpus(records, out_path)
    manifest = _manifest_base(cfg, "generate")
    manifest.update(
        {
            "qa_per_section": cfg.qa_per_section,
            "tokenizer": cfg.tokenizer_spec,
            "records": n,
            "records_per_book": per_book,
            "total_tokens": sum(r.token_count for r in records),
            "outputs": {out_path.name: file_sha256(out_path)},
        }
    )
    write_manifest(cfg.output_dir / "synthetic.manifest.json", manifest)
    _say(f"generate: {n} records -> {out_path}")
    return EXIT_OK


def cmd_decontaminate(args) -> int:
    cfg = _apply_overrides(JobConfig.load(args.config), args)
    _, embed = make_clients(args.mock, cfg.seed, cfg.gen_config, cfg.embed_config)
    in_path = Path(args.input) if args.input else cfg.output_dir / "synthetic.jsonl"
    bench_path = Path(args.benchmark) if args.benchmark else cfg.benchmark
    if bench_path is None:
        raise ConfigError("paths.benchmark", "missing (or pass --benchmark)")
    records = read_corpus(in_path)
    bench = load_benchmark(bench_path)
    kept, report = decontaminate(
        records,
        bench,
        embed,
        threshold_remove=cfg.threshold_remove,
        threshold_report=cfg.threshold_report,
    )
    out_path = cfg.output_dir / "decontaminated.jsonl"
    n = write_corpus(kept, out_path)

    report_json = cfg.output_dir / "decontam_report.json"
    report_json.parent.mkdir(parents=True, exist_ok=True)
    report_json.write_text(
        json.dumps(report.to_json_value(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    domain = records[0].domain if records else "all"
    table = render_domain_stats([(domain, report.total_generated, report.frac_above_report)])
    report_txt = cfg.output_dir / "decontam_report.txt"
    report_txt.write_text(
        table + "\n\n" + render_flagged_examples(report) + "\n", encoding="utf-8"
    )

    manifest = _manifest_base(cfg, "decontaminate")
    manifest.update(
        {
            "inputs": {in_path.name: file_sha256(in_path),
                       bench_path.name: file_sha256(bench_path)},
            "threshold_remove": cfg.threshold_remove,
            "threshold_report": cfg.threshold_report,
            "total_generated": report.total_generated,
            "removed": report.removed,
            "kept": n,
            "outputs": {out_path.name: file_sha256(out_path)},
        }
    )
    write_manifest(cfg.output_dir / "decontaminate.manifest.json", manifest)
    _say(
        f"decontaminate: removed {report.removed}/{report.total_generated}, "
        f"kept {n} -> {out_path}"
    )
    return EXIT_OK


def cmd_schedule(args) -> int:
    cfg = _apply_overrides(JobConfig.load(args.config), args)
    spec = cfg.schedule_spec
    in_path = Path(args.input) if args.input else cfg.output_dir / "decontaminated.jsonl"
    if not in_path.exists():
        fallback = cfg.output_dir / "synthetic.jsonl"
        if fallback.exists():
            in_path = fallback
        else:
            raise ConfigError("schedule.input", f"no corpus at {in_path}")
    records = read_corpus(in_path)
    tokenizer = load_tokenizer(cfg.tokenizer_spec)

    if spec.kind is ScheduleKind.FLAT:
        ordered = schedule_flat(records, spec.seed)
    elif spec.kind is ScheduleKind.COG:
        ordered = schedule_cog(records, spec.seed)
        assert first_cog_violation(ordered) is None
    elif spec.kind is ScheduleKind.COG_CON:
        ordered = schedule_cog_con(records, spec.seed)
        assert first_cog_con_violation(ordered) is None
    else:
        plan = interleaved_chunk_plan(records, spec.chunk_target_tokens, spec.seed)
        check_interleaved_plan(plan)
        ordered = [r for chunk in plan for r in chunk.records]

    s, r = spec.replay_ratio
    if r > 0:
        if cfg.replay_pool is None:
            raise ConfigError("paths.replay_pool", "missing but replay ratio > 0")
        pool = read_replay_pool(cfg.replay_pool, tokenizer)
        mixed = mix_with_replay(ordered, pool, spec.replay_ratio, spec.seed)
    else:
        mixed = ordered

    out_path = cfg.output_dir / "scheduled.jsonl"
    n = write_corpus(mixed, out_path)
    manifest = _manifest_base(cfg, "schedule")
    manifest.update(
        {
            "schedule_kind": spec.kind.value,
            "replay_ratio": f"{s}:{r}",
            "chunk_target_tokens": spec.chunk_target_tokens,
            "schedule_seed": spec.seed,
            "inputs": {in_path.name: file_sha256(in_path)},
            "records_out": n,
            "synthetic_records": len(ordered),
            "block_counts": block_counts(ordered),
            "outputs": {out_path.name: file_sha256(out_path)},
        }
    )
    write_manifest(cfg.output_dir / "scheduled.manifest.json", manifest)
    _say(f"schedule: {spec.kind.value} over {len(ordered)} synthetic records, "
         f"{n} total -> {out_path}")
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _apply_overrides(JobConfig.load(args.config), args)
    in_path = Path(args.input) if args.input else cfg.output_dir / "synthetic.jsonl"
    records = read_corpus(in_path)
    report = token_report(records)
    json_path = cfg.output_dir / "token_report.json"
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(
        json.dumps(report.to_json_value(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    txt = report.render()
    (cfg.output_dir / "token_report.txt").write_text(txt + "\n", encoding="utf-8")
    _say(txt)

    manifest = _manifest_base(cfg, "report")
    manifest["inputs"] = {in_path.name: file_sha256(in_path)}
    manifest["grand_total_tokens"] = report.grand_total

    if args.student_scores and args.teacher_scores:
        student = json.loads(Path(args.student_scores).read_text(encoding="utf-8"))
        teacher = json.loads(Path(args.teacher_scores).read_text(encoding="utf-8"))
        gaps = rank_domain_gaps(student, teacher, args.top_k)
        gaps_path = cfg.output_dir / "domain_gaps.json"
        gaps_path.write_text(
            json.dumps([g.to_json_value() for g in gaps], indent=2) + "\n",
            encoding="utf-8",
        )
        _say("\nLargest student-teacher regressions:")
        for g in gaps:
            _say(f"  {g.domain}: student {g.student_acc:.4f} "
                 f"teacher {g.teacher_acc:.4f} gap {g.gap:+.4f}")
        manifest["gap_domains"] = [g.domain for g in gaps]
    write_manifest(cfg.output_dir / "report.manifest.json", manifest)
    return EXIT_OK


def _load_tree(path: Path) -> TocNode:
    obj = json.loads(path.read_text(encoding="utf-8"))
    if "tree" in obj:  # book checkpoint
        return BookArtifact.from_json_value(obj).tree
    if "kind" in obj:  # serialized tree
        return TocNode.from_json_value(obj)
    if "parts" in obj:  # outline
        from .model import build_toc_tree

        return build_toc_tree(BookOutline.from_json_value(obj, permissive=True))
    raise ValidationError(f"{path} is not a tree, outline, or book checkpoint")


def _annotate_tokens(node: TocNode, tokenizer) -> int:
    own = tokenizer.count(node.content) if node.content else 0
    return own + sum(_annotate_tokens(c, tokenizer) for c in node.children)


def _render_tree(node: TocNode, tokenizer=None, depth: int = 0) -> List[str]:
    label = f"{'  ' * depth}[{node.kind.value}] {node.title}"
    if tokenizer is not None:
        label += f" ({_annotate_tokens(node, tokenizer)} tokens)"
    lines = [label]
    for child in node.children:
        lines.extend(_render_tree(child, tokenizer, depth + 1))
    return lines


def _tree_json(node: TocNode, tokenizer=None) -> dict:
    obj = node.to_json_value()
    if tokenizer is not None:

        def annotate(n: TocNode, o: dict) -> None:
            o["token_count"] = _annotate_tokens(n, tokenizer)
            for child_node, child_obj in zip(n.children, o["children"]):
                annotate(child_node, child_obj)

        annotate(node, obj)
    return obj


def cmd_inspect_tree(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ConfigError("input", f"file not found: {path}")
    tree = _load_tree(path)
    tokenizer = load_tokenizer(args.tokenizer) if args.tokens else None
    if args.json:
        _say(json.dumps(_tree_json(tree, tokenizer), indent=2, ensure_ascii=False))
    else:
        _say("\n".join(_render_tree(tree, tokenizer)))
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------


def _add_common(sub, config_required: bool = True):
    sub.add_argument("--config", required=config_required, help="job config JSON")
    sub.add_argument("--mock", action="store_true",
                     help="use the deterministic offline providers")
    sub.add_argument("--seed", type=int, default=None, help="override config seed")
    sub.add_argument("--permissive", action="store_true",
                     help="downgrade count-bound violations to warnings")
    sub.add_argument("--workdir", default=None, help="override paths.workdir")
    sub.add_argument("--output-dir", dest="output_dir", default=None,
                     help="override paths.output_dir")
    sub.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bookforge",
        description="Synthetic textbook corpus pipeline: detail, outline, "
        "generate, decontaminate, schedule, report.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("detail", help="generate editable domain schemas")
    _add_common(p)
    p.set_defaults(func=cmd_detail)

    p = subs.add_parser("outline", help="generate book outlines from schemas")
    _add_common(p)
    p.add_argument("--auto-schema", action="store_true",
                   help="generate missing schemas instead of requiring "
                        "a prior detail run")
    p.set_defaults(func=cmd_outline)

    p = subs.add_parser("generate", help="synthesize books and emit the corpus")
    _add_common(p)
    p.add_argument("--auto-schema", action="store_true",
                   help="generate missing schemas instead of requiring "
                        "a prior detail run")
    p.set_defaults(func=cmd_generate)

    p = subs.add_parser("decontaminate", help="drop records too close to benchmarks")
    _add_common(p)
    p.add_argument("--input", default=None, help="corpus JSONL (default: synthetic)")
    p.add_argument("--benchmark", default=None, help="benchmark JSONL override")
    p.set_defaults(func=cmd_decontaminate)

    p = subs.add_parser("schedule", help="order the corpus and mix replay data")
    _add_common(p)
    p.add_argument("--input", default=None,
                   help="corpus JSONL (default: decontaminated)")
    p.add_argument("--kind", default=None,
                   help="flat | cog | cog_con | interleaved (overrides config)")
    p.add_argument("--ratio", default=None, help="synthetic:replay, e.g. 1:1")
    p.set_defaults(func=cmd_schedule)

    p = subs.add_parser("report", help="token accounting and gap ranking")
    _add_common(p)
    p.add_argument("--input", default=None, help="corpus JSONL")
    p.add_argument("--student-scores", default=None,
                   help="JSON map domain -> student accuracy")
    p.add_argument("--teacher-scores", default=None,
                   help="JSON map domain -> teacher accuracy")
    p.add_argument("--top-k", type=int, default=5)
    p.set_defaults(func=cmd_report)

    p = subs.add_parser("inspect-tree", help="dump a book tree as text or JSON")
    p.add_argument("--input", required=True,
                   help="book checkpoint, outline JSON, or serialized tree")
    p.add_argument("--json", action="store_true")
    p.add_argument("--tokens", action="store_true",
                   help="annotate per-node token counts")
    p.add_argument("--tokenizer", default="whitespace")
    p.set_defaults(func=cmd_inspect_tree)
    return parser


def exit_code_for(err: BaseException) -> int:
    if isinstance(err, (ConfigError, CheckpointMismatch, TokenizerLoadError)):
        return EXIT_CONFIG
    if isinstance(err, (QaGenerationInterrupted, KeyboardInterrupt)):
        return EXIT_INTERRUPTED
    if isinstance(err, ProviderError):
        return EXIT_PROVIDER
    if isinstance(err, BookforgeError):
        return EXIT_VALIDATION
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("interrupted; completed checkpoints are reusable", file=sys.stderr)
        return EXIT_INTERRUPTED
    except BaseException as err:  # noqa: BLE001 - single funnel to exit codes
        if isinstance(err, SystemExit):
            raise
        code = exit_code_for(err)
        print(f"error ({args.command}): {err}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
