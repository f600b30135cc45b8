import json

import pytest

from bookforge.decontam import (
    BenchmarkItem,
    cosine,
    decontaminate,
    embed_benchmark,
    load_benchmark,
    nearest_benchmark,
    render_domain_stats,
    render_flagged_examples,
    scan_nearest,
    truncate_pct,
)
from bookforge.errors import EmptyBenchmark, SchemaShape
from bookforge.model import DecontamReport, FlaggedExample
from helpers import (
    DATA_DIR,
    assert_scan_equivalent,
    hex_text,
    make_record,
    plant_near_miss,
)


def bench_items(texts_by_id):
    return [BenchmarkItem(id=i, text=t) for i, t in texts_by_id.items()]


class TestNearestBenchmark:
    def test_self_match(self, mock_embed_client):
        bench = bench_items({"b1": "the krebs cycle", "b2": "supply and demand"})
        embed_benchmark(bench, mock_embed_client)
        (query,) = mock_embed_client.embed(["supply and demand"])
        item, sim = nearest_benchmark(query, bench)
        assert item.id == "b2"
        assert sim == pytest.approx(1.0, abs=1e-9)

    def test_tie_breaks_to_lowest_id(self, mock_embed_client):
        bench = bench_items({"b9": "identical text", "b2": "identical text",
                             "b5": "identical text"})
        embed_benchmark(bench, mock_embed_client)
        (query,) = mock_embed_client.embed(["identical text"])
        item, _ = nearest_benchmark(query, bench)
        assert item.id == "b2"

    def test_psychology_pair_ordering(self, mock_embed_client):
        gen = "What is the primary difference between classical conditioning and operant conditioning?"
        near = "What is the major difference between classical and operant conditioning?"
        unrelated = "How many different possible committees of 5 people can be chosen from a group of 15 people?"
        bench = bench_items({"near": near, "far": unrelated})
        embed_benchmark(bench, mock_embed_client)
        (query,) = mock_embed_client.embed([gen])
        item, sim = nearest_benchmark(query, bench)
        assert item.id == "near"
        far_sim = cosine(query, next(b for b in bench if b.id == "far").vector)
        assert sim > far_sim

    def test_empty_benchmark(self, mock_embed_client):
        (query,) = mock_embed_client.embed(["anything"])
        with pytest.raises(EmptyBenchmark):
            nearest_benchmark(query, [])

    def test_scan_equals_per_record(self, mock_embed_client):
        # disagreements are allowed only on exact similarity ties, where the
        # two code paths see the same maximum through different roundings
        bench = bench_items({f"b{i:03d}": hex_text(f"bench{i}") for i in range(60)})
        embed_benchmark(bench, mock_embed_client)
        queries = mock_embed_client.embed([hex_text(f"gen{i}") for i in range(80)])
        items, sims = scan_nearest(queries, bench)
        oracle = [nearest_benchmark(q, bench) for q in queries]
        assert_scan_equivalent(
            [i.id for i in items], sims,
            [i.id for i, _ in oracle], [s for _, s in oracle],
        )


class TestDecontaminate:
    def _bench(self, mock_embed_client, n=20):
        bench = bench_items({f"b{i:03d}": hex_text(f"bench{i}") for i in range(n)})
        return bench

    def test_all_unrelated_nothing_removed(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        records = [
            make_record(f"r{i}", text=hex_text(f"gen{i}")) for i in range(50)
        ]
        kept, report = decontaminate(records, bench, mock_embed_client)
        assert report.removed == 0
        assert [r.id for r in kept] == [r.id for r in records]
        assert report.frac_above_report == 0.0

    def test_planted_duplicate_removed(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        records = [make_record(f"r{i}", text=hex_text(f"gen{i}")) for i in range(30)]
        records.insert(13, make_record("dup", text=bench[7].text))
        kept, report = decontaminate(records, bench, mock_embed_client)
        assert report.removed == 1
        kept_ids = {r.id for r in kept}
        assert "dup" not in kept_ids
        assert kept_ids == {f"r{i}" for i in range(30)}

    def test_near_miss_reported_not_removed(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        near_text = plant_near_miss(mock_embed_client, bench[3].text, "pad")
        records = [make_record(f"r{i}", text=hex_text(f"gen{i}")) for i in range(20)]
        records.append(make_record("near", text=near_text))
        kept, report = decontaminate(records, bench, mock_embed_client)
        assert "near" in {r.id for r in kept}
        assert report.removed == 0
        assert len(report.flagged_examples) == 1
        flagged = report.flagged_examples[0]
        assert 0.8 <= flagged.similarity <= 0.9
        assert flagged.nearest_benchmark_text == bench[3].text

    def test_partition_and_order(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        records = [make_record(f"r{i}", text=hex_text(f"gen{i}")) for i in range(25)]
        for pos, b in ((3, 0), (11, 1), (19, 2)):
            records.insert(pos, make_record(f"dup{b}", text=bench[b].text))
        kept, report = decontaminate(records, bench, mock_embed_client)
        removed_ids = {r.id for r in records} - {r.id for r in kept}
        assert removed_ids == {"dup0", "dup1", "dup2"}
        assert report.removed == 3
        # kept preserves input order
        input_order = [r.id for r in records if r.id not in removed_ids]
        assert [r.id for r in kept] == input_order

    def test_threshold_monotonicity(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        records = [make_record(f"r{i}", text=hex_text(f"gen{i}")) for i in range(15)]
        records.append(make_record("dup", text=bench[0].text))
        records.append(
            make_record("near", text=plant_near_miss(mock_embed_client, bench[1].text, "pad"))
        )
        removed_sets = []
        for threshold in (0.5, 0.7, 0.95):
            kept, _ = decontaminate(
                records, bench, mock_embed_client,
                threshold_remove=threshold, threshold_report=threshold / 2,
            )
            removed_sets.append({r.id for r in records} - {r.id for r in kept})
        assert removed_sets[0] >= removed_sets[1] >= removed_sets[2]
        assert "dup" in removed_sets[2]

    def test_frac_recomputable_from_flagged(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        records = [make_record(f"r{i}", text=hex_text(f"gen{i}")) for i in range(9)]
        records.append(make_record("dup", text=bench[0].text))
        _, report = decontaminate(records, bench, mock_embed_client)
        recomputed = 100.0 * len(report.flagged_examples) / report.total_generated
        assert abs(recomputed - report.frac_above_report) <= 1e-9 * max(
            1.0, abs(report.frac_above_report)
        )

    def test_bad_thresholds(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        records = [make_record("r", text="x")]
        with pytest.raises(SchemaShape):
            decontaminate(records, bench, mock_embed_client, threshold_remove=0.0)
        with pytest.raises(SchemaShape):
            decontaminate(
                records, bench, mock_embed_client,
                threshold_remove=0.8, threshold_report=0.9,
            )

    def test_empty_benchmark(self, mock_embed_client):
        with pytest.raises(EmptyBenchmark):
            decontaminate([make_record("r", text="x")], [], mock_embed_client)

    def test_empty_corpus(self, mock_embed_client):
        bench = self._bench(mock_embed_client)
        kept, report = decontaminate([], bench, mock_embed_client)
        assert kept == []
        assert report.total_generated == 0


class TestBenchmarkLoading:
    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(
            '{"id": "a", "text": "alpha"}\n{"id": "b", "text": "beta"}\n'
        )
        items = load_benchmark(path)
        assert [(i.id, i.text) for i in items] == [("a", "alpha"), ("b", "beta")]

    def test_malformed_line_numbered(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text('{"id": "a", "text": "alpha"}\nnot json\n')
        with pytest.raises(SchemaShape) as err:
            load_benchmark(path)
        assert "line 2" in str(err.value)


class TestReportRendering:
    def test_truncate_pct(self):
        assert truncate_pct(0.0969696) == "0.0969"
        assert truncate_pct(0.275862) == "0.2758"
        assert truncate_pct(0.142857) == "0.1428"
        assert truncate_pct(0.0512820) == "0.0512"
        assert truncate_pct(12.0) == "12.0000"

    def test_published_stats_column(self):
        rows = json.loads((DATA_DIR / "decontam_stats_fixture.json").read_text())
        table = render_domain_stats(
            [(r["domain"], r["generated"],
              100.0 * r["above_report"] / r["generated"]) for r in rows]
        )
        for r in rows:
            assert r["domain"] in table
            assert str(r["generated"]) in table
            assert truncate_pct(float(r["published_pct"])) in table

    def test_flagged_examples_render(self):
        rows = json.loads((DATA_DIR / "flagged_examples_fixture.json").read_text())
        report = DecontamReport(
            total_generated=100,
            removed=0,
            threshold_remove=0.99,
            threshold_report=0.8,
            frac_above_report=5.0,
            flagged_examples=tuple(
                FlaggedExample(
                    generated_text=r["generated_text"],
                    nearest_benchmark_text=r["nearest_benchmark_text"],
                    similarity=r["similarity"],
                )
                for r in rows
            ),
        )
        text = render_flagged_examples(report)
        assert "0.9871" in text  # most similar pair listed
        assert text.index("0.9871") < text.index("0.8312")
        for r in rows:
            assert r["generated_text"] in text
