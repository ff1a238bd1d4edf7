"""End-to-end command tests through the click runner."""

import json

import pytest
from click.testing import CliRunner

from dateval import Task
from dateval.cli import EXIT_EMBEDDER, EXIT_INPUT, SCHEMA_VERSION, main

from conftest import corpus_lines, make_corpus


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def caption_corpus_file(tmp_path):
    corpus = make_corpus(8, task=Task.CAPTION, seed=11)
    path = tmp_path / "corpus.jsonl"
    path.write_text(corpus_lines(corpus), encoding="utf-8")
    return path


@pytest.fixture
def qa_corpus_file(tmp_path):
    corpus = make_corpus(8, task=Task.QA, seed=5)
    path = tmp_path / "qa.jsonl"
    path.write_text(corpus_lines(corpus), encoding="utf-8")
    return path


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestScore:
    def test_report_structure(self, runner, caption_corpus_file, tmp_path):
        out = tmp_path / "report.json"
        run_ok(runner, [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "date,cosine,bleu1", "--dim", "64", "--out", str(out),
        ])
        body = json.loads(out.read_text(encoding="utf-8"))
        assert body["schema_version"] == SCHEMA_VERSION
        assert body["tool"]["name"] == "dateval"
        assert body["task"] == "caption"
        assert body["record_count"] == 8
        assert body["embedder"] == {"backend": "test", "dimension": 64, "seed": 0}
        assert len(body["embedder_digest"]) == 16
        assert set(body["metrics"]) == {"date", "cosine", "bleu1"}
        date = body["metrics"]["date"]
        assert 0.0 <= date["dataset_score"] <= 1.0
        assert len(date["samples"]) == 8
        assert body["config"]["command"] == "score"
        assert body["config"]["out_path"] == str(out)

    def test_partial_corpus_prints_missing_cells(self, runner, caption_corpus_file):
        result = run_ok(runner, [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--dim", "32",
        ])
        # 8 random records cannot fill all nine cells
        assert "no breakdown" in result.output or "score" in result.output

    def test_full_qa_breakdown_table(self, runner, tmp_path):
        # force every answer cell to be populated
        from dateval import QaSubCategory

        subs = list(QaSubCategory)
        records = []
        for i in range(12):
            row = json.loads(
                corpus_lines(make_corpus(1, task=Task.QA, seed=i,
                                         sub=subs[i % 6])).strip()
            )
            row["id"] = f"q{i}"
            records.append(row)
        path = tmp_path / "qa.jsonl"
        path.write_text(
            "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
        )
        out = tmp_path / "qa_report.json"
        result = run_ok(runner, [
            "score", "--task", "qa", "--corpus", str(path), "--dim", "32",
            "--out", str(out),
        ])
        body = json.loads(out.read_text(encoding="utf-8"))
        assert body["metrics"]["date"]["missing_cells"] == []
        assert body["metrics"]["date"]["breakdown"]["score_qa"] >= 0
        assert "score" in result.output.splitlines()[0]

    def test_byte_identical_reruns(self, runner, caption_corpus_file, tmp_path):
        out = tmp_path / "report.json"
        args = [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "date,bleu1", "--dim", "48", "--out", str(out),
        ]
        run_ok(runner, args)
        first = out.read_bytes()
        run_ok(runner, args)
        assert out.read_bytes() == first

    def test_jobs_do_not_change_scores(self, runner, caption_corpus_file, tmp_path):
        out1, out4 = tmp_path / "r1.json", tmp_path / "r4.json"
        base = [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "date,cosine", "--dim", "48",
        ]
        run_ok(runner, base + ["--jobs", "1", "--out", str(out1)])
        run_ok(runner, base + ["--jobs", "4", "--out", str(out4)])
        body1 = json.loads(out1.read_text(encoding="utf-8"))
        body4 = json.loads(out4.read_text(encoding="utf-8"))
        assert body1["metrics"] == body4["metrics"]

    def test_dump_matrices(self, runner, tmp_path):
        from dateval import CaptionSubCategory

        corpus = make_corpus(5, seed=1, sub=CaptionSubCategory.LONG)
        path = tmp_path / "c.jsonl"
        path.write_text(corpus_lines(corpus), encoding="utf-8")
        out = tmp_path / "rep.json"
        run_ok(runner, [
            "score", "--task", "caption", "--corpus", str(path),
            "--dim", "32", "--dump-matrices", "--out", str(out),
        ])
        body = json.loads(out.read_text(encoding="utf-8"))
        assert body["matrix_files"]
        prefix = body["matrix_files"][0]
        bin_file = tmp_path / (prefix.split("/")[-1] + ".bin")
        ids_file = tmp_path / (prefix.split("/")[-1] + ".ids")
        assert bin_file.exists() and ids_file.exists()
        assert len(bin_file.read_bytes()) == 5 * 5 * 8
        assert len(ids_file.read_text().splitlines()) == 5

    def test_bleu_only_skips_embedder(self, runner, caption_corpus_file, tmp_path):
        out = tmp_path / "bleu.json"
        run_ok(runner, [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "bleu1", "--out", str(out),
        ])
        body = json.loads(out.read_text(encoding="utf-8"))
        assert body["embedder"] is None
        assert body["embedder_digest"] is None
        assert "matrix_files" not in body

    def test_merge_references_and_candidates(self, runner, tmp_path):
        corpus = make_corpus(4, seed=9)
        refs, cands = [], []
        for rec in corpus:
            refs.append({
                "id": rec.id, "task": rec.task.value,
                "sub_category": rec.sub_category.value,
                "domain": rec.domain.value,
                "references": list(rec.references),
            })
            cands.append({"id": rec.id, "candidate": rec.candidate})
        ref_path = tmp_path / "refs.jsonl"
        cand_path = tmp_path / "cands.jsonl"
        ref_path.write_text(
            "\n".join(json.dumps(r) for r in refs) + "\n", encoding="utf-8"
        )
        cand_path.write_text(
            "\n".join(json.dumps(c) for c in cands) + "\n", encoding="utf-8"
        )
        out = tmp_path / "merged.json"
        run_ok(runner, [
            "score", "--task", "caption", "--references", str(ref_path),
            "--candidates", str(cand_path), "--dim", "32", "--out", str(out),
        ])
        body = json.loads(out.read_text(encoding="utf-8"))
        assert body["record_count"] == 4

    def test_stray_candidate_rejected(self, runner, tmp_path):
        corpus = make_corpus(2, seed=9)
        refs = [{
            "id": rec.id, "task": rec.task.value,
            "sub_category": rec.sub_category.value, "domain": rec.domain.value,
            "references": list(rec.references),
        } for rec in corpus]
        cands = [{"id": rec.id, "candidate": "x"} for rec in corpus]
        cands.append({"id": "ghost", "candidate": "y"})
        ref_path, cand_path = tmp_path / "r.jsonl", tmp_path / "c.jsonl"
        ref_path.write_text("\n".join(json.dumps(r) for r in refs), encoding="utf-8")
        cand_path.write_text("\n".join(json.dumps(c) for c in cands), encoding="utf-8")
        result = CliRunner().invoke(main, [
            "score", "--task", "caption", "--references", str(ref_path),
            "--candidates", str(cand_path), "--dim", "32",
        ])
        assert result.exit_code == EXIT_INPUT
        assert "ghost" in result.output

    def test_missing_file_exit_code(self, runner, tmp_path):
        result = runner.invoke(main, [
            "score", "--task", "caption", "--corpus", str(tmp_path / "nope.jsonl"),
        ])
        assert result.exit_code == EXIT_INPUT
        assert "error:" in result.output

    def test_no_partial_output_on_failure(self, runner, tmp_path):
        out = tmp_path / "never.json"
        result = runner.invoke(main, [
            "score", "--task", "caption", "--corpus", str(tmp_path / "nope.jsonl"),
            "--out", str(out),
        ])
        assert result.exit_code == EXIT_INPUT
        assert not out.exists()

    def test_unknown_metric_rejected(self, runner, caption_corpus_file):
        result = runner.invoke(main, [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "date,meteor",
        ])
        assert result.exit_code == 2
        assert "meteor" in result.output

    def test_remote_unreachable_exit_code(self, runner, caption_corpus_file):
        result = runner.invoke(main, [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--embedder", "remote", "--endpoint", "http://127.0.0.1:1",
        ])
        assert result.exit_code == EXIT_EMBEDDER

    def test_remote_needs_endpoint(self, runner, caption_corpus_file, monkeypatch):
        monkeypatch.delenv("EMBED_ENDPOINT", raising=False)
        result = runner.invoke(main, [
            "score", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--embedder", "remote",
        ])
        assert result.exit_code == EXIT_INPUT
        assert "endpoint" in result.output.lower()


class TestCompare:
    def test_report_and_csv(self, runner, caption_corpus_file, tmp_path):
        out = tmp_path / "cmp.json"
        csv_out = tmp_path / "cdf.csv"
        result = run_ok(runner, [
            "compare", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "date,cosine,bleu1", "--dim", "48",
            "--out", str(out), "--csv-out", str(csv_out),
        ])
        body = json.loads(out.read_text(encoding="utf-8"))
        disc = body["discrimination"]
        assert {m["metric"] for m in disc["metrics"]} == {"date", "cosine", "bleu1"}
        assert "paraphrase" in disc["note"]
        for entry in disc["metrics"]:
            assert set(entry["medians"]) == {"Right", "Safe", "Wrong"}
        assert csv_out.read_text(encoding="utf-8").startswith("metric,tier,x,cdf")
        assert "medians" in result.output

    def test_byte_identical_reruns(self, runner, caption_corpus_file, tmp_path):
        out = tmp_path / "cmp.json"
        args = [
            "compare", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "date", "--dim", "48", "--out", str(out),
        ]
        run_ok(runner, args)
        first = out.read_bytes()
        run_ok(runner, args)
        assert out.read_bytes() == first

    def test_safe_template_flag_echoed(self, runner, caption_corpus_file, tmp_path):
        out = tmp_path / "cmp.json"
        run_ok(runner, [
            "compare", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--metric", "bleu1", "--safe-template", "Audio plays",
            "--out", str(out),
        ])
        body = json.loads(out.read_text(encoding="utf-8"))
        assert body["config"]["safe_template"] == "Audio plays"


class TestFilter:
    def make_inputs(self, tmp_path):
        rows = [
            {
                "id": "keepme", "pair_similarity": 80.0,
                "distractor_similarities": [10.0] * 6,
                "llm_confidence": "High", "classifier_domain": "S00",
                "llm_domain": "S00", "caption_text": "someone talks",
            },
            {
                "id": "lowconf", "pair_similarity": 80.0,
                "distractor_similarities": [10.0] * 6,
                "llm_confidence": "Low", "classifier_domain": "S00",
                "llm_domain": "S00", "caption_text": "someone talks",
            },
            {
                "id": "close", "pair_similarity": 12.0,
                "distractor_similarities": [10.0] * 6,
                "llm_confidence": "High", "classifier_domain": "S00",
                "llm_domain": "S00", "caption_text": "someone talks",
            },
        ]
        path = tmp_path / "inputs.jsonl"
        path.write_text(
            "\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8"
        )
        return path

    def test_verdicts_and_summary(self, runner, tmp_path):
        inputs = self.make_inputs(tmp_path)
        out = tmp_path / "verdicts.jsonl"
        result = run_ok(runner, [
            "filter", "--inputs", str(inputs), "--out", str(out),
        ])
        assert "kept 1 of 3" in result.output
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert [l["id"] for l in lines] == ["keepme", "lowconf", "close"]
        assert lines[0]["keep"] is True
        assert lines[1]["failed_rules"] == ["confidence"]
        assert lines[2]["failed_rules"] == ["similarity"]

    def test_threshold_flag(self, runner, tmp_path):
        inputs = self.make_inputs(tmp_path)
        result = run_ok(runner, [
            "filter", "--inputs", str(inputs), "--threshold", "1.0",
        ])
        # margin 2.0 for "close" now passes
        assert "kept 2 of 3" in result.output

    def test_pattern_flag(self, runner, tmp_path):
        inputs = self.make_inputs(tmp_path)
        result = run_ok(runner, [
            "filter", "--inputs", str(inputs), "--pattern", "TALKS",
        ])
        assert "kept 0 of 3" in result.output
        assert "failed hallucination: 3" in result.output


class TestTiers:
    def test_writes_three_corpora(self, runner, caption_corpus_file, tmp_path):
        out_dir = tmp_path / "tiers"
        result = run_ok(runner, [
            "tiers", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--out-dir", str(out_dir),
        ])
        from dateval import load_corpus

        for name in ("right", "safe", "wrong"):
            parsed = load_corpus(out_dir / f"{name}.jsonl", Task.CAPTION)
            assert len(parsed) == 8
        assert result.output.count("wrote") == 3

    def test_wrong_tier_is_deranged(self, runner, caption_corpus_file, tmp_path):
        out_dir = tmp_path / "tiers"
        run_ok(runner, [
            "tiers", "--task", "caption", "--corpus", str(caption_corpus_file),
            "--out-dir", str(out_dir),
        ])
        from dateval import load_corpus

        base = load_corpus(caption_corpus_file, Task.CAPTION)
        wrong = load_corpus(out_dir / "wrong.jsonl", Task.CAPTION)
        for orig, swapped in zip(base, wrong):
            assert swapped.candidate != orig.references[0]


class TestHelp:
    def test_group_help_lists_commands(self, runner):
        result = run_ok(runner, ["--help"])
        for command in ("score", "compare", "filter", "tiers"):
            assert command in result.output

    def test_version(self, runner):
        result = run_ok(runner, ["--version"])
        assert "dateval" in result.output
