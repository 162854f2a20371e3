import json

import pytest

import synth
from crowdrank.cli import EXIT_DATA_ERROR, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    posts, queries, relevant = synth.planted_corpus(n_threads=30, n_queries=3)
    corpus = root / "dump.jsonl"
    synth.write_jsonl(corpus, posts)
    truth = root / "truth.jsonl"
    with open(truth, "w") as fh:
        for query_id, text in queries.items():
            fh.write(json.dumps({"query_id": query_id, "query_text": text,
                                 "relevant_answer_ids": [relevant[query_id]]}) + "\n")
    index_dir = root / "index"
    assert main(["build-index", "--corpus", str(corpus), "--out", str(index_dir)]) == EXIT_OK
    return {"root": root, "corpus": corpus, "truth": truth,
            "index": index_dir, "queries": queries, "relevant": relevant}


class TestBuildIndex:
    def test_artifacts_written(self, workspace):
        for name in ("threads.jsonl", "index.json", "idf.json", "titles.txt",
                     "contents.txt", "meta.json"):
            assert (workspace["index"] / name).exists()

    def test_missing_corpus(self, tmp_path, capsys):
        code = main(["build-index", "--corpus", str(tmp_path / "nope.jsonl"),
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_DATA_ERROR
        assert "error" in capsys.readouterr().err

    def test_report_printed(self, workspace, tmp_path, capsys):
        code = main(["build-index", "--corpus", str(workspace["corpus"]),
                     "--out", str(tmp_path / "idx2")])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "threads indexed: 30" in out
        assert "vocabulary size:" in out


class TestSearch:
    def test_text_output(self, workspace, capsys):
        query = workspace["queries"][1]
        code = main(["search", query, "--index-dir", str(workspace["index"])])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert f"answer={workspace['relevant'][1]}" in out.splitlines()[0]

    def test_json_output(self, workspace, capsys):
        query = workspace["queries"][1]
        code = main(["search", query, "--index-dir", str(workspace["index"]),
                     "--json", "--explain", "-n", "3"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) <= 3
        first = json.loads(lines[0])
        assert first["rank"] == 1
        assert first["answer_id"] == workspace["relevant"][1]
        assert "normalized" in first["features"]

    def test_unknown_baseline(self, workspace, capsys):
        code = main(["search", "x", "--index-dir", str(workspace["index"]),
                     "--baseline", "bogus"])
        assert code == EXIT_USAGE
        assert "unknown baseline" in capsys.readouterr().err

    def test_missing_index_dir(self, tmp_path, capsys):
        code = main(["search", "x", "--index-dir", str(tmp_path / "void")])
        assert code == EXIT_DATA_ERROR

    def test_config_file_override(self, workspace, tmp_path, capsys):
        from crowdrank.features import WeightConfig
        config_path = tmp_path / "weights.cfg"
        WeightConfig().save(config_path)
        code = main(["search", workspace["queries"][1],
                     "--index-dir", str(workspace["index"]),
                     "--config", str(config_path)])
        assert code == EXIT_OK


class TestEvaluate:
    def test_report_csv(self, workspace, tmp_path, capsys):
        out_csv = tmp_path / "report.csv"
        code = main(["evaluate", "--index-dir", str(workspace["index"]),
                     "--truth", str(workspace["truth"]),
                     "--baselines", "template,crar", "-o", str(out_csv)])
        assert code == EXIT_OK
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "baseline,hit,mrr,map,mr"
        assert len(lines) == 3
        assert "crar:" in capsys.readouterr().out

    def test_bad_truth_file(self, workspace, tmp_path, capsys):
        bad = tmp_path / "truth.jsonl"
        bad.write_text("{broken\n")
        code = main(["evaluate", "--index-dir", str(workspace["index"]),
                     "--truth", str(bad)])
        assert code == EXIT_DATA_ERROR

    def test_unknown_baseline(self, workspace, capsys):
        code = main(["evaluate", "--index-dir", str(workspace["index"]),
                     "--truth", str(workspace["truth"]), "--baselines", "wat"])
        assert code == EXIT_USAGE


class TestMergeAntonyms:
    def test_merge(self, tmp_path, capsys):
        a = tmp_path / "a.tsv"
        a.write_text("fill\tv\tempty\n")
        out = tmp_path / "merged.tsv"
        code = main(["merge-antonyms", str(a), "-o", str(out)])
        assert code == EXIT_OK
        assert "empty\tv\tfill" not in out.read_text()  # closure adds untagged entry
        assert "fill" in out.read_text()

    def test_missing_input(self, tmp_path, capsys):
        code = main(["merge-antonyms", str(tmp_path / "nope.tsv"),
                     "-o", str(tmp_path / "out.tsv")])
        assert code == EXIT_USAGE
