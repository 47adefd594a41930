"""Command-line interface: exit codes, output formats, file arguments."""

import hashlib
import json

import pytest

from sensorsearch.cli import main
from sensorsearch.corpus import Corpus, GeneratorConfig, save


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "demo.jsonl"
    save(Corpus.from_config(GeneratorConfig(count=300, seed=77)), str(path))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "machine")
    return code, (json.loads(out) if code == 0 else None), err


class TestGenerate:
    def test_deterministic_checksum(self, capsys, tmp_path):
        args = ("generate", "--count", "50", "--seed", "9")
        code_a, doc_a, _ = run_json(capsys, *args, "--out",
                                    str(tmp_path / "a.jsonl"))
        code_b, doc_b, _ = run_json(capsys, *args, "--out",
                                    str(tmp_path / "b.jsonl"))
        assert code_a == code_b == 0
        assert doc_a["sha256"] == doc_b["sha256"]
        digest = hashlib.sha256((tmp_path / "a.jsonl").read_bytes()).hexdigest()
        assert doc_a["sha256"] == digest

    def test_properties_flag_selects_catalogue_prefix(self, capsys, tmp_path):
        code, doc, _ = run_json(capsys, "generate", "--count", "5",
                                "--properties", "10",
                                "--out", str(tmp_path / "ten.jsonl"))
        assert code == 0
        assert len(doc["properties"]) == 10
        assert doc["properties"][0] == "availability"

    def test_keys_and_properties_conflict(self, capsys, tmp_path):
        code, _, err = run(capsys, "generate", "--count", "5",
                           "--properties", "10", "--keys", "accuracy",
                           "--out", str(tmp_path / "x.jsonl"))
        assert code == 2
        assert err

    def test_table_output_mentions_snapshot(self, capsys, tmp_path):
        code, out, _ = run(capsys, "generate", "--count", "5",
                           "--out", str(tmp_path / "t.jsonl"))
        assert code == 0
        assert "snapshot" in out


class TestSearch:
    def test_table_format(self, capsys, corpus_path):
        code, out, _ = run(capsys, "search", "--data", corpus_path,
                           "--query", "accuracy >= 10",
                           "--priorities",
                           '[{"key": "accuracy", "slider": 90}]',
                           "-n", "5")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].split() == ["uid", "score", "type", "region"]
        assert len([l for l in lines if l.startswith("s")]) == 5

    def test_machine_format_is_stable_json(self, capsys, corpus_path):
        args = ("search", "--data", corpus_path, "--priorities",
                '[{"key": "accuracy", "slider": 80}]', "-n", "3")
        code_a, out_a, _ = run(capsys, *args, "--format", "machine")
        code_b, out_b, _ = run(capsys, *args, "--format", "machine")
        assert code_a == code_b == 0
        doc_a, doc_b = json.loads(out_a), json.loads(out_b)
        doc_a.pop("timing_ms"), doc_b.pop("timing_ms")
        assert doc_a == doc_b
        # machine output is a single sorted-key JSON line
        assert out_a.count("\n") == 1
        keys = list(json.loads(out_a, object_pairs_hook=list))
        assert [k for k, _ in keys] == sorted(k for k, _ in keys)

    def test_parse_error_exit_code(self, capsys, corpus_path):
        code, _, err = run(capsys, "search", "--data", corpus_path,
                           "--query", "accuracy >=",
                           "--priorities", '[{"key": "accuracy", "slider": 1}]')
        assert code == 2
        assert "filter parse error" in err
        assert "line 1" in err

    def test_missing_corpus_exit_code(self, capsys, tmp_path):
        code, _, err = run(capsys, "search", "--data",
                           str(tmp_path / "missing.jsonl"),
                           "--priorities", '[{"key": "accuracy", "slider": 1}]')
        assert code == 3
        assert err

    def test_margin_100_equals_no_margin(self, capsys, corpus_path):
        base = ("search", "--data", corpus_path, "--priorities",
                '[{"key": "accuracy", "slider": 70},'
                ' {"key": "reliability", "slider": 30}]', "-n", "20")
        _, plain, _ = run_json(capsys, *base)
        _, margin_full, _ = run_json(capsys, *base, "--margin", "100")
        assert plain["entries"] == margin_full["entries"]

    def test_at_file_arguments(self, capsys, corpus_path, tmp_path):
        query_file = tmp_path / "query.txt"
        query_file.write_text("accuracy >= 25 and reliability >= 5")
        priorities_file = tmp_path / "priorities.json"
        priorities_file.write_text('[{"key": "accuracy", "slider": 60}]')
        code, doc, _ = run_json(capsys, "search", "--data", corpus_path,
                                "--query", f"@{query_file}",
                                "--priorities", f"@{priorities_file}",
                                "-n", "4")
        assert code == 0
        assert doc["count"] == 4

    def test_data_dir_environment_lookup(self, capsys, corpus_path,
                                         monkeypatch):
        directory, name = corpus_path.rsplit("/", 1)
        monkeypatch.setenv("SENSORSEARCH_DATA", directory)
        code, doc, _ = run_json(capsys, "search", "--data", name,
                                "--priorities",
                                '[{"key": "accuracy", "slider": 50}]',
                                "-n", "2")
        assert code == 0
        assert doc["count"] == 2


class TestBench:
    def test_single_run_payload(self, capsys, corpus_path):
        code, doc, _ = run_json(capsys, "bench", "--data", corpus_path,
                                "-n", "10")
        assert code == 0
        assert doc["count"] == 300
        assert doc["returned"] == 10
        assert doc["peak_rss_mb"] > 0
        assert all(key in doc for key in
                   ("filter_ms", "prune_ms", "rank_ms", "total_ms"))

    def test_grid_rows(self, capsys):
        code, doc, _ = run_json(capsys, "bench", "--grid",
                                "--sizes", "200", "--props", "5",
                                "--margins", "0,100", "-n", "10")
        assert code == 0
        rows = doc["rows"]
        assert [row["mode"] for row in rows] \
            == ["exact", "cphf(M=0)", "cphf(M=100)"]
        by_mode = {row["mode"]: row for row in rows}
        assert by_mode["exact"]["accuracy"] == 1.0
        assert by_mode["cphf(M=100)"]["accuracy"] == 1.0
        assert 0.0 <= by_mode["cphf(M=0)"]["accuracy"] <= 1.0

    def test_grid_rejects_other_property_counts(self, capsys):
        code, _, err = run(capsys, "bench", "--grid", "--sizes", "100",
                           "--props", "7")
        assert code == 2
        assert err


class TestSimulate:
    def test_table3_payload(self, capsys):
        code, doc, _ = run_json(capsys, "simulate", "--table3")
        assert code == 0
        assert doc["record_size"] == pytest.approx(202.33, abs=0.01)
        assert doc["fraction_within"] == 1.0
        cells = {(cell["k"], cell["n"]): cell for cell in doc["cells"]}
        assert len(cells) == 45
        assert cells[(10, 100)]["reference_mb"] == -60.7
        assert cells[(500000, 1000000)]["reference_mb"] == 101.2
        assert all(cell["within"] for cell in doc["cells"])

    def test_table3_table_shows_masked_cells(self, capsys):
        code, out, _ = run(capsys, "simulate", "--table3")
        assert code == 0
        assert "fitted record size" in out
        assert "-" in out  # k >= N cells are masked

    def test_strategy_over_corpus(self, capsys, corpus_path):
        code, doc, _ = run_json(capsys, "simulate", "--data", corpus_path,
                                "--strategy", "chain", "--nodes", "3",
                                "-n", "10")
        assert code == 0
        assert doc["strategy"] == "chain"
        assert doc["total_bytes"] == 3 * 10 * 202
        assert doc["total_time_ns"] == 3 * 5 * 10 ** 6 + 3 * 10 * 10 ** 6

    def test_invalid_k_exit_code(self, capsys, corpus_path):
        code, _, err = run(capsys, "simulate", "--data", corpus_path,
                           "--strategy", "parallel_k", "--k", "50",
                           "-n", "10")
        assert code == 2
        assert err

    def test_topology_file(self, capsys, tmp_path):
        registryless_parts = []
        whole = Corpus.from_config(GeneratorConfig(count=90, seed=8))
        for i, part in enumerate(whole.split(3)):
            path = tmp_path / f"node{i + 1}.jsonl"
            save(part, str(path))
            registryless_parts.append(str(path))
        topology = {
            "record_size_bytes": 100,
            "nodes": [
                {"id": i + 1, "records": 30, "processing_ms": 5,
                 "corpus_path": registryless_parts[i]}
                for i in range(3)
            ],
            "links": [
                {"a": 1, "b": 2, "latency_ms": 10},
                {"a": 2, "b": 3, "latency_ms": 10},
                {"a": 3, "b": 1, "latency_ms": 10},
            ],
        }
        topo_path = tmp_path / "topology.json"
        topo_path.write_text(json.dumps(topology))
        code, doc, _ = run_json(capsys, "simulate", "--topology",
                                str(topo_path), "--strategy", "chain",
                                "-n", "5")
        assert code == 0
        assert doc["strategy"] == "chain"
        assert doc["total_time_ns"] == 3 * 5 * 10 ** 6 + 3 * 10 * 10 ** 6
        assert doc["total_bytes"] == 3 * 5 * 100

    def test_topology_rejects_local_strategy(self, capsys, tmp_path):
        topo_path = tmp_path / "t.json"
        topo_path.write_text("{}")
        code, _, err = run(capsys, "simulate", "--topology", str(topo_path),
                           "--strategy", "local")
        assert code == 2
        assert err
