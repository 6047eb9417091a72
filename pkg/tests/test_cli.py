import json
import subprocess
import sys

import pytest

from compmine.augment import AugmentSpec
from compmine.core import Dataset, Quintuple, TokenSpan, sentence_from_tokens
from compmine.demo import build_demo_corpus
from compmine.ingest import export_dataset, import_dataset


def run_cli(*argv, env=None):
    return subprocess.run(
        [sys.executable, "-m", "compmine.cli", *map(str, argv)],
        capture_output=True, text=True, env=env,
    )


@pytest.fixture(scope="module")
def demo_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "demo.jsonl"
    export_dataset(build_demo_corpus(size=80, seed=3), path)
    return path


class TestCleanStatsLint:
    def test_clean_round_trip(self, tmp_path, demo_file):
        out = tmp_path / "clean.jsonl"
        r = run_cli("clean", demo_file, out)
        assert r.returncode == 0, r.stderr
        assert import_dataset(out).sentences == import_dataset(demo_file).sentences
        meta = json.loads((tmp_path / "clean.jsonl.meta.json").read_text())
        assert meta["provenance"]["tool"] == "compmine"

    def test_clean_warns_and_continues_on_bad_records(self, tmp_path):
        src = tmp_path / "src.jsonl"
        good = json.dumps({"id": "a", "text": "x y", "quintuples": []})
        src.write_text("{bad\n" + good + "\n", encoding="utf-8")
        out = tmp_path / "out.jsonl"
        r = run_cli("clean", src, out)
        assert r.returncode == 0
        assert "warning" in r.stderr
        assert len(import_dataset(out)) == 1

    def test_stats_text_and_json(self, demo_file):
        r = run_cli("stats", demo_file)
        assert r.returncode == 0
        assert "Comparative" in r.stdout
        r = run_cli("stats", demo_file, "--json")
        doc = json.loads(r.stdout)
        assert doc["sentences"]["total"] == 80
        assert "provenance" in doc

    def test_stats_figures(self, tmp_path, demo_file):
        figs = tmp_path / "figs"
        r = run_cli("stats", demo_file, "--figures", figs)
        assert r.returncode == 0
        assert (figs / "label_distribution.png").exists()
        assert (figs / "sentence_breakdown.png").exists()

    def test_lint_exit_codes(self, tmp_path, demo_file):
        assert run_cli("lint", demo_file).returncode == 0
        words = [f"w{i}" for i in range(14)]
        q = Quintuple(None, None, None, TokenSpan(0, 11), "COM+")
        bad = Dataset((sentence_from_tokens("s", words, (q,)),))
        bad_path = tmp_path / "bad.jsonl"
        export_dataset(bad, bad_path)
        r = run_cli("lint", bad_path)
        assert r.returncode == 1
        assert "R1" in r.stdout

    def test_usage_error_exit_2(self):
        assert run_cli("lint").returncode == 2

    def test_runtime_failure_exit_3_with_json_error(self, tmp_path):
        r = run_cli("stats", tmp_path / "missing.jsonl")
        assert r.returncode == 3
        err = json.loads(r.stderr.strip().splitlines()[-1])
        assert "error" in err


class TestAugmentCli:
    def test_augment_with_spec_then_stats(self, tmp_path, demo_file):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(
            AugmentSpec(targets={l: 3 for l in
                                 ("DIF", "EQL", "SUP+", "SUP-", "SUP",
                                  "COM+", "COM-", "COM")},
                        seed=5).to_json()))
        out = tmp_path / "aug.jsonl"
        r = run_cli("augment", demo_file, "-o", out, "--spec", spec_path)
        assert r.returncode == 0, r.stderr
        meta = json.loads((tmp_path / "aug.jsonl.meta.json").read_text())
        assert meta["targets"]["DIF"] == 3

        stats = json.loads(run_cli("stats", out, "--json").stdout)
        base = json.loads(run_cli("stats", demo_file, "--json").stdout)
        for label in ("DIF", "COM+", "SUP-"):
            grown = stats["quintuples"]["by_label"][label]
            assert grown == base["quintuples"]["by_label"][label] + 3

    def test_augment_wordlists(self, tmp_path, demo_file):
        wl = tmp_path / "wl"
        wl.mkdir()
        (wl / "subject.txt").write_text("MegaPhone X\n# comment\n", encoding="utf-8")
        (wl / "predicate.SUP-.txt").write_text("dở nhất\n", encoding="utf-8")
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({"targets": {"SUP-": 2}, "seed": 1}))
        out = tmp_path / "aug.jsonl"
        r = run_cli("augment", demo_file, "-o", out, "--spec", spec_path,
                    "--wordlists", wl)
        assert r.returncode == 0, r.stderr

    def test_augment_needs_spec_or_version(self, tmp_path, demo_file):
        r = run_cli("augment", demo_file, "-o", tmp_path / "x.jsonl")
        assert r.returncode == 2


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    base = tmp_path_factory.mktemp("work")
    export_dataset(build_demo_corpus(size=120, seed=9), base / "train.jsonl")
    export_dataset(build_demo_corpus(size=30, seed=10), base / "test.jsonl")
    (base / "fast.json").write_text(json.dumps({
        "learning_rate": 0.05, "epochs": 6, "seed": 2, "hash_dim": 2 ** 13,
    }))
    return base


class TestTrainPredictEvalExperiment:
    def test_train_single_and_bootstrap(self, workdir):
        r = run_cli("train", "sentence", workdir / "train.jsonl",
                    "-o", workdir / "gate.model",
                    "--train-config", workdir / "fast.json")
        assert r.returncode == 0, r.stderr
        assert (workdir / "gate.model").exists()

        r = run_cli("train", "quadruple", workdir / "train.jsonl",
                    "-o", workdir / "typer.ensemble.json", "--bootstrap",
                    "--train-config", workdir / "fast.json")
        assert r.returncode == 0, r.stderr
        manifest = json.loads((workdir / "typer.ensemble.json").read_text())
        assert len(manifest["members"]) == 3

    def test_predict_and_eval(self, workdir):
        for i in range(3):
            r = run_cli("--seed", 100 + i, "train", "tag", workdir / "train.jsonl",
                        "-o", workdir / f"tagger{i}.model",
                        "--train-config", workdir / "fast.json")
            assert r.returncode == 0, r.stderr
        pipeline = {
            "stage1": {"mode": "binary", "backend": {"native": "gate.model"}},
            "stage2": {
                "members": [{"native": f"tagger{i}.model"} for i in range(3)],
                "weights": [0.2, 0.3, 0.5],
            },
            "stage3": {"backend": {"ensemble": "typer.ensemble.json"}},
        }
        (workdir / "pipeline.json").write_text(json.dumps(pipeline))
        r = run_cli("predict", workdir / "test.jsonl",
                    "--pipeline", workdir / "pipeline.json",
                    "-o", workdir / "pred.jsonl")
        assert r.returncode == 0, r.stderr
        assert (workdir / "pred.jsonl.report.json").exists()

        r = run_cli("eval", workdir / "test.jsonl", workdir / "pred.jsonl", "--json")
        assert r.returncode in (0, 1)
        doc = json.loads(r.stdout)
        assert doc["macro"]["f1"] > 0.4

    def test_eval_gold_vs_gold_is_perfect(self, workdir):
        r = run_cli("eval", workdir / "test.jsonl", workdir / "test.jsonl")
        assert r.returncode == 0
        assert "1.0000" in r.stdout

    def test_eval_mismatch_exit_1(self, workdir, tmp_path):
        empty = tmp_path / "empty.jsonl"
        gold = import_dataset(workdir / "test.jsonl")
        stripped = Dataset(tuple(
            sentence_from_tokens(s.id, s.token_texts()) for s in gold
        ))
        export_dataset(stripped, empty)
        r = run_cli("eval", workdir / "test.jsonl", empty)
        assert r.returncode == 1

    def test_experiment_preset(self, workdir, tmp_path):
        data = tmp_path / "versions"
        data.mkdir()
        export_dataset(build_demo_corpus(size=150, seed=11), data / "v3.jsonl")
        out = tmp_path / "e4"
        r = run_cli("experiment", "E4", "--data", data, "-o", out,
                    "--train-config", workdir / "fast.json")
        assert r.returncode == 0, r.stderr
        assert (out / "report.json").exists()
        assert (out / "figures" / "f1_by_label.png").exists()
        assert "macro-F1" in r.stdout

    def test_config_file_via_env(self, workdir, tmp_path):
        cfg = tmp_path / "global.json"
        cfg.write_text(json.dumps({"average": "fixed8"}))
        import os

        env = dict(os.environ, COMPMINE_CONFIG=str(cfg))
        r = run_cli("eval", workdir / "test.jsonl", workdir / "test.jsonl",
                    "--json", env=env)
        doc = json.loads(r.stdout)
        assert doc["average_mode"] == "fixed8"
