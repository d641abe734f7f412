import argparse

import pandas as pd
import pytest

from nnlda.cli import build_parser, parse_seeds, parse_topics, run
from nnlda.services.model_store import load_model


@pytest.fixture
def synth_csv(tmp_path):
    path = tmp_path / "syn.csv"
    assert run(["synth", "--docs", "200", "--seed", "3", "--out", str(path)]) == 0
    return path


@pytest.fixture
def lda_file(tmp_path, synth_csv):
    out = tmp_path / "lda.model"
    code = run(["train", "--corpus", str(synth_csv), "--model", "lda", "--topics", "4", "--seed", "0",
                "--side-cols", "product,description", "--group-col", "group", "--max-rounds", "5",
                "--out", str(out)])
    assert code == 0
    return out


@pytest.fixture
def nnlda_file(tmp_path, synth_csv):
    out = tmp_path / "nn.model"
    code = run(["train", "--corpus", str(synth_csv), "--model", "nnlda", "--topics", "4", "--seed", "0",
                "--side-cols", "product,description", "--max-rounds", "5", "--out", str(out)])
    assert code == 0
    return out


class TestArgumentParsing:
    """Test cases for option parsing helpers."""

    def test_topic_range(self):
        assert parse_topics("2..4") == [2, 3, 4]
        assert parse_topics("5") == [5]

    def test_bad_topic_range(self):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_topics("4..2")

    def test_seeds(self):
        assert parse_seeds("1,2, 3") == [1, 2, 3]

    def test_seed_options_are_exclusive(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["train", "--corpus", "c.csv", "--model", "lda", "--topics", "2",
                                       "--seed", "1", "--seeds", "1,2", "--out", "m.model"])
        assert exc.value.code == 2


class TestSynth:
    def test_writes_corpus_and_summary(self, tmp_path, capsys):
        path = tmp_path / "syn.csv"
        assert run(["synth", "--docs", "50", "--seed", "1", "--out", str(path)]) == 0
        assert len(pd.read_csv(path)) == 50
        out = capsys.readouterr().out
        assert "documents: 50" in out and "vocabulary size:" in out


class TestTrain:
    """Test cases for the train command."""

    def test_single_run_writes_model(self, lda_file):
        model = load_model(lda_file)
        assert (model.prior_kind, model.K, model.seed) == ("lda", 4, 0)

    def test_sweep_writes_one_model_per_setting(self, tmp_path, synth_csv):
        out = tmp_path / "sweep.model"
        code = run(["train", "--corpus", str(synth_csv), "--model", "lda", "--topics", "2..3", "--seeds", "0,1",
                    "--max-rounds", "3", "--out", str(out)])
        assert code == 0
        for K in (2, 3):
            for seed in (0, 1):
                assert (tmp_path / f"sweep_K{K}_s{seed}.model").exists()
        summary = pd.read_csv(tmp_path / "sweep_sweep.csv")
        assert len(summary) == 4
        assert list(summary.columns) == ["model", "K", "seed", "final_elbo", "rounds", "path"]

    def test_restarts_option_reaches_the_config(self, tmp_path, synth_csv):
        out = tmp_path / "r.model"
        assert run(["train", "--corpus", str(synth_csv), "--model", "lda", "--topics", "3", "--seed", "0",
                    "--max-rounds", "3", "--restarts", "2", "--out", str(out)]) == 0
        assert load_model(out).config.restarts == 2

    def test_side_prior_without_side_columns_is_usage_error(self, tmp_path, synth_csv):
        with pytest.raises(SystemExit) as exc:
            run(["train", "--corpus", str(synth_csv), "--model", "dmr", "--topics", "3", "--seed", "0",
                 "--out", str(tmp_path / "m.model")])
        assert exc.value.code == 2

    def test_missing_corpus_exits_one(self, tmp_path, capsys):
        code = run(["train", "--corpus", str(tmp_path / "absent.csv"), "--model", "lda", "--topics", "3",
                    "--seed", "0", "--out", str(tmp_path / "m.model")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_topic_count_out_of_range_exits_one(self, tmp_path, synth_csv):
        code = run(["train", "--corpus", str(synth_csv), "--model", "lda", "--topics", "1", "--seed", "0",
                    "--out", str(tmp_path / "m.model")])
        assert code == 1


class TestEval:
    """Test cases for the eval tasks."""

    def test_perplexity_report(self, lda_file, synth_csv, tmp_path, capsys):
        out = tmp_path / "ppl.csv"
        assert run(["eval", "perplexity", "--model", str(lda_file), "--corpus", str(synth_csv),
                    "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert frame.loc[0, "metric"] == "log_perplexity"
        assert frame.loc[0, "value"] > 0
        assert "**Log-perplexity:**" in capsys.readouterr().out

    def test_grouping(self, lda_file, synth_csv, tmp_path):
        out = tmp_path / "grouping.csv"
        assert run(["eval", "grouping", "--model", str(lda_file), "--corpus", str(synth_csv), "--out", str(out)]) == 0
        assert set(pd.read_csv(out)["metric"]) == {"macro_precision", "macro_recall", "macro_f1", "micro_f1"}

    def test_classify_without_label_column_exits_one(self, lda_file, synth_csv):
        assert run(["eval", "classify", "--model", str(lda_file), "--corpus", str(synth_csv)]) == 1

    def test_classify_with_labels(self, lda_file, synth_csv, tmp_path):
        frame = pd.read_csv(synth_csv)
        frame["label"] = frame["product"].map({"TV": 1, "burger": 2})
        labelled = tmp_path / "labelled.csv"
        frame.to_csv(labelled, index=False)
        out = tmp_path / "classify.csv"
        assert run(["eval", "classify", "--model", str(lda_file), "--corpus", str(labelled), "--folds", "3",
                    "--no-retrain", "--out", str(out)]) == 0
        assert "mean_macro_f1" in set(pd.read_csv(out)["metric"])

    def test_gencomment_with_side(self, nnlda_file, capsys):
        assert run(["eval", "gencomment", "--model", str(nnlda_file), "--side", "product=TV,description=price",
                    "--len", "3"]) == 0
        assert "**Comment [product=TV,description=price]:**" in capsys.readouterr().out

    def test_gencomment_needs_side_for_side_model(self, nnlda_file):
        assert run(["eval", "gencomment", "--model", str(nnlda_file)]) == 1

    def test_compare_model_with_itself(self, lda_file, synth_csv, tmp_path):
        out = tmp_path / "compare.csv"
        assert run(["eval", "compare", "--a", str(lda_file), "--b", str(lda_file), "--corpus", str(synth_csv),
                    "--out", str(out)]) == 0
        assert pd.read_csv(out).loc[0, "value"] == 0.0

    def test_missing_model_file_exits_one(self, tmp_path, synth_csv):
        assert run(["eval", "perplexity", "--model", str(tmp_path / "none.model"), "--corpus", str(synth_csv)]) == 1


class TestTopWords:
    def test_prints_every_topic(self, lda_file, capsys):
        assert run(["topwords", "--model", str(lda_file), "--n", "3"]) == 0
        lines = [line for line in capsys.readouterr().out.splitlines() if line.startswith("topic ")]
        assert len(lines) == 4
        assert all(len(line.split(": ", 1)[1].split()) == 3 for line in lines)
