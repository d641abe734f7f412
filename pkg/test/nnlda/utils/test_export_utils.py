import pandas as pd
import pytest

from nnlda.models.reports import ClassificationReport, EvalReport, GeneratedComment, GroupingReport
from nnlda.utils.export_utils import REPORT_COLUMNS, SWEEP_COLUMNS, format_report, report_rows, write_rows


@pytest.fixture
def full_report():
    grouping = GroupingReport(groups=["TV:price", "burger:price"], topic_for_group=[1, 0],
                              confusion=[[0, 5], [4, 1]], macro_precision=0.9, macro_recall=0.9,
                              macro_f1=0.9, micro_f1=0.9)
    return EvalReport(
        model="nnlda", K=4, seed=2,
        log_perplexity=2.5,
        grouping=grouping,
        classification=ClassificationReport(fold_scores=[0.5, 0.7], mean_macro_f1=0.6),
        comments=[GeneratedComment(side="product=TV", words=["sharp", "clear"])],
        top_words=[["sharp", "clear"], ["cheap", "value"]],
    )


class TestReportRows:
    """Flattening reports into CSV rows."""

    def test_one_row_per_metric(self, full_report):
        rows = report_rows(full_report)
        tasks = [r["task"] for r in rows]
        assert tasks.count("perplexity") == 1
        assert tasks.count("grouping") == 4
        assert tasks.count("classify") == 3
        assert tasks.count("gencomment") == 1
        assert tasks.count("topwords") == 2
        assert all((r["model"], r["K"], r["seed"]) == ("nnlda", 4, 2) for r in rows)

    def test_comment_words_are_joined(self, full_report):
        row = next(r for r in report_rows(full_report) if r["task"] == "gencomment")
        assert (row["metric"], row["value"]) == ("product=TV", "sharp clear")

    def test_empty_report_has_no_rows(self):
        assert report_rows(EvalReport(model="lda", K=2, seed=0)) == []


class TestWriteRows:
    """CSV output."""

    def test_columns_and_overwrite(self, full_report, tmp_path):
        path = tmp_path / "report.csv"
        write_rows(report_rows(full_report), path)
        write_rows(report_rows(EvalReport(model="lda", K=2, seed=0, elbo_ratio=0.1)), path)
        frame = pd.read_csv(path)
        assert list(frame.columns) == REPORT_COLUMNS
        assert len(frame) == 1
        assert frame.loc[0, "metric"] == "mean_per_word_elbo_difference"

    def test_sweep_columns(self, tmp_path):
        path = write_rows([{"model": "lda", "K": 3, "seed": 1, "final_elbo": -10.0, "rounds": 4, "path": "m.model"}],
                          tmp_path / "sweep.csv", SWEEP_COLUMNS)
        assert list(pd.read_csv(path).columns) == SWEEP_COLUMNS


class TestFormatReport:
    def test_sections_present(self, full_report):
        text = format_report(full_report)
        assert text.startswith("# nnlda (K=4, seed=2)")
        assert "**Log-perplexity:** 2.500000" in text
        assert "TV:price -> topic 1: [0, 5]" in text
        assert "**Comment [product=TV]:** sharp clear" in text
        assert "Topic 1: cheap value" in text
