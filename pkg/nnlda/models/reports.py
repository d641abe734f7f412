from typing import List, Optional

from pydantic import BaseModel, Field


class GroupingReport(BaseModel):
    """
    Topic grouping scores against ground-truth groups.
    Parameters:
        groups (List[str]): Group names, one row of the confusion matrix each
        topic_for_group (List[int]): Topic matched to each group by the assignment
        confusion (List[List[int]]): groups x K document counts, columns in topic order
        macro_precision, macro_recall, macro_f1 (float): Unweighted means over groups
        micro_f1 (float): Fraction of documents whose topic maps to their group
    """
    groups: List[str]
    topic_for_group: List[int]
    confusion: List[List[int]]
    macro_precision: float = Field(..., ge=0.0, le=1.0)
    macro_recall: float = Field(..., ge=0.0, le=1.0)
    macro_f1: float = Field(..., ge=0.0, le=1.0)
    micro_f1: float = Field(..., ge=0.0, le=1.0)


class ClassificationReport(BaseModel):
    """Per-fold and mean macro-F1 of the rating classifier."""
    fold_scores: List[float]
    mean_macro_f1: float = Field(..., ge=0.0, le=1.0)


class GeneratedComment(BaseModel):
    side: str
    words: List[str]


class EvalReport(BaseModel):
    """
    Results of one or more evaluation tasks for one model.
    Parameters:
        model (str): Model label, usually the prior kind
        K (int): Number of topics
        seed (int): Training seed
        log_perplexity (float | None): Held-out per-word negative ELBO
        grouping (GroupingReport | None): Topic grouping scores
        classification (ClassificationReport | None): Cross-validated rating scores
        comments (List[GeneratedComment] | None): Generated comments
        elbo_ratio (float | None): Mean per-word bound difference against another model
        top_words (List[List[str]] | None): Highest-probability words of each topic
    """
    model: str
    K: int
    seed: int
    log_perplexity: Optional[float] = None
    grouping: Optional[GroupingReport] = None
    classification: Optional[ClassificationReport] = None
    comments: Optional[List[GeneratedComment]] = None
    elbo_ratio: Optional[float] = None
    top_words: Optional[List[List[str]]] = None
