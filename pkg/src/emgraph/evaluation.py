"""Stratified cross-validation, confusion matrices, metrics, and report rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import gcn as gcn_mod
from . import svm as svm_mod
from .errors import (
    FormatError,
    ParameterError,
    ShapeError,
    StratificationError,
)
from .features.scaling import apply_standardizer, fit_standardizer
from .graph import FeatureGraph, adjacency_matrix, knn_graph, normalize_adjacency

CLASS_NAMES = ("Healthy", "PD")
PIPELINES = ("svm", "gcn", "gcn-svm")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.min(initial=0) < 0 or a.max(initial=0) >= self.k:
            raise ParameterError("fold assignment out of range")
        a.flags.writeable = False
        object.__setattr__(self, "assignments", a)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def stratified_kfold(labels, k: int = 5, seed: int = 0) -> FoldPlan:
    """Per-class round-robin assignment after a seeded shuffle.

    Remainder samples rotate across folds so fold sizes differ by at most one
    and every fold's class count is within one sample of exact proportion.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ParameterError("labels must be a non-empty 1-D array")
    if k < 2:
        raise ParameterError("k must be >= 2")
    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            raise StratificationError(
                f"class {cls!r} has {idx.size} samples, fewer than k={k}"
            )
        rng.shuffle(idx)
        assignments[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return FoldPlan(k=k, assignments=assignments)


def group_stratified_kfold(labels, groups, k: int = 5, seed: int = 0) -> FoldPlan:
    """Stratify whole groups (subjects): every sample of a group shares a fold."""
    labels = np.asarray(labels)
    groups = np.asarray(groups)
    if labels.shape != groups.shape:
        raise ShapeError("labels and groups must align")
    unique_groups = np.unique(groups)
    group_labels = np.array(
        [labels[groups == g][0] for g in unique_groups]
    )
    for g in unique_groups:
        if np.unique(labels[groups == g]).size != 1:
            raise ParameterError(f"group {g!r} mixes classes")
    plan = stratified_kfold(group_labels, k=k, seed=seed)
    fold_of_group = dict(zip(unique_groups.tolist(), plan.assignments.tolist()))
    assignments = np.array([fold_of_group[g] for g in groups.tolist()], dtype=np.int64)
    return FoldPlan(k=k, assignments=assignments)


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts; rows are true class (Healthy, PD), columns predicted."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (2, 2):
            raise ShapeError("confusion matrix must be 2x2")
        if np.any(counts < 0):
            raise ParameterError("confusion counts must be nonnegative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Tally (true, predicted) label pairs; labels are 0=Healthy, 1=PD."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ShapeError("y_true and y_pred must be 1-D and equal length")
    if y_true.size == 0:
        raise ParameterError("cannot tally an empty prediction set")
    for arr, name in ((y_true, "y_true"), (y_pred, "y_pred")):
        if arr.min() < 0 or arr.max() > 1:
            raise ParameterError(f"{name} labels must be 0 (Healthy) or 1 (PD)")
    counts = np.zeros((2, 2), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class Metrics:
    precision: tuple[float, float]
    recall: tuple[float, float]
    f1: tuple[float, float]
    accuracy: float
    macro_f1: float
    weighted_precision: float
    undefined: tuple[str, ...] = ()


def metrics(cm: ConfusionMatrix) -> Metrics:
    """Per-class precision/recall/F1 plus accuracy, macro F1 and
    support-weighted precision. Undefined 0/0 ratios become 0 and are flagged."""
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise ParameterError("confusion matrix is empty")
    undefined: list[str] = []

    def ratio(num: float, den: float, name: str) -> float:
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    precision = []
    recall = []
    f1 = []
    for c, cls in enumerate(CLASS_NAMES):
        tp = counts[c, c]
        precision.append(ratio(tp, counts[:, c].sum(), f"precision_{cls}"))
        recall.append(ratio(tp, counts[c, :].sum(), f"recall_{cls}"))
        p, r = precision[c], recall[c]
        f1.append(ratio(2 * p * r, p + r, f"f1_{cls}"))
    support = counts.sum(axis=1)
    return Metrics(
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        accuracy=float(np.trace(counts)) / total,
        macro_f1=float(np.mean(f1)),
        weighted_precision=float(np.dot(support, precision)) / total,
        undefined=tuple(undefined),
    )


@dataclass(frozen=True)
class EvalReport:
    pipeline: str
    cv_scores: tuple[float, ...]
    confusion_matrix: ConfusionMatrix
    metrics: Metrics
    k_folds: int
    seed: int
    grouped_by_subject: bool = False
    provenance: dict = field(default_factory=dict)

    @property
    def mean_cv_accuracy(self) -> float:
        return float(np.mean(self.cv_scores))


@dataclass(frozen=True)
class EvalConfig:
    """Everything cross_validate needs besides the data itself."""

    k_folds: int = 5
    seed: int = 0
    knn_k: int = 10
    svm_kernel: str = "rbf"
    svm_c: float = 1.0
    svm_gamma: float | None = None
    svm_tol: float = 1e-3
    svm_max_passes: int = 200
    gcn_epochs: int = 50
    gcn_lr: float = 0.01
    gcn_hidden: int = 16
    gcn_dropout: float = 0.5
    inductive: bool = False
    group_by_subject: bool = False


def cross_validate(
    features: np.ndarray,
    labels: np.ndarray,
    pipeline: str,
    cfg: EvalConfig | None = None,
    groups: np.ndarray | None = None,
) -> EvalReport:
    """Stratified k-fold evaluation of one pipeline over a raw feature matrix.

    Graph pipelines default to a single transductive graph over all nodes
    (standardized once), with the loss masked to each fold's training nodes;
    cfg.inductive instead standardizes and builds the graph per fold from
    training nodes, attaching test nodes by their nearest training neighbors.
    Every sample is predicted exactly once, as the test node of its fold.
    """
    cfg = cfg or EvalConfig()
    if pipeline not in PIPELINES:
        raise ParameterError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] != labels.size:
        raise ShapeError("features must be (n, d) with one label per row")

    if cfg.group_by_subject:
        if groups is None:
            raise ParameterError("group_by_subject requires per-sample groups")
        plan = group_stratified_kfold(labels, groups, k=cfg.k_folds, seed=cfg.seed)
    else:
        plan = stratified_kfold(labels, k=cfg.k_folds, seed=cfg.seed)

    needs_graph = pipeline in ("gcn", "gcn-svm")
    x_all = None
    a_hat_all = None
    graph_all = None
    if not cfg.inductive:
        scaler = fit_standardizer(features)
        x_all = apply_standardizer(scaler, features)
        if needs_graph:
            edges = knn_graph(x_all, k=cfg.knn_k)
            graph_all = FeatureGraph(x=x_all, edges=edges, labels=labels)
            a_hat_all = normalize_adjacency(graph_all)

    seed_root = np.random.SeedSequence(cfg.seed)
    fold_seeds = seed_root.spawn(cfg.k_folds)

    cv_scores = []
    pooled = np.zeros((2, 2), dtype=np.int64)
    for fold in range(cfg.k_folds):
        train_idx = plan.train_indices(fold)
        test_idx = plan.test_indices(fold)
        fold_seed = int(fold_seeds[fold].generate_state(1)[0] % (2**31))
        if cfg.inductive:
            preds = _run_fold_inductive(
                features, labels, train_idx, test_idx, pipeline, cfg, fold_seed
            )
        else:
            preds = _run_fold_transductive(
                x_all, graph_all, a_hat_all, labels, train_idx, test_idx,
                pipeline, cfg, fold_seed,
            )
        truth = labels[test_idx]
        cv_scores.append(float(np.mean(preds == truth)))
        pooled += confusion(truth, preds).counts

    cm = ConfusionMatrix(pooled)
    return EvalReport(
        pipeline=pipeline,
        cv_scores=tuple(cv_scores),
        confusion_matrix=cm,
        metrics=metrics(cm),
        k_folds=cfg.k_folds,
        seed=cfg.seed,
        grouped_by_subject=cfg.group_by_subject,
    )


def _fit_predict_svm(x_train, y_train, x_test, cfg: EvalConfig, seed: int) -> np.ndarray:
    signed = np.where(y_train == 1, 1.0, -1.0)
    model = svm_mod.train_svm(
        x_train,
        signed,
        kernel=cfg.svm_kernel,
        C=cfg.svm_c,
        gamma=cfg.svm_gamma,
        tol=cfg.svm_tol,
        max_passes=cfg.svm_max_passes,
        seed=seed,
    )
    return (svm_mod.predict_svm(model, x_test) > 0).astype(np.int64)


def _train_gcn(graph: FeatureGraph, a_hat, cfg: EvalConfig, seed: int):
    train_cfg = gcn_mod.TrainConfig(
        epochs=cfg.gcn_epochs,
        lr=cfg.gcn_lr,
        dropout_p=cfg.gcn_dropout,
        hidden=cfg.gcn_hidden,
        seed=seed,
    )
    return gcn_mod.train(graph, a_hat, train_cfg)


def _run_fold_transductive(
    x_all, graph_all, a_hat_all, labels, train_idx, test_idx, pipeline, cfg, seed
) -> np.ndarray:
    if pipeline == "svm":
        return _fit_predict_svm(x_all[train_idx], labels[train_idx], x_all[test_idx], cfg, seed)
    masked = graph_all.with_masks(train_idx, test_idx)
    result = _train_gcn(masked, a_hat_all, cfg, seed)
    if pipeline == "gcn":
        preds = gcn_mod.predict(a_hat_all, masked.x, result.params)
        return preds[test_idx]
    embeddings = gcn_mod.embed(a_hat_all, masked.x, result.params)
    return _fit_predict_svm(
        embeddings[train_idx], labels[train_idx], embeddings[test_idx], cfg, seed
    )


def _run_fold_inductive(
    features, labels, train_idx, test_idx, pipeline, cfg, seed
) -> np.ndarray:
    scaler = fit_standardizer(features[train_idx])
    x_train = apply_standardizer(scaler, features[train_idx])
    x_test = apply_standardizer(scaler, features[test_idx])
    if pipeline == "svm":
        return _fit_predict_svm(x_train, labels[train_idx], x_test, cfg, seed)

    train_edges = knn_graph(x_train, k=cfg.knn_k)
    train_graph = FeatureGraph(
        x=x_train,
        edges=train_edges,
        labels=labels[train_idx],
        train_mask=np.ones(train_idx.size, dtype=bool),
        test_mask=np.zeros(train_idx.size, dtype=bool),
    )
    a_hat_train = normalize_adjacency(train_graph)
    result = _train_gcn(train_graph, a_hat_train, cfg, seed)

    # attach each held-out node to its k nearest training nodes
    combined_x = np.vstack([x_train, x_test])
    n_train = x_train.shape[0]
    attach = _nearest_train_edges(x_train, x_test, cfg.knn_k, offset=n_train)
    combined_edges = (
        np.vstack([train_edges, attach]) if train_edges.size else attach
    )
    combined_labels = np.concatenate([labels[train_idx], labels[test_idx]])
    combined = FeatureGraph(x=combined_x, edges=combined_edges, labels=combined_labels)
    a_hat = normalize_adjacency(combined)

    if pipeline == "gcn":
        preds = gcn_mod.predict(a_hat, combined_x, result.params)
        return preds[n_train:]
    embeddings = gcn_mod.embed(a_hat, combined_x, result.params)
    return _fit_predict_svm(
        embeddings[:n_train], labels[train_idx], embeddings[n_train:], cfg, seed
    )


def _nearest_train_edges(x_train, x_test, k: int, offset: int) -> np.ndarray:
    k = min(k, x_train.shape[0])
    d2 = (
        np.einsum("ij,ij->i", x_test, x_test)[:, None]
        + np.einsum("ij,ij->i", x_train, x_train)[None, :]
        - 2.0 * (x_test @ x_train.T)
    )
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    pairs = [
        (int(train_j), offset + i) for i, row in enumerate(order) for train_j in row
    ]
    return np.array(sorted(pairs), dtype=np.int64)


def render_report(report: EvalReport, fmt: str = "text") -> str:
    """Render as an aligned text table (2-decimal values) or full-precision JSON."""
    if fmt == "text":
        return _render_text(report)
    if fmt == "json":
        return report_to_json(report)
    raise FormatError(f"unknown report format {fmt!r}")


def _render_text(report: EvalReport) -> str:
    m = report.metrics
    counts = report.confusion_matrix.counts
    grouping = "by-subject" if report.grouped_by_subject else "by-sample"
    rows = [
        ("Pipeline", report.pipeline),
        ("Folds", f"{report.k_folds} ({grouping} stratification)"),
        ("Seed", str(report.seed)),
        ("Cross-Validation Scores", "[" + ", ".join(f"{s:.3f}" for s in report.cv_scores) + "]"),
        ("Mean CV Accuracy", f"{report.mean_cv_accuracy:.2f}"),
        ("Confusion Matrix", np.array2string(counts, separator=", ")),
        ("F1-Score (Healthy)", f"{m.f1[0]:.2f}"),
        ("F1-Score (PD)", f"{m.f1[1]:.2f}"),
        ("Accuracy", f"{m.accuracy:.2f}"),
        ("Macro Avg F1-Score", f"{m.macro_f1:.2f}"),
        ("Weighted Avg Precision", f"{m.weighted_precision:.2f}"),
    ]
    width = max(len(label) for label, _ in rows) + 2
    lines = [f"{label:<{width}}{value}" for label, value in rows]
    for key, value in sorted(report.provenance.items()):
        lines.append(f"# {key}={value}")
    return "\n".join(lines) + "\n"


def report_to_json(report: EvalReport) -> str:
    m = report.metrics
    payload = {
        "pipeline": report.pipeline,
        "k_folds": report.k_folds,
        "seed": report.seed,
        "grouped_by_subject": report.grouped_by_subject,
        "cv_scores": list(report.cv_scores),
        "mean_cv_accuracy": report.mean_cv_accuracy,
        "confusion_matrix": report.confusion_matrix.counts.tolist(),
        "per_class": {
            cls: {
                "precision": m.precision[i],
                "recall": m.recall[i],
                "f1": m.f1[i],
            }
            for i, cls in enumerate(CLASS_NAMES)
        },
        "accuracy": m.accuracy,
        "macro_f1": m.macro_f1,
        "weighted_precision": m.weighted_precision,
        "undefined_ratios": list(m.undefined),
        "provenance": report.provenance,
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def report_from_json(text: str) -> EvalReport:
    payload = json.loads(text)
    cm = ConfusionMatrix(np.array(payload["confusion_matrix"], dtype=np.int64))
    per_class = payload["per_class"]
    m = Metrics(
        precision=tuple(per_class[c]["precision"] for c in CLASS_NAMES),
        recall=tuple(per_class[c]["recall"] for c in CLASS_NAMES),
        f1=tuple(per_class[c]["f1"] for c in CLASS_NAMES),
        accuracy=payload["accuracy"],
        macro_f1=payload["macro_f1"],
        weighted_precision=payload["weighted_precision"],
        undefined=tuple(payload.get("undefined_ratios", ())),
    )
    return EvalReport(
        pipeline=payload["pipeline"],
        cv_scores=tuple(payload["cv_scores"]),
        confusion_matrix=cm,
        metrics=m,
        k_folds=payload["k_folds"],
        seed=payload["seed"],
        grouped_by_subject=payload.get("grouped_by_subject", False),
        provenance=payload.get("provenance", {}),
    )
