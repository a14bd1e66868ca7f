"""Multilevel weighted support vector machines.

Coarsens the training data with algebraic-multigrid aggregation over a k-NN
affinity graph, tunes a weighted RBF SVM at the coarsest level with uniform
design, and refines support vectors and hyperparameters back to the finest
level.
"""

try:
    from ._mlsvm import (  # noqa: F401
        Dataset,
        DomainError,
        LevelReportRow,
        Metrics,
        ModelParams,
        MultilevelConfig,
        MultilevelResult,
        ParseError,
        SearchDomain,
        TrainedModel,
        compute_metrics,
        gen_ringnorm,
        gen_threenorm,
        gen_twonorm,
        gen_two_gaussians,
        load_dataset,
        load_model,
        normalize_features,
        predict_final,
        save_dataset,
        stratified_split,
        train_flat,
        train_multilevel,
        train_wsvm,
    )
except ImportError:  # development layout: extension built next to the package
    from _mlsvm import (  # noqa: F401
        Dataset,
        DomainError,
        LevelReportRow,
        Metrics,
        ModelParams,
        MultilevelConfig,
        MultilevelResult,
        ParseError,
        SearchDomain,
        TrainedModel,
        compute_metrics,
        gen_ringnorm,
        gen_threenorm,
        gen_twonorm,
        gen_two_gaussians,
        load_dataset,
        load_model,
        normalize_features,
        predict_final,
        save_dataset,
        stratified_split,
        train_flat,
        train_multilevel,
        train_wsvm,
    )

__all__ = [
    "Dataset",
    "DomainError",
    "LevelReportRow",
    "Metrics",
    "ModelParams",
    "MultilevelConfig",
    "MultilevelResult",
    "ParseError",
    "SearchDomain",
    "TrainedModel",
    "compute_metrics",
    "gen_ringnorm",
    "gen_threenorm",
    "gen_twonorm",
    "gen_two_gaussians",
    "load_dataset",
    "load_model",
    "normalize_features",
    "predict_final",
    "save_dataset",
    "stratified_split",
    "train_flat",
    "train_multilevel",
    "train_wsvm",
]

__version__ = "0.1.0"
