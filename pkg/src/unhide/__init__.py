"""Demographic meaning for matrix-factorization factors via classifier gradient localization."""

from .baselines import BaselineSelector, rank_features
from .classifiers import DecisionTree, LinearSVM, LogisticRegressionGD, RandomForest
from .data import (
    DemographicTable,
    RatingsDataset,
    SplitAssignment,
    load_ml100k,
    parse_demographics,
    parse_items,
    parse_ratings,
    split,
)
from .experiments import (
    ExperimentGrid,
    ResultTable,
    accuracy,
    run_experiment_1,
    run_experiment_2,
    run_experiment_3,
)
from .mf import PMF, rmse, train_pmf
from .nn import MLPClassifier, bce_loss
from .synth import PlantedSpec, generate
from .unhide import (
    ArchetypeResult,
    DeepSelector,
    FeatureRanking,
    LocalizeConfig,
    item_weight,
    localize,
    min_max_normalize,
    relevancy,
    select_threshold,
    select_top_n,
    top_items,
)

__version__ = "0.1.0"
