"""Variable selection for linear regression.

A trained sigmoid network reads the OLS t-statistics of a regression
and flags which predictors belong in the model; the classical
baselines (forward/backward stepwise, exhaustive AIC/BIC, LASSO) share
the same estimator interface for comparison.
"""

__version__ = "0.1.0"

from .baselines import (
    BackwardSelector,
    ExhaustiveSelector,
    ForwardSelector,
    LassoSelector,
    default_lambda_grid,
    lambda_max,
    lasso_coordinate_descent,
    soft_threshold,
)
from .corpus import (
    Corpus,
    CorpusRecord,
    GenConfig,
    build_corpus,
    generate_dataset,
    generate_fixed_beta_dataset,
    load_corpus,
    save_corpus,
)
from .evaluate import (
    ConfusionRates,
    PowerCurve,
    StudyGrid,
    TimingTable,
    confusion_from_masks,
    padded_validation,
    run_confusion_study,
    run_power_study,
    run_timing_bench,
)
from .exceptions import (
    ConfigInvalid,
    ConstantColumn,
    DimensionMismatch,
    EmptyFile,
    FormatError,
    InsufficientDf,
    LengthMismatch,
    NegativeValue,
    NoConvergence,
    NonFiniteLoss,
    ParseError,
    PerfectFit,
    PipelineEmpty,
    RankDeficient,
    TooManyPredictors,
    TooManyPredictorsForExhaustive,
    VarselError,
)
from .network import (
    MlpParams,
    TrainConfig,
    TrainReport,
    backprop,
    bce_loss,
    forward,
    init_params,
    load_weights,
    loss_trend_ok,
    save_weights,
    sigmoid,
    train,
)
from .ols import (
    OlsFit,
    RawDataset,
    StandardizedDataset,
    destandardize,
    fit_ols_no_intercept,
    make_raw_dataset,
    standardize,
)
from .pipeline import (
    Frame,
    PipelineSpec,
    SelectionReport,
    describe,
    drop_missing,
    load_csv,
    log_shift,
    pearson_matrix,
    prune_correlated,
    run_selection_report,
    write_report_csv,
)
from .selection import (
    NeuralNetSelector,
    SelectionResult,
    SelectorModel,
    load_selector_model,
    pad_t_vector,
    unpad_mask,
)

__all__ = [name for name in dir() if not name.startswith("_")]
