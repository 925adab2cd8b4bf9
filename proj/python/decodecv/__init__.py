"""Cross-validation and tuning benchmarks for linear decoders."""

from ._core import (
    ConfigError,
    DataError,
    Dataset,
    DecoderSpec,
    LinearModel,
    TrainedModel,
    TuningOutcome,
    accuracy,
    config_hash,
    cv_estimate,
    default_C_grid,
    discrepancy,
    leave_one_block_out,
    leave_one_sample_out,
    load_config,
    read_csv,
    report,
    run_benchmark,
    shuffled_block_split,
    simulate,
    stability,
    train,
    tune,
    validation_split,
    write_csv,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "DecoderSpec",
    "LinearModel",
    "TrainedModel",
    "TuningOutcome",
    "accuracy",
    "config_hash",
    "cv_estimate",
    "default_C_grid",
    "discrepancy",
    "leave_one_block_out",
    "leave_one_sample_out",
    "load_config",
    "read_csv",
    "report",
    "run_benchmark",
    "shuffled_block_split",
    "simulate",
    "stability",
    "train",
    "tune",
    "validation_split",
    "write_csv",
]
