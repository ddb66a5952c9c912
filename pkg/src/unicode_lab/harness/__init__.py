from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .grid import CSV_COLUMNS, ResultTable, run_grid
from .io import emit_tradeoff_data, tradeoff_series, write_csv

__all__ = [
    "CSV_COLUMNS",
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "emit_tradeoff_data",
    "load_config",
    "parse_config",
    "run_grid",
    "tradeoff_series",
    "write_csv",
]
