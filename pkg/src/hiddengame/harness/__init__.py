from .config import ExperimentConfig, load_config
from .runner import CSV_FIELDS, RoundRecord, run, run_seed

__all__ = ["CSV_FIELDS", "ExperimentConfig", "RoundRecord", "load_config", "run", "run_seed"]
