from .config import ExperimentConfig, TOY_MODEL
from .experiments import cmd_simulate, cmd_train, cmd_eval, cmd_localize, cmd_bench
from .experiments import BenchReport, gap_breakdown, table_summary, aggregate_records, load_examples
