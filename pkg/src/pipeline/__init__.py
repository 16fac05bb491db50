from src.pipeline.stages import cmd_prepare, cmd_train, cmd_run, cmd_sweep, run_config
from src.pipeline.workflow import ExperimentWorkflow, create_workflow

__all__ = [
    "cmd_prepare",
    "cmd_train",
    "cmd_run",
    "cmd_sweep",
    "run_config",
    "ExperimentWorkflow",
    "create_workflow",
]
