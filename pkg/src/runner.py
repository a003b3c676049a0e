from dataclasses import dataclass, field
from logging import Logger
from typing import Dict

import pandas as pd

from src.config import ConfigurationManager
from src.experiment import ExperimentConfig
from src.tasks.task_evolve import task_evolve
from src.tasks.task_large_n import task_large_n
from src.tasks.task_stationary import task_stationary
from src.tasks.task_threshold import task_threshold
from src.tasks.task_verify import task_verify
from src.utils.constants import EXIT_OK
from src.utils.exceptions import BosonEntanglementError, TaskFailed


@dataclass(frozen=True)
class RunOptions:
    """
    Attributes:
        oracle (bool): Evaluate the slow partial-transpose negativity alongside the formula.
        workers (int): Ordered worker pool size for grid points.
    """
    oracle: bool = False
    workers: int = 1


@dataclass
class TaskResult:
    """
    Attributes:
        tables (Dict[str, pd.DataFrame]): Output tables keyed by file name.
        exit_code (int): 0, or the code of the worst invariant outcome.
    """
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    exit_code: int = EXIT_OK


class TaskRunner:
    """
    Dispatches an experiment to the function implementing its task.

    Attributes:
        _config (ConfigurationManager): Instance of the configuration settings.
        _logger (Logger): Logger for tracking the task.
        _experiment (ExperimentConfig): Parsed experiment.
        _options (RunOptions): Command-line options.
        _tasks (dict): Task name to task function.
    """

    def __init__(self, config: ConfigurationManager, logger: Logger, experiment: ExperimentConfig,
                 options: RunOptions):
        self._config = config
        self._logger = logger
        self._experiment = experiment
        self._options = options
        self._tasks = {
            'evolve': task_evolve,
            'verify': task_verify,
            'threshold': task_threshold,
            'large-n': task_large_n,
            'stationary': task_stationary,
        }
        self._result = None

    def run(self) -> TaskResult:
        """
        Run the experiment's task.

        Returns:
            TaskResult: Tables and exit code.

        Raises:
            BosonEntanglementError: Library errors pass through with their exit codes.
            TaskFailed: Any other exception raised inside the task.
        """
        key = self._experiment.task
        self._logger.info(f"Starting task '{key}' for experiment '{self._experiment.name}'.")
        self._logger.debug(f"Available tasks: {list(self._tasks.keys())}")

        try:
            tables, exit_code = self._tasks[key](
                key=key, experiment=self._experiment, options=self._options, logger=self._logger
            )
        except BosonEntanglementError:
            raise
        except Exception as error:
            raise TaskFailed(key, f"{type(error).__name__}: {error}") from error

        self._result = TaskResult(tables=tables, exit_code=exit_code)
        self._logger.info(f"Task '{key}' completed with tables {list(tables.keys())}.")
        return self._result

    @property
    def result(self) -> TaskResult:
        return self._result
