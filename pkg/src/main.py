import argparse
import logging
import os
import sys
import time as t
from datetime import datetime
from typing import List, Optional

from src.config import ConfigurationManager
from src.experiment import ExperimentConfig, parse_experiment
from src.io_methods import IOHandler
from src.post_process import PostProcessor
from src.runner import RunOptions, TaskRunner
from src.utils.constants import TASKS
from src.utils.exceptions import BosonEntanglementError, ConfigInvalid


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boson-entanglement",
        description="Entanglement dynamics of bosons in optical lattices under Lindblad noise.")
    subparsers = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        subparser = subparsers.add_parser(task, help=f"Run the {task} task.")
        subparser.add_argument("--config", required=True, help="Experiment JSON file.")
        subparser.add_argument("--output", default=None, help="Output directory (overrides the environment).")
        subparser.add_argument("--seed", type=int, default=None, help="64-bit seed overriding the experiment's.")
        subparser.add_argument("--oracle", action="store_true",
                               help="Also evaluate the partial-transpose negativity (slow).")
    return parser


class MainProcess:
    """
    Orchestrates the main execution process.

    Attributes:
        _args (argparse.Namespace): Parsed command line.
        _config (ConfigurationManager): Instance of configuration settings.
        _io (IOHandler): Input/output handler.
        _logger (Logger): Logger for tracking execution.
        _experiment (ExperimentConfig): Parsed experiment, once loaded.
        _tables (dict): Result tables of the task.
    """

    def __init__(self, argv: Optional[List[str]] = None):
        self._args = build_parser().parse_args(argv)
        self._config = ConfigurationManager(output_directory=self._args.output)
        self._io = IOHandler(self._config)
        self._logger = self._initialize_logger()
        self._experiment = None
        self._tables = {}

    def _initialize_logger(self) -> logging.Logger:
        """
        Configure the logger instance.

        Returns:
            logging.Logger: Configured logger.
        """
        logger = logging.getLogger("MainProcess")
        log_level = logging.DEBUG if self._config.logger_debug else logging.INFO
        logging.basicConfig(
            level=log_level,
            format="%(asctime)-12s %(name)-12s %(levelname)-8s %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        )
        logging.getLogger().setLevel(log_level)
        return logger

    def _setup_file_handler(self) -> logging.FileHandler:
        """
        Setup file logging handler on the root logger, so library modules are captured too.

        Returns:
            logging.FileHandler: Configured file handler.
        """
        current_datetime = datetime.now().strftime('%Y%m%d_%H%M%S')
        log_file = os.path.join(self._config.logs_directory, f"log_{current_datetime}.log")
        file_handler = logging.FileHandler(filename=log_file, encoding='utf-8')
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)-12s %(name)-12s %(levelname)-8s %(message)s", datefmt="%Y-%m-%d %H:%M:%S"))
        logging.getLogger().addHandler(file_handler)
        return file_handler

    def load_experiment(self) -> ExperimentConfig:
        data = self._io.read_experiment(self._args.config)
        experiment = parse_experiment(data, task=self._args.task, default_output=self._config.scenario_name)
        if isinstance(data, dict) and data.get("task") not in (None, experiment.task):
            self._logger.info(f"Running '{experiment.task}' instead of the file's task '{data.get('task')}'.")
        if self._args.seed is not None:
            if not 0 <= self._args.seed < 2 ** 64:
                raise ConfigInvalid("/seed", "seed must fit in 64 bits")
            experiment = experiment.with_seed(self._args.seed)
        return experiment

    def run_task(self) -> int:
        """
        Load the experiment, run its task and post-process the tables.

        Returns:
            int: Exit code of the task.
        """
        self._experiment = self.load_experiment()
        self._logger.info(f"Experiment '{self._experiment.name}' (task {self._experiment.task}, "
                          f"seed {self._experiment.seed}).")

        runner = TaskRunner(
            config=self._config,
            logger=logging.getLogger("TaskRunner"),
            experiment=self._experiment,
            options=RunOptions(oracle=self._args.oracle, workers=self._config.workers),
        )
        result = runner.run()
        self._tables = result.tables

        post_processor = PostProcessor(
            tables=self._tables,
            experiment=self._experiment,
            config=self._config,
            logger=logging.getLogger("PostProcessor"),
            io_handler=self._io,
        )
        post_processor.run()
        return result.exit_code

    def run(self) -> int:
        """
        Run the task, converting library errors into the exit codes of the command line.

        Logs the execution time for the complete process.

        Returns:
            int: 0 success, 1 configuration error, 2 invariant violation, 3 numerical failure.
        """
        start_time = t.time()
        file_handler = self._setup_file_handler()

        try:
            exit_code = self.run_task()
            self._logger.info(f"Execution completed in {t.time() - start_time:.2f} seconds (exit code {exit_code}).")
        except BosonEntanglementError as error:
            self._logger.error(f"{type(error).__name__}: {error}")
            exit_code = error.exit_code
        finally:
            logging.getLogger().removeHandler(file_handler)
            file_handler.close()

        return exit_code

    @property
    def tables(self):
        return self._tables


def main(argv: Optional[List[str]] = None) -> int:
    return MainProcess(argv).run()


if __name__ == "__main__":
    sys.exit(main())
