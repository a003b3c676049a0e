from logging import Logger
from typing import Dict

import pandas as pd

from src.config import ConfigurationManager
from src.experiment import ExperimentConfig
from src.io_methods import IOHandler
from src.utils.constants import CSV_COLUMNS
from src.utils.utils import config_digest


class PostProcessor:
    """
    Prepares task tables for export: column order, schema sidecars and the verification tally.

    Attributes:
        _tables (Dict[str, pd.DataFrame]): Tables produced by the task.
        _experiment (ExperimentConfig): Experiment the tables belong to.
        _config (ConfigurationManager): Configuration settings instance.
        _logger (Logger): Logger for tracking post-processing steps.
        _io (IOHandler): Handler for reading and writing data.
        _exports (Dict[str, pd.DataFrame]): Tables prepared for export.
        _schemas (Dict[str, dict]): Sidecar content per exported table.
    """

    def __init__(self, tables: Dict[str, pd.DataFrame], experiment: ExperimentConfig, config: ConfigurationManager,
                 logger: Logger, io_handler: IOHandler):
        self._tables = tables
        self._experiment = experiment
        self._config = config
        self._logger = logger
        self._io = io_handler
        self._exports = {}
        self._schemas = {}

    def run(self):
        """
        Execute the post-processing pipeline and write the results if export is enabled.
        """
        self._logger.info("Starting post-processing.")

        digest = config_digest(self._experiment.to_dict())
        for name, df in self._tables.items():
            self._exports[name] = self._order_columns(name, df)
            self._schemas[name] = self._schema(name, digest)

        if 'summary' in self._exports:
            self._log_summary(self._exports['summary'])

        if self._config.export_solution:
            schemas = self._schemas if self._config.export_schema else {}
            self._io.write_tables(self._exports, schemas, self._experiment.output.path, self._logger)

        self._logger.info("Post-processing completed.")

    @staticmethod
    def _order_columns(name: str, df: pd.DataFrame) -> pd.DataFrame:
        documented = [column for column in CSV_COLUMNS.get(name, {}) if column in df.columns]
        extra = [column for column in df.columns if column not in documented]
        return df[documented + extra]

    def _schema(self, name: str, digest: str) -> dict:
        columns = CSV_COLUMNS.get(name, {})
        return {
            'table': name,
            'task': self._experiment.task,
            'experiment': self._experiment.name,
            'config_digest': digest,
            'seed': self._experiment.seed,
            'columns': {column: columns.get(column, "") for column in self._exports[name].columns},
        }

    def _log_summary(self, summary: pd.DataFrame):
        counts = summary['status'].value_counts().to_dict()
        self._logger.info(f"Verification summary: {counts}")
        for _, row in summary[summary['status'].isin(["failed", "precondition_violated"])].iterrows():
            self._logger.warning(f"Check {row['check']} {row['status']}: {row['detail']}")

    @property
    def exports(self) -> Dict[str, pd.DataFrame]:
        return self._exports

    @property
    def schemas(self) -> Dict[str, dict]:
        return self._schemas
