import json
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from src.utils.constants import OUTPUT_DIR_ENV


class ConfigurationManager:
    """
    Manages execution configurations.

    Attributes:
        _config (dict): Execution configuration.
        _main_path (Path): Main directory path, relative paths resolved against the project root.
        _logs_directory (Path): Logs directory path.
        _export_directory (Path): Output directory path (overridden by the environment or --output).
        _timestamp (str): Timestamp when the configuration was loaded.
        _scenario_name (str): Default output subdirectory for experiments without output.path.
        _workers (int): Ordered worker pool size for grid points.
        _export_solution (bool): Flag to write the result tables.
        _export_schema (bool): Flag to write the schema sidecars.
        _logger_debug (bool): Debug flag for logging.
    """

    def __init__(self, output_directory: Optional[str] = None, config_filepath: Optional[str] = None):
        load_dotenv()
        root_path = self.get_project_root()

        self.config_filepath = config_filepath or os.path.join(root_path, 'config/config.json')

        self._config = self.read_config()

        self._main_path = root_path / (self.get_value("directories.main_path") or "data")
        self._logs_directory = self._main_path / (self.get_value("directories.logs_directory") or "logs")

        override = output_directory or os.getenv(OUTPUT_DIR_ENV)
        if override:
            self._export_directory = Path(override)
        else:
            self._export_directory = self._main_path / (self.get_value("directories.export_directory") or "outputs")

        for d in (self._logs_directory, self._export_directory):
            d.mkdir(parents=True, exist_ok=True)

        self._timestamp = datetime.now().strftime("%Y_%m_%d__%H_%M_%S")

        self._workers = int(self.get_value('execution.workers') or 1)

        self._export_solution = self.get_value('export.solution') is not False
        self._export_schema = self.get_value('export.schema') is not False

        self._logger_debug = bool(self.get_value('logger.debug'))

        self._scenario_name = self.get_value('directories.scenario_name') or "experiment"

    @staticmethod
    def get_project_root() -> Path:
        return Path(__file__).parent.parent

    def get_value(self, key: str) -> Any:
        keys = key.split('.')
        data = self._config
        for k in keys:
            if isinstance(data, dict) and k in data:
                data = data[k]
            else:
                return None
        return data

    def read_config(self) -> Dict[str, Any]:
        try:
            with open(self.config_filepath, 'r', encoding='utf-8') as config_file:
                return json.load(config_file)
        except FileNotFoundError:
            return {}

    @property
    def main_path(self):
        return self._main_path

    @property
    def logs_directory(self):
        return self._logs_directory

    @property
    def export_directory(self):
        return self._export_directory

    @property
    def timestamp(self):
        return self._timestamp

    @property
    def scenario_name(self):
        return self._scenario_name

    @property
    def workers(self):
        return self._workers

    @property
    def logger_debug(self):
        return self._logger_debug

    @property
    def export_solution(self):
        return self._export_solution

    @property
    def export_schema(self):
        return self._export_schema
