import json
import os
from logging import Logger
from pathlib import Path
from typing import Dict, List

import pandas as pd

from src.config import ConfigurationManager
from src.utils.constants import CSV_FLOAT_FORMAT
from src.utils.exceptions import ConfigInvalid


class IOHandler:
    """
    Manages input and output operations, primarily interacting with the file system.

    Attributes:
        _config (ConfigurationManager): Instance of the configuration settings.
    """

    def __init__(self, config: ConfigurationManager):
        self._config = config

    @staticmethod
    def read_experiment(filepath: str) -> dict:
        """
        Load an experiment definition.

        Args:
            filepath (str): Path to the JSON file.

        Returns:
            dict: Parsed JSON.

        Raises:
            ConfigInvalid: The file is missing or is not valid JSON.
        """
        try:
            with open(filepath, 'r', encoding='utf-8') as experiment_file:
                return json.load(experiment_file)
        except FileNotFoundError as error:
            raise ConfigInvalid("", f"experiment file not found: {filepath}") from error
        except json.JSONDecodeError as error:
            raise ConfigInvalid("", f"invalid JSON at line {error.lineno}: {error.msg}") from error

    @staticmethod
    def read_csv(filepath: str, sep: str = ",") -> pd.DataFrame:
        """
        Load a CSV file written by write_to_csv into a DataFrame.

        Args:
            filepath (str): Path to the CSV file.
            sep (str): Delimiter to use.

        Returns:
            pd.DataFrame: Loaded DataFrame.
        """
        return pd.read_csv(filepath, sep=sep, encoding='utf-8-sig')

    @staticmethod
    def write_to_csv(df: pd.DataFrame, filepath: str) -> None:
        """
        Write a DataFrame to a CSV file with UTF-8 BOM encoding and full float precision.

        Args:
            df (pd.DataFrame): DataFrame to write.
            filepath (str): Destination path.
        """
        if df.empty:
            raise ValueError("Cannot write an empty DataFrame to CSV.")
        df.to_csv(filepath, index=False, encoding='utf-8-sig', float_format=CSV_FLOAT_FORMAT, lineterminator='\n')

    @staticmethod
    def write_schema(schema: dict, filepath: str) -> None:
        with open(filepath, 'w', encoding='utf-8') as schema_file:
            json.dump(schema, schema_file, indent=2, sort_keys=True)
            schema_file.write('\n')

    def output_directory(self, relative_path: str) -> Path:
        directory = Path(self._config.export_directory) / relative_path
        os.makedirs(directory, exist_ok=True)
        return directory

    def write_tables(self, tables: Dict[str, pd.DataFrame], schemas: Dict[str, dict], relative_path: str,
                     logger: Logger) -> List[Path]:
        """
        Save result tables and their schema sidecars.

        Args:
            tables (Dict[str, pd.DataFrame]): Tables keyed by name.
            schemas (Dict[str, dict]): Sidecar content per table name; tables without one get no sidecar.
            relative_path (str): Subdirectory of the export directory.
            logger (Logger): Logger instance for logging messages.

        Returns:
            List[Path]: Written CSV paths.
        """
        directory = self.output_directory(relative_path)
        logger.info(f"Writing results to {directory}.")

        written = []
        for name, df in tables.items():
            filepath = directory / f'{name}.csv'

            if df.empty:
                logger.warning(f"The DataFrame '{name}' is empty. Skipping writing to {filepath}.")
                continue

            self.write_to_csv(df, str(filepath))
            written.append(filepath)
            if name in schemas:
                self.write_schema(schemas[name], str(directory / f'{name}.schema.json'))

        return written
