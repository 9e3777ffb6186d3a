"""
Write run outputs: resolved configuration, metadata, CSV tables and
training records. All files of a run directory go through one IOClass.
"""

import copy
import json
import logging
import os

import numpy as np
import pandas as pd

from photonqml.config import Config
from photonqml.constants import Constants

logger = logging.getLogger(__name__)


def to_serialisable(value):
    """Convert numpy scalars and arrays for JSON."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serialisable")


class IOClass:
    def __init__(self, output_path: str, task: str, seed: int):
        """Initialise the IO Class.

        Attributes:
            run_path (str): Directory ``<output>/<task>_<seed>``.
            task (str): Task name.
            seed (int): Master seed of the run.
        """
        self.task = task
        self.seed = int(seed)
        self.run_path = os.path.join(output_path, f"{task}_{self.seed}")
        self.files = []

    def create_run_directory(self) -> str:
        os.makedirs(self.run_path, exist_ok=True)
        return self.run_path

    def get_path(self, name: str) -> str:
        return os.path.join(self.run_path, name)

    def register(self, name: str) -> str:
        path = self.get_path(name)
        if name not in self.files:
            self.files.append(name)
        logger.debug("Writing %s", path)
        return path

    def write_resolved_config(self, name: str = "resolved_config.toml"):
        """Write the configuration the run actually used."""
        Config.dump(self.register(name))

    def write_json(self, data: dict, name: str):
        with open(self.register(name), "w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, sort_keys=True, indent=2, default=to_serialisable)
            f.write("\n")

    def write_metadata(self, extra: dict = None, name: str = "metadata.json"):
        """Write the schema-versioned metadata needed to replay the run.

        Args:
            extra: Task-specific entries, stored under "task_metadata".
        """
        metadata = {
            "schema_version": Constants.schema_version,
            "task": self.task,
            "seed": self.seed,
            "resolved_config": Config.get_resolved_table(),
            "mzi_convention": Constants.mzi_convention,
            "encoding_map": Constants.encoding_map,
            "constants": copy.deepcopy(Constants.table),
            "files": sorted(self.files),
            "task_metadata": extra or {},
        }
        self.write_json(metadata, name)

    def write_frame(self, frame: pd.DataFrame, name: str):
        """Write a table as UTF-8 CSV with full float precision."""
        frame.to_csv(
            self.register(name),
            index=False,
            encoding="utf-8",
            float_format="%.17g",
            lineterminator="\n",
        )

    def write_records(self, rows: list, name: str = "train_record.jsonl"):
        """Write one JSON object per line."""
        with open(self.register(name), "w", encoding="utf-8", newline="\n") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True, default=to_serialisable))
                f.write("\n")

    def write_train_record(self, record, prefix: str = ""):
        """Write a training record and its summary."""
        self.write_records(record.get_rows(), f"{prefix}train_record.jsonl")
        self.write_json(record.summary(), f"{prefix}summary.json")

    def write_capacity_scan(self, scan, name: str):
        """Write a capacity scan and the spectra behind its ranks."""
        self.write_frame(scan.to_frame(), f"{name}.csv")
        self.write_frame(scan.spectra_frame(), f"{name}_spectra.csv")

    def write_gram_matrices(self, grams: list):
        for gram in grams:
            self.write_frame(gram.to_frame(), f"gram_epoch_{gram.epoch}.csv")
