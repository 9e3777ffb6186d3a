"""
Hook configuration files for PHOTONQML.
"""

import argparse
import copy
import os
import pathlib
import sys
from importlib.metadata import entry_points
from typing import Optional

import toml

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib  # backwards compatibility

TASKS = ["capacity-k", "capacity-l", "train-unitary", "train-metric"]

# flag name: (table, key)
OVERRIDE_KEYS = {
    "m": ("SYSTEM", "m"),
    "n": ("SYSTEM", "n"),
    "L": ("SYSTEM", "L"),
    "seed": ("RUN", "seed"),
    "seeds": ("RUN", "seeds"),
    "output": ("RUN", "output_path"),
    "shots": ("RUN", "shots"),
    "epochs": ("OPTIMIZER", "max_epochs"),
    "optimizer": ("OPTIMIZER", "optimizer"),
    "workers": ("PARALLELIZATION", "workers"),
    "data": ("METRIC", "dataset_path"),
}


def get_photonqml_path_from_env(name: str = "PHOTONQML_DIR") -> pathlib.Path:
    """Get path to the PHOTONQML directory.

    Config files are searched for in the current working directory
    unless this environment variable points elsewhere.

    Args:
        name: Name of environment variable pointing to the PHOTONQML
            directory.

    Returns:
        Path to the PHOTONQML directory.

    Raises:
        NotADirectoryError: Invalid path.
    """
    photonqml_path = pathlib.Path(os.environ.get(name, os.getcwd()))
    if not photonqml_path.is_dir():
        raise NotADirectoryError(f"Invalid path at: {photonqml_path}")

    return photonqml_path


def get_workers_from_env(name: str = "PHOTONQML_WORKERS") -> Optional[int]:
    """Get the worker count override, if any.

    Raises:
        ValueError: Value is not a non-negative integer.
    """
    value = os.environ.get(name, "")
    if not value:
        return None
    if not value.isdigit():
        raise ValueError(f"{name} must be a non-negative integer, got '{value}'")

    return int(value)


def add_override_arguments(parser: argparse.ArgumentParser):
    """Add flags that override values from the configuration file."""

    parser.add_argument("--m", type=int, metavar="<int>", help="mode count")
    parser.add_argument("--n", type=int, metavar="<int>", help="photon count")
    parser.add_argument(
        "--L", type=int, metavar="<int>", help="training set size"
    )
    parser.add_argument("--seed", type=int, metavar="<int>", help="master seed")
    parser.add_argument(
        "--seeds", type=int, metavar="<int>", help="independent seeds"
    )
    parser.add_argument(
        "--output", type=str, metavar="<path>", help="output directory"
    )
    parser.add_argument(
        "--shots",
        type=int,
        metavar="<int>",
        help="shots per distribution, 0 for exact probabilities",
    )
    parser.add_argument(
        "--epochs", type=int, metavar="<int>", help="training epochs"
    )
    parser.add_argument(
        "--optimizer", type=str, metavar="<str>", help="'spsa' or 'adam'"
    )
    parser.add_argument(
        "--workers", type=int, metavar="<int>", help="number of workers"
    )
    parser.add_argument(
        "--data", type=str, metavar="<path>", help="vowel dataset CSV"
    )


def set_parser() -> argparse.ArgumentParser:
    """Set argument parser for PHOTONQML."""
    tagline = "Multi-photon quantum machine learning on linear optical circuits."
    parser = argparse.ArgumentParser(prog="PHOTONQML", description=tagline)
    photonqml_path = get_photonqml_path_from_env()

    # Optional arguments
    parser.add_argument(
        "-c",
        "--config",
        default=photonqml_path / "config.toml",
        dest="config_path",
        type=pathlib.Path,
        metavar="<path>",
        required=False,
        help="relative path to configuration file",
    )

    parser.add_argument(
        "-x",
        "--constants",
        default=None,
        dest="constants_path",
        type=pathlib.Path,
        metavar="<path>",
        required=False,
        help="relative path to constants file, defaults to the project constants",
    )

    subparsers = parser.add_subparsers(dest="command", metavar="<command>")
    for task, text in zip(
        TASKS,
        [
            "DQFIM rank against parameter count",
            "DQFIM rank against training set size",
            "learn an unknown mode unitary",
            "metric learning on the vowel dataset",
        ],
    ):
        task_parser = subparsers.add_parser(task, help=text)
        add_override_arguments(task_parser)

    dataset_parser = subparsers.add_parser("dataset", help="dataset tools")
    dataset_commands = dataset_parser.add_subparsers(
        dest="dataset_command", metavar="<action>"
    )
    synth_parser = dataset_commands.add_parser(
        "synth", help="write the synthetic vowel surrogate as CSV"
    )
    synth_parser.add_argument(
        "--per-class", type=int, default=37, dest="per_class", metavar="<int>"
    )
    synth_parser.add_argument(
        "--separation", type=float, default=3.0, metavar="<float>"
    )
    synth_parser.add_argument("--seed", type=int, default=0, metavar="<int>")
    synth_parser.add_argument(
        "--output",
        type=pathlib.Path,
        default=pathlib.Path("synthetic_vowels.csv"),
        metavar="<path>",
    )

    subparsers.add_parser("selftest", help="run the numerical kernel checks")

    return parser


def get_user_arguments(argv: Optional[list] = None) -> argparse.Namespace:
    """Parse user arguments when run as main.

    Optional switches:
        -h, --help              Show this help message and exit.

    Optional arguments:
        -c, --config <str>      Relative path to configuration file.
        -x, --constants <str>   Relative path to constants file.

    Args:
        argv: Arguments to parse. Defaults to ``sys.argv[1:]``.

    Returns:
        Namespace of user arguments.
    """

    parser = set_parser()
    arguments = parser.parse_args(argv)

    return arguments


def get_help():
    """Print help for commands."""
    parser = set_parser()
    parser.print_help()
    sys.exit(1)


def get_entry_points(package_name: str = "photonqml"):
    """Get package entry points.

    Returns:
        Generator: All of the package's available entry points.
    """

    if sys.version_info >= (3, 10):
        entries = entry_points(group="console_scripts")
    else:
        entries = entry_points()["console_scripts"]
    entrypoints = (
        ep
        for ep in entries
        if ep.name.startswith(package_name.upper())
        or ep.name.startswith(package_name.lower())
        or package_name.lower() in ep.name
    )

    return entrypoints


def print_entry_points(package_name: str = "photonqml"):
    """Print available entry points and their associated function."""
    entrypoints = get_entry_points(package_name=package_name)
    for ep in entrypoints:
        print(f"{ep.name}:\t{ep.value}")


class TomlLoader(object):
    """Load and parse configuration files."""

    @staticmethod
    def get_raw_toml(file_path: str = "./config.toml") -> dict:
        """Open and load .toml configuration file.

        Args:
            file_path: Relative path to .toml configuration file.

        Returns:
            Loaded .toml data.
        """
        with open(file_path, "rb") as f:
            raw_config = tomllib.load(f)

        return raw_config

    @staticmethod
    def write_toml(config_table: dict, file_path: str):
        """Write configuration data to a .toml file."""
        with open(file_path, "w", encoding="utf-8") as f:
            toml.dump(config_table, f)

    @classmethod
    def set_config_values(cls, config_table: dict):
        """Overwrite attributes with configuration data.

        Args:
            config_table: Loaded .toml data.
        """
        for _, table in config_table.items():
            for k, v in table.items():
                setattr(cls, k, v)


def check_allowed(name: str, value: str, allowed: list):
    """Raise an error if a configured method is not supported.

    Raises:
        ValueError: Value is not one of the allowed options.
    """
    if value not in allowed:
        error_message = (
            f'{name} = "{value}"',
            "is not allowed, must be one of",
            f'{", ".join(allowed)}',
        )
        raise ValueError(" ".join(error_message))


class Config(TomlLoader):
    """Run configuration.

    Loads, parses, and sets the run configuration for PHOTONQML from a
    valid .toml file. The resolved table is kept so that every run can
    write it back next to its results.
    """

    table = {}

    def __init__(self, path=None, overrides: Optional[dict] = None):
        if path is None:
            path = get_photonqml_path_from_env() / "config.toml"
        self.load(path, overrides=overrides)

    @classmethod
    def load(cls, path: str = "./config.toml", overrides: Optional[dict] = None):
        raw_toml = cls.get_raw_toml(path)
        raw_toml = cls.apply_overrides(raw_toml, overrides or {})
        parsed_toml = cls.set_correct_config(raw_toml)
        cls.check_config(parsed_toml)
        cls.set_config_values(parsed_toml)
        cls.table = parsed_toml

    @classmethod
    def apply_overrides(cls, config_table: dict, overrides: dict) -> dict:
        """Apply environment and command-line overrides.

        Flags take precedence over the environment, which takes
        precedence over the file.

        Args:
            config_table: Loaded .toml data.
            overrides: Flag names mapped to values. ``None`` values and
                unknown names are ignored, except ``task``.

        Returns:
            Updated .toml data.
        """
        config_table = copy.deepcopy(config_table)
        env_workers = get_workers_from_env()
        if env_workers is not None:
            config_table["PARALLELIZATION"]["workers"] = env_workers
        if overrides.get("task") is not None:
            config_table["RUN"]["task"] = overrides["task"]
        for flag, (section, key) in OVERRIDE_KEYS.items():
            if overrides.get(flag) is not None:
                config_table[section][key] = overrides[flag]

        return config_table

    @classmethod
    def set_correct_config(cls, config_table: dict) -> dict:
        """Adjust invalid or mutually exclusive configuration values.

        Args:
            config_table: Loaded .toml data.

        Returns:
            Adjusted .toml data.
        """
        run = config_table["RUN"]
        optimizer = config_table["OPTIMIZER"]
        if run["shots"] <= 0:
            run["mode"] = "exact"
            run["shots"] = 0
        elif run["mode"] == "exact":
            run["mode"] = "shots"
        if optimizer["spsa_scaling"] == "auto":
            if run["task"] == "train-metric":
                optimizer["spsa_scaling"] = "none"
            else:
                optimizer["spsa_scaling"] = "parameters"
        if optimizer["spsa_a"] == 0:
            if run["task"] == "train-metric":
                optimizer["spsa_a"] = 150.0
            elif optimizer["spsa_scaling"] == "parameters":
                optimizer["spsa_a"] = 1.0
            else:
                optimizer["spsa_a"] = 3.0
        if not config_table["METRIC"]["gram_epochs"]:
            epochs = optimizer["max_epochs"]
            config_table["METRIC"]["gram_epochs"] = sorted(
                {0, epochs // 2, epochs}
            )
        # Port datasets leave input-side phases unconstrained
        if config_table["UNITARY"]["dataset"] == "ports":
            config_table["UNITARY"]["closeness_side"] = "input"
        # TOML doesn't support null values
        if config_table["PARALLELIZATION"]["workers"] == 0:
            config_table["PARALLELIZATION"]["workers"] = None

        return config_table

    @classmethod
    def check_config(cls, config_table: dict):
        """Reject invalid configuration values.

        Raises:
            ValueError: Invalid value or combination of values.
        """
        run = config_table["RUN"]
        system = config_table["SYSTEM"]
        check_allowed("Task", run["task"], TASKS)
        check_allowed("Mode", run["mode"], ["exact", "shots"])
        check_allowed(
            "Layout", config_table["ANSATZ"]["layout"], ["clements", "mirrored"]
        )
        check_allowed(
            "Optimizer", config_table["OPTIMIZER"]["optimizer"], ["spsa", "adam"]
        )
        check_allowed(
            "SPSA scaling",
            config_table["OPTIMIZER"]["spsa_scaling"],
            ["none", "parameters"],
        )
        check_allowed(
            "Unitary dataset", config_table["UNITARY"]["dataset"], ["haar", "ports"]
        )
        check_allowed(
            "Closeness side",
            config_table["UNITARY"]["closeness_side"],
            ["output", "input"],
        )
        if system["m"] < 1:
            raise ValueError(f"Mode count m must be at least 1, got {system['m']}")
        if not 1 <= system["n"] <= system["m"]:
            raise ValueError(
                f"Photon count n must be in [1, m={system['m']}], got {system['n']}"
            )
        if system["L"] < 1:
            raise ValueError(f"Training set size L must be at least 1, got {system['L']}")
        if run["seeds"] < 1:
            raise ValueError(f"Number of seeds must be at least 1, got {run['seeds']}")
        if config_table["OPTIMIZER"]["max_epochs"] < 0:
            raise ValueError("max_epochs must be non-negative")
        if config_table["OPTIMIZER"]["spsa_c"] <= 0:
            raise ValueError("spsa_c must be positive")
        if config_table["OPTIMIZER"]["adam_min_lr"] < 0:
            raise ValueError("adam_min_lr must be non-negative")
        if not 0 < config_table["METRIC"]["split_ratio"] < 1:
            raise ValueError(
                f"split_ratio must be in (0, 1), got {config_table['METRIC']['split_ratio']}"
            )
        if config_table["METRIC"]["margin"] < 0:
            raise ValueError("margin must be non-negative")
        if run["mode"] == "shots" and run["task"] != "train-metric":
            raise ValueError(
                f"Shot sampling is only available for train-metric, got task {run['task']}"
            )
        if run["mode"] == "shots" and config_table["OPTIMIZER"]["optimizer"] == "adam":
            raise ValueError(
                "Adam uses exact gradients and cannot train on sampled distributions, "
                "use optimizer 'spsa' with shots"
            )
        if config_table["METRIC"]["batch_size"] < 0:
            raise ValueError("batch_size must be non-negative")
        if config_table["UNITARY"]["unitary_layers"] < 1:
            raise ValueError("unitary_layers must be at least 1")
        if config_table["METRIC"]["metric_layers"] < 1:
            raise ValueError("metric_layers must be at least 1")
        if (
            run["task"] == "train-unitary"
            and config_table["UNITARY"]["dataset"] == "ports"
            and system["n"] * system["L"] > system["m"]
        ):
            raise ValueError(
                "Port datasets need n*L <= m disjoint input modes, "
                f"got n*L = {system['n'] * system['L']} > m = {system['m']}"
            )

    @classmethod
    def get_resolved_table(cls) -> dict:
        """Get the resolved configuration in a serialisable form."""
        resolved = copy.deepcopy(cls.table)
        if resolved["PARALLELIZATION"]["workers"] is None:
            resolved["PARALLELIZATION"]["workers"] = 0

        return resolved

    @classmethod
    def dump(cls, path: str):
        """Write the resolved configuration to a .toml file."""
        cls.write_toml(cls.get_resolved_table(), path)
