#!/usr/bin/env python

"""
This is the main code file of PHOTONQML, a simulator for quantum machine
learning with multi-photon states in linear optical circuits.

It computes the learning capacity of parameterised interferometers from
the data quantum Fisher information matrix, and trains interferometers
to learn unknown unitaries or a similarity metric on labelled data.

Usage:

From source:
``python PHOTONQML.py [-c <path>] [-x <path>] <command> [<flags>]``

Entry point:
``photonqml-run [-c <path>] [-x <path>] <command> [<flags>]``

Commands:
    capacity-k      DQFIM rank against parameter count.
    capacity-l      DQFIM rank against training set size.
    train-unitary   Learn an unknown mode unitary.
    train-metric    Metric learning on the vowel dataset.
    dataset synth   Write the synthetic vowel surrogate as CSV.
    selftest        Run the numerical kernel checks.

Exit codes:
    0   Success.
    1   Invalid configuration or usage.
    2   Unreadable path.
    3   Numerical failure.
"""

import logging
import logging.config
import os
import sys
from contextlib import nullcontext
from datetime import datetime

import numpy as np
import yaml
from distributed import Client, LocalCluster

from photonqml.config import OVERRIDE_KEYS, Config, get_user_arguments
from photonqml.constants import Constants
from photonqml.kernel.core import derive_seed, run_cells
from photonqml.kernel.io import IOClass
from photonqml.modules.dqfim import capacity_vs_K, capacity_vs_L
from photonqml.modules.optimizers import AdamConfig, SpsaConfig
from photonqml.modules.training import TrainingError
from photonqml.tasks.metric_learning import MetricTaskSpec, run_metric_learning
from photonqml.tasks.selftest import run_selftest
from photonqml.tasks.unitary_learning import UnitaryTaskSpec, run_unitary_learning
from photonqml.utilities.vowels.vowel_dataset import (
    DatasetError,
    load_dataset,
    synth_dataset,
    write_dataset,
)

EXIT_SUCCESS = 0
EXIT_CONFIG = 1
EXIT_PATH = 2
EXIT_NUMERIC = 3


def main():
    sys.exit(cli_main())


def cli_main(argv: list = None) -> int:
    """Run one command.

    Args:
        argv: Command-line arguments. Defaults to ``sys.argv[1:]``.

    Returns:
        Exit code.
    """
    try:
        args = get_user_arguments(argv)
    except SystemExit as exc:
        return EXIT_SUCCESS if exc.code in (0, None) else EXIT_CONFIG

    start_logging()
    if args.command is None:
        report_error("usage", "no command given, see --help")
        return EXIT_CONFIG

    try:
        if args.command == "selftest":
            return EXIT_SUCCESS if run_selftest() else EXIT_NUMERIC
        elif args.command == "dataset":
            return write_synthetic_dataset(args)

        overrides = {flag: getattr(args, flag, None) for flag in OVERRIDE_KEYS}
        overrides["task"] = args.command
        Config(args.config_path, overrides=overrides)
        Constants(args.constants_path)
        run_task()

    except (FileNotFoundError, NotADirectoryError, PermissionError, IsADirectoryError) as err:
        report_error("path", err)
        return EXIT_PATH
    except DatasetError as err:
        report_error("dataset", err)
        return EXIT_CONFIG
    except (TrainingError, ArithmeticError, np.linalg.LinAlgError) as err:
        report_error("numeric", err)
        return EXIT_NUMERIC
    except (ValueError, KeyError, IndexError) as err:
        report_error("config", err)
        return EXIT_CONFIG

    return EXIT_SUCCESS


def report_error(kind: str, err):
    logging.getLogger(__name__).error("%s: %s", kind, err)
    print(f"error: {kind}: {err}", file=sys.stderr)


def write_synthetic_dataset(args) -> int:
    if args.dataset_command != "synth":
        report_error("usage", "dataset needs an action, e.g. 'dataset synth'")
        return EXIT_CONFIG
    dataset = synth_dataset(per_class=args.per_class, separation=args.separation, seed=args.seed)
    write_dataset(dataset, args.output)
    print(f"Wrote {dataset.size} samples to {args.output}")

    return EXIT_SUCCESS


def run_task():
    """Run the configured task over all seeds and write its outputs."""
    start_time = datetime.now()
    print_notice(msg=f"\tStarting {Config.task} ...")

    if Config.dask_use:
        cluster = LocalCluster(
            scheduler_port=Config.local_port,
            n_workers=Config.workers,
            local_directory="logs/dask-worker-space",
            threads_per_worker=1,
            silence_logs=True,
        )
    else:
        cluster = nullcontext()

    with cluster:
        with Client(cluster) if Config.dask_use else nullcontext() as client:
            if client is not None:
                print(client)
            seeds = [Config.seed + offset for offset in range(Config.seeds)]
            if Config.task == "capacity-k":
                for seed in seeds:
                    write_capacity(seed, "capacity_k", get_capacity_vs_K(seed, client))
            elif Config.task == "capacity-l":
                for seed in seeds:
                    write_capacity(seed, "capacity_l", get_capacity_vs_L(seed, client))
            elif Config.task == "train-unitary":
                specs = [get_unitary_spec(seed) for seed in seeds]
                records = run_cells(run_unitary_learning, [{"spec": s} for s in specs], client)
                for seed, record in zip(seeds, records):
                    write_unitary(seed, record)
            elif Config.task == "train-metric":
                dataset = get_dataset()
                specs = [get_metric_spec(dataset, seed) for seed in seeds]
                runs = run_cells(run_metric_learning, [{"spec": s} for s in specs], client)
                for seed, run in zip(seeds, runs):
                    write_metric(seed, run)

    get_time_required(action=f"run {Config.task}", times=datetime.now() - start_time)
    print_notice(msg="\tRUN WAS SUCCESSFUL")


def get_capacity_vs_K(seed: int, client):
    return capacity_vs_K(
        Config.m,
        Config.n,
        Config.L,
        Config.K_values,
        theta_samples=Config.theta_samples,
        seed=seed,
        variant=Config.layout,
        client=client,
    )


def get_capacity_vs_L(seed: int, client):
    return capacity_vs_L(
        Config.m,
        Config.n,
        Config.L_values,
        theta_samples=Config.theta_samples,
        seed=seed,
        variant=Config.layout,
        client=client,
    )


def get_spsa_config(seed: int) -> SpsaConfig:
    return SpsaConfig(
        a=Config.spsa_a,
        c=Config.spsa_c,
        max_epochs=Config.max_epochs,
        seed=seed,
        scaling=Config.spsa_scaling,
        decay=Config.spsa_decay,
        alpha=Config.spsa_alpha,
        gamma=Config.spsa_gamma,
        stability=Config.spsa_stability,
    )


def get_adam_config() -> AdamConfig:
    return AdamConfig(
        lr=Config.adam_lr,
        betas=(Config.adam_beta1, Config.adam_beta2),
        epsilon=Config.adam_epsilon,
        plateau_patience=Config.plateau_patience,
        plateau_factor=Config.plateau_factor,
        min_lr=Config.adam_min_lr,
    )


def get_unitary_spec(seed: int) -> UnitaryTaskSpec:
    return UnitaryTaskSpec(
        m=Config.m,
        n=Config.n,
        L=Config.L,
        target_seed=derive_seed(seed, 0),
        data_seed=derive_seed(seed, 1),
        init_seed=derive_seed(seed, 2),
        dataset=Config.dataset,
        closeness_side=Config.closeness_side,
        body_layers=Config.unitary_layers,
        layout=Config.layout,
        optimizer=Config.optimizer,
        spsa=get_spsa_config(seed),
        adam=get_adam_config(),
        max_epochs=Config.max_epochs,
        checkpoint_every=Config.checkpoint_every,
        success_threshold=Config.success_threshold,
        failure_threshold=Config.failure_threshold,
    )


def get_dataset():
    if Config.dataset_path:
        return load_dataset(Config.dataset_path)
    return synth_dataset(
        classes=Config.classes,
        per_class=Config.per_class,
        dim=Config.features,
        separation=Config.separation,
        seed=Config.seed,
    )


def get_metric_spec(dataset, seed: int) -> MetricTaskSpec:
    return MetricTaskSpec(
        dataset=dataset,
        m=Config.m,
        n=Config.n,
        encoder_features=Config.encoder_features,
        body_layers=Config.metric_layers,
        layout=Config.layout,
        split_ratio=Config.split_ratio,
        margin=Config.margin,
        batch_size=Config.batch_size,
        shots=Config.shots,
        optimizer=Config.optimizer,
        spsa=get_spsa_config(seed),
        adam=get_adam_config(),
        max_epochs=Config.max_epochs,
        seed=seed,
        gram_epochs=tuple(Config.gram_epochs),
        checkpoint_every=Config.checkpoint_every,
    )


def create_io(seed: int) -> IOClass:
    IO = IOClass(Config.output_path, Config.task, seed)
    IO.create_run_directory()
    IO.write_resolved_config()
    return IO


def write_capacity(seed: int, name: str, scan):
    IO = create_io(seed)
    IO.write_capacity_scan(scan, name)
    IO.write_metadata(extra=scan.metadata)
    print(scan.to_frame().to_string(index=False))


def write_unitary(seed: int, record):
    IO = create_io(seed)
    IO.write_train_record(record)
    IO.write_metadata(extra={"config": record.config, "final_metrics": record.final_metrics})
    print(
        f"\tSeed {seed}: C_M = {record.final_metrics['closeness']:.4f}, "
        f"generalized = {record.final_metrics['generalized']}"
    )


def write_metric(seed: int, run):
    IO = create_io(seed)
    IO.write_train_record(run.record)
    IO.write_gram_matrices(run.grams)
    IO.write_metadata(
        extra={"config": run.record.config, "final_metrics": run.record.final_metrics}
    )
    print(
        f"\tSeed {seed}: test loss = {run.record.final_metrics['test_loss']:.4f}, "
        f"pairwise accuracy = {run.accuracy:.3f}"
    )


def start_logging():
    """Start the python logging"""

    if os.path.exists("./photonqml.yaml"):
        with open("./photonqml.yaml", "rt") as f:
            config = yaml.load(f.read(), Loader=yaml.SafeLoader)
        logging.config.dictConfig(config)
    else:
        logging.basicConfig(level=logging.INFO)

    logger = logging.getLogger(__name__)
    logger.info("PHOTONQML run started")


def print_notice(msg: str):
    print(f"{'-'*72}\n{msg}\n{'-'*72}\n")


def get_time_required(action: str, times):
    run_time = get_time_elapsed(times)
    print(f"\tTime required to {action}: {run_time}")


def get_time_elapsed(times) -> str:
    run_time = times.total_seconds()
    time_elapsed = f"{run_time//60.0:4g} minutes {run_time % 60.0:2g} seconds\n"
    return time_elapsed


""" MODEL EXECUTION """
if __name__ == "__main__":
    main()
