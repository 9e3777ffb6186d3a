import json
import pathlib
from datetime import timedelta

import pandas as pd
import pytest

import photonqml.tasks.selftest as module_selftest
from photonqml.kernel.permanent import permanent
from PHOTONQML import EXIT_CONFIG, EXIT_PATH, EXIT_SUCCESS, cli_main, get_time_elapsed

CONFIG_PATH = pathlib.Path(__file__).resolve().parents[2] / "config.toml"


@pytest.fixture(name="conftest_run_in_tmp", autouse=False)
def fixture_conftest_run_in_tmp(tmp_path, monkeypatch):
    """Run from an empty directory so no log file or config is picked up."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("PHOTONQML_DIR", raising=False)
    monkeypatch.delenv("PHOTONQML_WORKERS", raising=False)
    yield tmp_path


class TestSelftest:
    """Tests the numerical kernel checks."""

    @pytest.mark.parametrize("arg_check", module_selftest.CHECKS, ids=lambda check: check[0])
    def test_check(self, arg_check):
        _, check, tolerance = arg_check
        assert check() < tolerance

    def test_run_selftest(self, capsys):
        assert module_selftest.run_selftest()
        output = capsys.readouterr().out
        assert output.count("PASS") == len(module_selftest.CHECKS)
        assert "FAIL" not in output

    def test_check_permanent_sizes(self, monkeypatch, conftest_boilerplate):
        """The permanent is compared for every size from 1 to 7."""
        sizes = []

        def record_permanent(matrix):
            sizes.append(matrix.shape[0])
            return permanent(matrix)

        conftest_boilerplate.patch_variable(
            monkeypatch, module_selftest, {"permanent": record_permanent}
        )
        assert module_selftest.check_permanent() < 1e-10
        assert sizes == [1, 2, 3, 4, 5, 6, 7]


class TestCli:
    """Tests commands and exit codes."""

    def test_selftest(self, conftest_run_in_tmp):
        assert cli_main(["selftest"]) == EXIT_SUCCESS

    def test_no_command(self, conftest_run_in_tmp, capsys):
        assert cli_main([]) == EXIT_CONFIG
        assert "error: usage" in capsys.readouterr().err

    def test_help(self, conftest_run_in_tmp):
        assert cli_main(["--help"]) == EXIT_SUCCESS

    def test_bad_flag(self, conftest_run_in_tmp):
        assert cli_main(["capacity-k", "--m", "six"]) == EXIT_CONFIG

    def test_missing_config(self, conftest_run_in_tmp):
        missing = conftest_run_in_tmp / "missing.toml"
        assert cli_main(["-c", str(missing), "capacity-k"]) == EXIT_PATH

    @pytest.mark.parametrize(
        "arg_flags",
        [
            ["capacity-k", "--n", "7"],
            ["capacity-k", "--shots", "100"],
            ["train-unitary", "--L", "0"],
        ],
    )
    def test_invalid_config(self, conftest_run_in_tmp, arg_flags):
        assert cli_main(["-c", str(CONFIG_PATH), *arg_flags]) == EXIT_CONFIG

    def test_invalid_layout(self, conftest_run_in_tmp):
        config_path = conftest_run_in_tmp / "config.toml"
        text = CONFIG_PATH.read_text(encoding="utf-8")
        config_path.write_text(
            text.replace('layout = "clements"', 'layout = "spiral"'), encoding="utf-8"
        )
        assert cli_main(["-c", str(config_path), "capacity-k"]) == EXIT_CONFIG

    def test_dataset_synth(self, conftest_run_in_tmp):
        output = conftest_run_in_tmp / "vowels.csv"
        assert cli_main(["dataset", "synth", "--output", str(output)]) == EXIT_SUCCESS

        frame = pd.read_csv(output)
        assert len(frame) == 259
        assert frame["label"].nunique() == 7

    def test_dataset_no_action(self, conftest_run_in_tmp):
        assert cli_main(["dataset"]) == EXIT_CONFIG

    def test_capacity_k(self, conftest_run_in_tmp):
        output = conftest_run_in_tmp / "output"
        flags = ["--m", "3", "--n", "1", "--L", "1", "--seed", "5", "--output", str(output)]
        assert cli_main(["-c", str(CONFIG_PATH), "capacity-k", *flags]) == EXIT_SUCCESS

        run_path = output / "capacity-k_5"
        frame = pd.read_csv(run_path / "capacity_k.csv")
        assert list(frame["K"]) == [10, 20, 40, 80]
        # U(3) gives m^2 - 1 - (m - 1) for one state
        assert list(frame["measured_rank"]) == [4, 4, 4, 4]
        assert list(frame["predicted"]) == [4, 4, 4, 4]
        for name in ["capacity_k_spectra.csv", "resolved_config.toml", "metadata.json"]:
            assert (run_path / name).is_file()

        with open(run_path / "metadata.json", encoding="utf-8") as f:
            metadata = json.load(f)
        assert metadata["resolved_config"]["SYSTEM"]["m"] == 3
        assert metadata["task_metadata"]["m"] == 3

    def test_train_unitary(self, conftest_run_in_tmp):
        output = conftest_run_in_tmp / "output"
        flags = ["--m", "3", "--n", "1", "--L", "2", "--epochs", "3", "--output", str(output)]
        assert cli_main(["-c", str(CONFIG_PATH), "train-unitary", *flags]) == EXIT_SUCCESS

        run_path = output / "train-unitary_1234"
        with open(run_path / "train_record.jsonl", encoding="utf-8") as f:
            rows = [json.loads(line) for line in f]
        assert [row["epoch"] for row in rows] == [0, 1, 2, 3]
        assert "closeness" in rows[-1]
        assert (run_path / "summary.json").is_file()

    @pytest.mark.slow
    def test_capacity_k_plateau(self, conftest_run_in_tmp):
        """Two photons in six modes plateau at 2mn - n^2 - 1 - (n - 1) = 18."""
        output = conftest_run_in_tmp / "output"
        flags = ["--m", "6", "--n", "2", "--L", "1", "--output", str(output)]
        assert cli_main(["-c", str(CONFIG_PATH), "capacity-k", *flags]) == EXIT_SUCCESS

        frame = pd.read_csv(output / "capacity-k_1234" / "capacity_k.csv")
        assert list(frame["K"]) == [10, 20, 40, 80]
        assert frame["measured_rank"].max() == 18
        assert list(frame["measured_rank"])[-2:] == [18, 18]
        assert list(frame["predicted"]) == [18, 18, 18, 18]

    def test_train_unitary_replay(self, conftest_run_in_tmp):
        """A resolved configuration reproduces the run byte for byte."""
        output = conftest_run_in_tmp / "output"
        flags = ["--m", "3", "--n", "1", "--L", "2", "--epochs", "5", "--output", str(output)]
        assert cli_main(["-c", str(CONFIG_PATH), "train-unitary", *flags]) == EXIT_SUCCESS
        run_path = output / "train-unitary_1234"

        replay = conftest_run_in_tmp / "replay"
        resolved_path = run_path / "resolved_config.toml"
        flags = ["-c", str(resolved_path), "train-unitary", "--output", str(replay)]
        assert cli_main(flags) == EXIT_SUCCESS
        replay_path = replay / "train-unitary_1234"

        for name in ["train_record.jsonl", "summary.json"]:
            assert (run_path / name).read_bytes() == (replay_path / name).read_bytes()

    def test_get_time_elapsed(self):
        assert get_time_elapsed(timedelta(seconds=125)) == "   2 minutes  5 seconds\n"
