import pathlib

from photonqml.config import TomlLoader, check_allowed, get_photonqml_path_from_env


def get_constants_path() -> pathlib.Path:
    """Get the path to the constants file.

    Uses the PHOTONQML directory, falling back to the file shipped with
    the source tree.
    """
    constants_path = get_photonqml_path_from_env() / "constants.toml"
    if not constants_path.is_file():
        constants_path = pathlib.Path(__file__).resolve().parents[1] / "constants.toml"

    return constants_path


class Constants(TomlLoader):
    """Numerical constants.

    Loads, parses, and sets tolerances and numerical settings for
    PHOTONQML from a valid .toml file. Modules read attributes when
    they are called, so loading another file takes effect immediately.
    """

    table = {}

    def __init__(self, path=None):
        self.load(path or get_constants_path())

    @classmethod
    def load(cls, path: str = "./constants.toml"):
        raw_toml = cls.get_raw_toml(path)
        parsed_toml = cls.set_correct_config(raw_toml)
        cls.set_config_values(parsed_toml)
        cls.table = parsed_toml

    @classmethod
    def set_correct_config(cls, config_table: dict) -> dict:
        """Adjust invalid or mutually exclusive configuration values.

        Args:
            config_table: Loaded .toml data.

        Returns:
            Adjusted .toml data.
        """
        check_allowed(
            "DQFIM method",
            config_table["DERIVATIVES"]["dqfim_method"],
            ["generator", "lifted"],
        )
        # A zero floor would count round-off in an all-zero spectrum
        if config_table["RANK"]["rank_abs_floor"] <= 0.0:
            config_table["RANK"]["rank_abs_floor"] = 1e-14

        return config_table


def main():
    Constants()


if __name__ == "__main__":
    main()
else:
    main()
