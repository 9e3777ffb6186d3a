"""
Reads the vowel formant dataset and generates a synthetic surrogate.

Expected CSV schema: twelve numeric feature columns followed by one
label column, one sample per row. A header row is optional. Labels are
the vowel classes ``ae, ah, aw, er, ih, iy, uw``; every class present
must hold the same number of samples. The canonical set holds 37
samples per class. Feature units are not interpreted.

Other layouts of the public formant tables must be converted to this
schema first, e.g. by selecting the twelve formant columns and moving
the vowel label to the end.

Usage:

From source:
``python -m photonqml.utilities.vowels.vowel_dataset -o <output> [--per-class <int>] [--separation <float>] [--seed <int>]``

Entry point:
``photonqml-run dataset synth --output <output>``
"""

import argparse
import logging
import pathlib
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

VOWELS = ("ae", "ah", "aw", "er", "ih", "iy", "uw")
FEATURE_COUNT = 12
FEATURE_COLUMNS = [f"feature_{i}" for i in range(FEATURE_COUNT)]


class DatasetError(ValueError):
    """Dataset file or split is malformed.

    Attributes:
        column_count: Number of columns found, if relevant.
        counts: Samples per class, if relevant.
    """

    def __init__(self, message: str, column_count: int = None, counts: dict = None):
        super().__init__(message)
        self.column_count = column_count
        self.counts = counts


@dataclass(frozen=True, eq=False)
class VowelDataset:
    """Labelled feature vectors.

    Attributes:
        features: Sample features, shape (N, 12).
        labels: Class label per sample.
    """

    features: np.ndarray = field(repr=False)
    labels: tuple

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] != len(self.labels):
            raise DatasetError(
                f"Got {len(self.labels)} labels for features of shape {self.features.shape}"
            )

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def classes(self) -> tuple:
        return tuple(sorted(set(self.labels)))

    def get_counts(self) -> dict:
        labels, counts = np.unique(np.asarray(self.labels), return_counts=True)
        return {str(label): int(count) for label, count in zip(labels, counts)}

    def select(self, indices: np.ndarray) -> "VowelDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return VowelDataset(
            features=self.features[indices],
            labels=tuple(self.labels[i] for i in indices),
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.features, columns=FEATURE_COLUMNS[: self.features.shape[1]])
        frame["label"] = list(self.labels)
        return frame


@dataclass(frozen=True)
class FeatureScaling:
    """Per-feature min-max map onto [0, pi]."""

    minimum: np.ndarray = field(repr=False)
    maximum: np.ndarray = field(repr=False)

    @classmethod
    def fit(cls, dataset: VowelDataset) -> "FeatureScaling":
        return cls(
            minimum=dataset.features.min(axis=0),
            maximum=dataset.features.max(axis=0),
        )

    def apply(self, dataset: VowelDataset) -> VowelDataset:
        """Scale features; values outside the fitted range are clipped."""
        span = np.where(self.maximum > self.minimum, self.maximum - self.minimum, 1.0)
        scaled = np.clip((dataset.features - self.minimum) / span, 0.0, 1.0) * np.pi

        return VowelDataset(features=scaled, labels=dataset.labels)


def check_counts(labels: tuple):
    """Raise an error unless all classes hold the same number of samples.

    Raises:
        DatasetError: Unknown label or unequal counts.
    """
    unknown = sorted(set(labels) - set(VOWELS))
    if unknown:
        raise DatasetError(
            f"Unknown labels {unknown}, must be among {', '.join(VOWELS)}"
        )
    values, counts = np.unique(np.asarray(labels), return_counts=True)
    count_table = {str(v): int(c) for v, c in zip(values, counts)}
    if len(set(count_table.values())) > 1:
        raise DatasetError(
            f"Classes must hold equal sample counts, got {count_table}",
            counts=count_table,
        )


def load_dataset(path) -> VowelDataset:
    """Load and validate a vowel dataset from a CSV file.

    Args:
        path: Path to the CSV file.

    Returns:
        Unnormalised dataset.

    Raises:
        FileNotFoundError: Path does not exist.
        DatasetError: Wrong column count, non-numeric features, unknown
            labels or unequal class counts.
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Dataset file not found: {path}")
    frame = pd.read_csv(path, header=None, dtype=str, skipinitialspace=True)
    column_count = frame.shape[1]
    if column_count != FEATURE_COUNT + 1:
        raise DatasetError(
            f"Expected {FEATURE_COUNT} feature columns and 1 label column, "
            f"got {column_count} columns in {path}",
            column_count=column_count,
        )

    # header row
    first_row = pd.to_numeric(frame.iloc[0, :FEATURE_COUNT], errors="coerce")
    if first_row.isna().any():
        frame = frame.iloc[1:]

    features = frame.iloc[:, :FEATURE_COUNT].apply(pd.to_numeric, errors="coerce")
    if features.isna().to_numpy().any():
        bad_rows = features.index[features.isna().any(axis=1)].tolist()
        raise DatasetError(f"Non-numeric features in rows {bad_rows[:5]} of {path}")
    labels = tuple(frame.iloc[:, FEATURE_COUNT].str.strip().str.lower())
    check_counts(labels)

    dataset = VowelDataset(features=features.to_numpy(dtype=np.float64), labels=labels)
    logger.info("Loaded %d samples in %d classes from %s", dataset.size, len(dataset.classes), path)

    return dataset


def synth_dataset(
    classes: int = 7,
    per_class: int = 37,
    dim: int = FEATURE_COUNT,
    separation: float = 3.0,
    seed: int = 0,
) -> VowelDataset:
    """Generate Gaussian class blobs as a stand-in for the vowel data.

    Class centroids are standard normal vectors scaled by
    ``separation``; samples add unit-variance noise.

    Raises:
        ValueError: Non-positive separation or class count outside 1..7.
    """
    if separation <= 0:
        raise ValueError(f"Separation must be positive, got {separation}")
    if not 1 <= classes <= len(VOWELS):
        raise ValueError(f"Class count must be in [1, {len(VOWELS)}], got {classes}")
    if per_class < 1:
        raise ValueError(f"per_class must be at least 1, got {per_class}")
    rng = np.random.default_rng(seed)
    centroids = separation * rng.standard_normal((classes, dim))
    features = np.repeat(centroids, per_class, axis=0) + rng.standard_normal(
        (classes * per_class, dim)
    )
    labels = tuple(label for label in VOWELS[:classes] for _ in range(per_class))

    return VowelDataset(features=features, labels=labels)


def split_dataset(dataset: VowelDataset, ratio: float = 0.7, seed: int = 0) -> tuple:
    """Split each class into train and test samples.

    Every class contributes floor((1 - ratio) * count) test samples and
    the remainder to training, so both sides keep equal class counts.

    Returns:
        tuple[VowelDataset, VowelDataset]: Train and test sets.

    Raises:
        ValueError: Ratio outside (0, 1).
        DatasetError: A class is too small to populate both sides.
    """
    if not 0 < ratio < 1:
        raise ValueError(f"Split ratio must be in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    labels = np.asarray(dataset.labels)
    train_indices, test_indices = [], []
    for label in dataset.classes:
        members = np.flatnonzero(labels == label)
        test_count = int(np.floor(round(len(members) * (1.0 - ratio), 9)))
        if test_count < 1 or test_count >= len(members):
            raise DatasetError(
                f"Class '{label}' with {len(members)} samples is too small "
                f"to split at ratio {ratio}",
                counts=dataset.get_counts(),
            )
        members = rng.permutation(members)
        test_indices.extend(members[:test_count])
        train_indices.extend(members[test_count:])

    return dataset.select(np.sort(train_indices)), dataset.select(np.sort(test_indices))


def write_dataset(dataset: VowelDataset, path):
    """Write a dataset in the loader schema."""
    dataset.to_frame().to_csv(path, index=False, float_format="%.17g")


def get_user_arguments() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Write a synthetic vowel dataset.")
    parser.add_argument(
        "-o", "--output", dest="output", type=pathlib.Path, required=True, metavar="<path>"
    )
    parser.add_argument("--per-class", dest="per_class", type=int, default=37, metavar="<int>")
    parser.add_argument("--separation", type=float, default=3.0, metavar="<float>")
    parser.add_argument("--seed", type=int, default=0, metavar="<int>")

    return parser.parse_args()


def main():
    args = get_user_arguments()
    dataset = synth_dataset(per_class=args.per_class, separation=args.separation, seed=args.seed)
    write_dataset(dataset, args.output)
    print(f"Wrote {dataset.size} samples to {args.output}")


if __name__ == "__main__":
    main()
