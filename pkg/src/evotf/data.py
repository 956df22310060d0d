"""UCI dataset ingestion, min-max scaling and stratified k-fold planning.

Supported file layouts (comma separated, no header):

``iris``  4 features followed by the species name
          (``Iris-setosa`` -> 0, ``Iris-versicolor`` -> 1, ``Iris-virginica`` -> 2).
``wdbc``  sample id, diagnosis (``B`` -> 0, ``M`` -> 1), 30 features.
``wine``  cultivar (1, 2, 3 -> 0, 1, 2) followed by 13 features.
"""

from __future__ import annotations

import csv
import logging
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

SCHEMAS = ("iris", "wdbc", "wine")

FILENAMES = {"iris": "iris.data", "wdbc": "wdbc.data", "wine": "wine.data"}

UCI_URLS = {
    "iris": "https://archive.ics.uci.edu/ml/machine-learning-databases/iris/iris.data",
    "wdbc": "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/wdbc.data",
    "wine": "https://archive.ics.uci.edu/ml/machine-learning-databases/wine/wine.data",
}

# name -> (n_samples, n_features, n_classes) of the canonical UCI files
CANONICAL_SHAPES = {"iris": (150, 4, 3), "wdbc": (569, 30, 2), "wine": (178, 13, 3)}

IRIS_LABELS = {"Iris-setosa": 0, "Iris-versicolor": 1, "Iris-virginica": 2}
WDBC_LABELS = {"B": 0, "M": 1}
WINE_LABELS = {"1": 0, "2": 1, "3": 2}


class DatasetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise DatasetError(f"{self.name}: features {features.shape} do not match labels {labels.shape}")
        if not np.all(np.isfinite(features)):
            raise DatasetError(f"{self.name}: missing or non-finite feature values")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise DatasetError(f"{self.name}: labels outside [0, {self.class_count})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.name, self.features[idx], self.labels[idx], self.class_count)

    def one_hot(self) -> np.ndarray:
        return np.eye(self.class_count)[self.labels]


def _parse_row(schema, row, lineno, path):
    if schema == "iris":
        expected, label_raw, values, mapping = 5, row[-1], row[:-1], IRIS_LABELS
    elif schema == "wdbc":
        expected, label_raw, values, mapping = 32, row[1], row[2:], WDBC_LABELS
    else:
        expected, label_raw, values, mapping = 14, row[0], row[1:], WINE_LABELS
    if len(row) != expected:
        raise DatasetError(f"{path}:{lineno}: expected {expected} columns for {schema}, got {len(row)}")
    label = mapping.get(label_raw.strip())
    if label is None:
        raise DatasetError(f"{path}:{lineno}: unknown {schema} label {label_raw!r}")
    try:
        feats = [float(v) for v in values]
    except ValueError as exc:
        raise DatasetError(f"{path}:{lineno}: {exc}") from None
    return feats, label


def load_csv(path, schema: str) -> Dataset:
    """Read a UCI-layout CSV file; blank lines are skipped.

    Raises:
        DatasetError: on a parse failure, wrong column count, unknown label
            or an empty file. Messages carry the offending line number.
    """
    if schema not in SCHEMAS:
        raise DatasetError(f"unknown schema {schema!r} (expected one of {', '.join(SCHEMAS)})")
    path = Path(path)
    features, labels = [], []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            feats, label = _parse_row(schema, [c.strip() for c in row], lineno, path)
            features.append(feats)
            labels.append(label)
    if not features:
        raise DatasetError(f"{path}: no samples")
    n_features = CANONICAL_SHAPES[schema][1]
    n_classes = CANONICAL_SHAPES[schema][2]
    return Dataset(schema, np.array(features).reshape(-1, n_features), np.array(labels), n_classes)


def default_data_dir() -> Path:
    return Path("data")


def load_dataset(name: str, data_dir=None) -> Dataset:
    data_dir = Path(data_dir) if data_dir is not None else default_data_dir()
    path = data_dir / FILENAMES[name]
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run `evotf fetch --data-dir {data_dir}` first")
    return load_csv(path, name)


# -- scaling --------------------------------------------------------------------


def fit_minmax(features: np.ndarray):
    """Per-feature ``(minimum, span)``; constant features get ``span = 0``."""
    lo = features.min(axis=0)
    return lo, features.max(axis=0) - lo


def apply_minmax(features: np.ndarray, scaling) -> np.ndarray:
    """Scale with a fitted ``(minimum, span)``; zero-span features map to 0."""
    lo, span = scaling
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (features - lo) / safe, 0.0)


def normalize(ds: Dataset, scaling=None) -> Dataset:
    """Min-max scale every feature to [0, 1].

    With ``scaling`` (from :func:`fit_minmax` on a training fold) the
    given statistics are applied instead, so held-out values may fall
    outside [0, 1].
    """
    if scaling is None:
        scaling = fit_minmax(ds.features)
    return Dataset(ds.name, apply_minmax(ds.features, scaling), ds.labels, ds.class_count)


# -- cross-validation -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray

    def train_test(self, fold: int):
        """Index arrays ``(train, test)`` for one fold."""
        if not 0 <= fold < self.k:
            raise IndexError(f"fold {fold} outside [0, {self.k})")
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test

    def __eq__(self, other):
        if not isinstance(other, FoldPlan):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assignments, other.assignments)

    __hash__ = None


def stratified_folds(ds: Dataset, k: int = 10, seed=0) -> FoldPlan:
    """Shuffle each class with the seeded RNG and deal it round-robin into ``k`` folds.

    The dealing position carries over from one class to the next, which
    keeps total fold sizes within one sample of each other as well.

    Raises:
        DatasetError: if some class has fewer than ``k`` samples.
    """
    rng = np.random.Generator(np.random.MT19937(seed))
    assignments = np.full(ds.n_samples, -1, dtype=np.int64)
    offset = 0
    for cls in range(ds.class_count):
        members = np.flatnonzero(ds.labels == cls)
        if members.size < k:
            raise DatasetError(f"{ds.name}: class {cls} has {members.size} samples, fewer than k={k}")
        members = rng.permutation(members)
        assignments[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return FoldPlan(k, assignments)


# -- fetching -------------------------------------------------------------------


def _write_from_sklearn(name: str, path: Path) -> None:
    from sklearn import datasets as skd

    if name == "iris":
        bunch = skd.load_iris()
        names = {v: k for k, v in IRIS_LABELS.items()}
        rows = [[*map(repr, map(float, x)), names[int(y)]] for x, y in zip(bunch.data, bunch.target)]
    elif name == "wdbc":
        # scikit-learn codes malignant as 0; the UCI file has no such coding.
        # Its copy also lacks sample ids, so row numbers stand in for them.
        bunch = skd.load_breast_cancer()
        rows = [[str(i + 1), "M" if int(y) == 0 else "B", *map(repr, map(float, x))] for i, (x, y) in enumerate(zip(bunch.data, bunch.target))]
    else:
        bunch = skd.load_wine()
        rows = [[str(int(y) + 1), *map(repr, map(float, x))] for x, y in zip(bunch.data, bunch.target)]
    with path.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def fetch(names=SCHEMAS, data_dir=None, allow_fallback: bool = True, timeout: float = 30.0) -> dict:
    """Download the UCI files into ``data_dir``; existing files are kept.

    When the archive is unreachable and ``allow_fallback`` is set, the
    copies bundled with scikit-learn are rewritten in UCI layout instead.
    Returns ``{name: source}`` with source ``cached``, ``uci`` or ``sklearn``.
    """
    data_dir = Path(data_dir) if data_dir is not None else default_data_dir()
    data_dir.mkdir(parents=True, exist_ok=True)
    sources = {}
    for name in names:
        path = data_dir / FILENAMES[name]
        if path.exists():
            sources[name] = "cached"
            continue
        try:
            with urllib.request.urlopen(UCI_URLS[name], timeout=timeout) as resp:
                path.write_bytes(resp.read())
            sources[name] = "uci"
        except OSError as exc:
            if not allow_fallback:
                raise
            log.warning("download of %s failed (%s); using scikit-learn copy", name, exc)
            _write_from_sklearn(name, path)
            sources[name] = "sklearn"
        ds = load_csv(path, name)
        expected = CANONICAL_SHAPES[name]
        if (ds.n_samples, ds.n_features, ds.class_count) != expected:
            raise DatasetError(f"{path}: shape {(ds.n_samples, ds.n_features)} differs from canonical {expected[:2]}")
    return sources
