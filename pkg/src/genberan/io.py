"""CSV ingestion, dataset export and run configuration.

Output CSVs use a fixed format: comma delimiter, '.' decimal separator, LF
line endings and floats printed with 17 significant digits, so identical
floating-point results produce byte-identical files everywhere.
"""

from __future__ import annotations

import configparser
import csv
import io as _io
from dataclasses import dataclass, field

import numpy as np

from .curves import Dataset
from .errors import (ConfigError, EmptyAfterFiltering, MissingColumn,
                     NonNumericCell)

__all__ = [
    "DatasetSchema",
    "IngestionReport",
    "CovariateScaler",
    "load_csv",
    "save_dataset_csv",
    "write_rows",
    "format_float",
    "RunConfig",
    "MGUS2_SCHEMA",
]

_NA_TOKENS = {"", "na", "nan", "null", "none"}


def format_float(v) -> str:
    """Fixed 17-significant-digit representation ('.' decimal separator)."""
    return f"{float(v):.17g}"


def write_rows(path, header, rows):
    """Write a CSV with LF endings and the fixed numeric format."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                cell if isinstance(cell, str) else format_float(cell)
                for cell in row) + "\n")


@dataclass(frozen=True)
class DatasetSchema:
    """Column mapping for ingestion; exactly one of event/probability column."""

    time_column: str
    covariate_columns: tuple
    event_column: str | None = None
    probability_column: str | None = None
    na_policy: str = "drop_row"

    def __post_init__(self):
        if (self.event_column is None) == (self.probability_column is None):
            raise ValueError("exactly one of event_column / probability_column")
        names = [self.time_column, self.event_column or self.probability_column,
                 *self.covariate_columns]
        if len(set(names)) != len(names):
            raise ValueError("schema column names must be distinct")
        if not self.covariate_columns:
            raise ValueError("at least one covariate column required")
        if self.na_policy not in ("drop_row", "fail"):
            raise ValueError("na_policy must be 'drop_row' or 'fail'")


MGUS2_SCHEMA = DatasetSchema(
    time_column="futime",
    event_column="death",
    covariate_columns=("age", "creat", "hgb", "mspike"),
)


@dataclass(frozen=True)
class CovariateScaler:
    """Per-covariate min-max transform to [0, 1]; identity when the data
    already live there (so synthetic unit-cube samples pass through)."""

    mins: np.ndarray
    maxs: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "CovariateScaler":
        lo, hi = x.min(axis=0), x.max(axis=0)
        inside = (lo >= 0.0) & (hi <= 1.0)
        lo = np.where(inside, 0.0, lo)
        hi = np.where(inside, 1.0, hi)
        return cls(lo, hi)

    def transform(self, x: np.ndarray) -> np.ndarray:
        span = self.maxs - self.mins
        span = np.where(span > 0, span, 1.0)
        return (x - self.mins) / span

    def inverse(self, x: np.ndarray) -> np.ndarray:
        span = self.maxs - self.mins
        span = np.where(span > 0, span, 1.0)
        return x * span + self.mins


@dataclass(frozen=True)
class IngestionReport:
    loaded: int
    dropped: int
    scaler: CovariateScaler


def load_csv(path, schema: DatasetSchema):
    """Read a delimited file into a Dataset, min-max scaling covariates.

    Returns ``(dataset, report)``. Missing values follow the schema's NA
    policy; a non-numeric cell is reported with its row and column.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{path}: empty file, header row required")
        header = [c.strip() for c in header]
        cols = [schema.time_column,
                schema.event_column or schema.probability_column,
                *schema.covariate_columns]
        try:
            idx = [header.index(c) for c in cols]
        except ValueError as exc:
            missing = [c for c in cols if c not in header]
            raise MissingColumn(f"{path}: missing column(s) {missing}") from exc

        rows, dropped = [], 0
        for rownum, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            cells = [rec[i].strip() if i < len(rec) else "" for i in idx]
            if any(c.lower() in _NA_TOKENS for c in cells):
                if schema.na_policy == "fail":
                    bad = cols[[c.lower() in _NA_TOKENS for c in cells].index(True)]
                    raise NonNumericCell(f"{path}:{rownum}: missing value in {bad!r}")
                dropped += 1
                continue
            parsed = []
            for name, cell in zip(cols, cells):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise NonNumericCell(
                        f"{path}:{rownum}: non-numeric value {cell!r} in column {name!r}")
            rows.append(parsed)

    if not rows:
        raise EmptyAfterFiltering(f"{path}: no usable rows after NA filtering")
    arr = np.asarray(rows, dtype=float)
    t = arr[:, 0]
    ind = arr[:, 1]
    x = arr[:, 2:]
    scaler = CovariateScaler.fit(x)
    hard = schema.event_column is not None
    if hard and not np.all((ind == 0) | (ind == 1)):
        raise NonNumericCell(
            f"{path}: event column {schema.event_column!r} must be binary")
    ds = Dataset(t, scaler.transform(x), ind, hard=hard)
    return ds, IngestionReport(loaded=len(rows), dropped=dropped, scaler=scaler)


def save_dataset_csv(dataset: Dataset, path, scaler: CovariateScaler | None = None):
    """Export a dataset with columns t, event|prob, x1..xp. When a scaler is
    given the covariates are written back on their original scale."""
    x = dataset.x if scaler is None else scaler.inverse(dataset.x)
    header = ["t", "event" if dataset.hard else "prob",
              *[f"x{i + 1}" for i in range(dataset.p)]]
    rows = [[dataset.t[i], dataset.indicator[i], *x[i]] for i in range(dataset.n)]
    write_rows(path, header, rows)


# known configuration surface: section -> key -> parser
_CONFIG_SCHEMA = {
    "run": {"seed": int, "out_dir": str, "threads": int},
    "simulate": {"model": str, "n": int, "reps": int},
    "study": {"model": str, "n": int, "reps": int, "variants": str,
              "regime": str, "x_test": str, "grid_size": int},
    "bandwidth": {"grid": str, "nw_bandwidth": float},
    "classifier": {"variant": str, "epochs": int, "learning_rate": float,
                   "batch_size": int, "l2_penalty": float},
    "real_data": {"splits": int, "train_ratio": float, "grid_size": int},
}

_DEFAULTS = {
    "run": {"seed": 0, "out_dir": "out", "threads": 1},
    "simulate": {"model": "exponential", "n": 2000, "reps": 1},
    "study": {"model": "exponential", "n": 500, "reps": 50,
              "variants": "beran,gbe-oracle", "regime": "observed",
              "x_test": "0.3,0.5,0.7", "grid_size": 100},
    "bandwidth": {"grid": "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
                  "nw_bandwidth": 0.3},
    "classifier": {"variant": "logistic", "epochs": 200, "learning_rate": 0.001,
                   "batch_size": 128, "l2_penalty": 0.0},
    "real_data": {"splits": 10, "train_ratio": 0.5, "grid_size": 100},
}


@dataclass
class RunConfig:
    """Flat sectioned key-value configuration; unknown keys are errors and
    parse -> serialize -> parse is the identity."""

    values: dict = field(default_factory=lambda: {
        s: dict(kv) for s, kv in _DEFAULTS.items()})

    def get(self, section: str, key: str):
        return self.values[section][key]

    def set(self, section: str, key: str, value):
        if section not in _CONFIG_SCHEMA or key not in _CONFIG_SCHEMA[section]:
            raise ConfigError(f"unknown configuration key [{section}] {key}")
        self.values[section][key] = _CONFIG_SCHEMA[section][key](value)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.read_string(text)
        cfg = cls()
        for section in parser.sections():
            if section not in _CONFIG_SCHEMA:
                raise ConfigError(f"unknown configuration section [{section}]")
            for key, raw in parser.items(section):
                if key not in _CONFIG_SCHEMA[section]:
                    raise ConfigError(f"unknown configuration key [{section}] {key}")
                try:
                    cfg.values[section][key] = _CONFIG_SCHEMA[section][key](raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def to_text(self) -> str:
        buf = _io.StringIO()
        for section in _CONFIG_SCHEMA:
            buf.write(f"[{section}]\n")
            for key in _CONFIG_SCHEMA[section]:
                v = self.values[section][key]
                buf.write(f"{key} = {v}\n")
            buf.write("\n")
        return buf.getvalue()

    def to_file(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    def grid_values(self) -> np.ndarray:
        return np.array([float(v) for v in
                         str(self.get("bandwidth", "grid")).split(",")])

    def x_test_points(self):
        raw = str(self.get("study", "x_test"))
        pts = []
        for chunk in raw.split(";") if ";" in raw else [raw]:
            vals = [float(v) for v in chunk.split(",")]
            pts.append(vals[0] if len(vals) == 1 else tuple(vals))
        if ";" not in raw and len(pts) == 1 and isinstance(pts[0], tuple):
            # "0.3,0.5,0.7" is three scalar test points for the 1-D model
            pts = list(pts[0])
        return pts
