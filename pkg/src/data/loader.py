# src/data/loader.py
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import (
    DataIoError,
    DataParseError,
    DegenerateColumnError,
    HeaderError,
    MissingColumnError,
    TooFewRowsError,
)

logger = logging.getLogger(__name__)

DEFAULT_MISSING_MARKERS = ("", "NA", "NaN")


@dataclass(frozen=True)
class LoadOptions:
    """CSV options. Listwise deletion is the only missing-data policy."""

    delimiter: str = ","
    missing_markers: Tuple[str, ...] = DEFAULT_MISSING_MARKERS
    policy: str = "listwise"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Complete-case numeric table."""

    columns: Tuple[str, ...]
    values: np.ndarray
    rows_dropped: int = 0
    source: Optional[str] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise ValueError("values must be an n x p matrix matching columns")
        if len(set(self.columns)) != len(self.columns):
            raise HeaderError("duplicate column names")
        if not np.all(np.isfinite(values)):
            raise ValueError("dataset contains non-finite values")
        if values.shape[0] < 3:
            raise TooFewRowsError(values.shape[0])
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        """Number of complete rows."""
        return self.values.shape[0]

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, source=None, rows_dropped=0) -> "Dataset":
        """Build a dataset from an all-numeric data frame."""
        return cls(
            columns=tuple(str(c) for c in frame.columns),
            values=frame.to_numpy(dtype=float),
            rows_dropped=rows_dropped,
            source=source,
        )

    def column(self, name: str) -> np.ndarray:
        """Values of one named column."""
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise MissingColumnError(name) from None

    def select(self, names: Sequence[str]) -> np.ndarray:
        """n x k matrix of the named columns, in the given order."""
        idx = []
        for name in names:
            if name not in self.columns:
                raise MissingColumnError(name)
            idx.append(self.columns.index(name))
        return self.values[:, idx]

    def take(self, rows: np.ndarray) -> "Dataset":
        """Dataset made of the given rows, e.g. a bootstrap resample."""
        return Dataset(self.columns, self.values[rows], source=self.source)


@dataclass(frozen=True, eq=False)
class SampleMoments:
    """Means and unbiased (n - 1) covariance matrix of a dataset."""

    columns: Tuple[str, ...]
    means: np.ndarray
    cov: np.ndarray
    n: int
    degenerate: Tuple[str, ...] = field(default=())

    def subset(self, names: Sequence[str]) -> "SampleMoments":
        """Moments restricted to and reordered by the named columns."""
        idx = []
        for name in names:
            if name not in self.columns:
                raise MissingColumnError(name)
            idx.append(self.columns.index(name))
        return SampleMoments(
            columns=tuple(names),
            means=self.means[idx],
            cov=self.cov[np.ix_(idx, idx)],
            n=self.n,
            degenerate=tuple(c for c in self.degenerate if c in names),
        )

    @property
    def correlation(self) -> np.ndarray:
        """Correlation matrix; NaN where a variance is zero."""
        sd = np.sqrt(np.diag(self.cov))
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.cov / np.outer(sd, sd)


def _check_header(columns: List[str]):
    seen = set()
    for i, name in enumerate(columns, start=1):
        name = name.strip()
        if not name:
            raise HeaderError(f"empty column name at position {i}")
        if name in seen:
            raise HeaderError(f"duplicate column name '{name}'")
        seen.add(name)


def load_csv(path, options: Optional[LoadOptions] = None) -> Dataset:
    """Load a numeric CSV file with a mandatory header row.

    Rows holding a missing marker are dropped (listwise deletion). Any other
    non-numeric cell raises DataParseError with 1-based data row and column.
    """
    options = options or LoadOptions()
    if options.policy != "listwise":
        raise ValueError(f"unsupported missing-data policy {options.policy!r}")
    try:
        # header=None keeps duplicate names as written; pandas would rename them "x.1"
        raw = pd.read_csv(
            path,
            sep=options.delimiter,
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8-sig",
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as e:
        raise HeaderError(f"{path}: no header row") from e
    except (OSError, UnicodeDecodeError) as e:
        raise DataIoError(f"cannot read {path}: {e}") from e
    except pd.errors.ParserError as e:
        raise DataIoError(f"malformed CSV {path}: {e}") from e

    header = [h.strip() if isinstance(h, str) else "" for h in raw.iloc[0].tolist()]
    _check_header(header)
    frame = raw.iloc[1:].reset_index(drop=True)
    frame.columns = header

    markers = set(options.missing_markers)
    keep = np.ones(len(frame), dtype=bool)
    values = np.empty(frame.shape, dtype=float)
    for j, name in enumerate(frame.columns):
        for i, token in enumerate(frame[name].tolist()):
            # short rows come back as NaN rather than ""
            token = token.strip() if isinstance(token, str) else ""
            if token in markers:
                keep[i] = False
                values[i, j] = np.nan
                continue
            try:
                value = float(token)
            except ValueError:
                raise DataParseError(i + 1, j + 1, token) from None
            if not np.isfinite(value):
                raise DataParseError(i + 1, j + 1, token)
            values[i, j] = value

    dropped = int((~keep).sum())
    clean = values[keep]
    if clean.shape[0] < 3:
        raise TooFewRowsError(clean.shape[0])
    if dropped:
        logger.warning(f"Dropped {dropped} row(s) with missing values from {path}")
    logger.info(f"Loaded {path}: {clean.shape[0]} rows x {clean.shape[1]} columns")
    return Dataset(tuple(frame.columns), clean, rows_dropped=dropped, source=str(path))


def compute_moments(data: Dataset, strict: bool = False) -> SampleMoments:
    """Two-pass means and unbiased covariance; flags zero-variance columns."""
    x = data.values
    means = x.mean(axis=0)
    dev = x - means
    cov = dev.T @ dev / (data.n - 1)
    cov = (cov + cov.T) / 2.0
    degenerate = tuple(name for name, v in zip(data.columns, np.diag(cov)) if v == 0.0)
    for name in degenerate:
        if strict:
            raise DegenerateColumnError(name)
        logger.warning(f"Column '{name}' has zero variance")
    return SampleMoments(
        columns=data.columns, means=means, cov=cov, n=data.n, degenerate=degenerate
    )


def dataset_from_columns(columns: Iterable[str], *arrays) -> Dataset:
    """Build a Dataset from equal-length 1-d arrays."""
    return Dataset(tuple(columns), np.column_stack([np.asarray(a, float) for a in arrays]))
