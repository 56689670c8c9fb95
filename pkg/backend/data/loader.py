"""Dataset ingestion: CSV -> one-hot encoding -> z-score normalization."""
import csv
import logging
import os
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

ColumnKind = Literal["numeric", "categorical"]


class DatasetError(ValueError):
    """Exception raised when a dataset file does not match its schema."""


@dataclass(frozen=True)
class CsvSchema:
    target: str
    categorical: Tuple[str, ...] = ()
    # Expected header; checked verbatim when given.
    columns: Optional[Tuple[str, ...]] = None

    def kind_of(self, column: str) -> ColumnKind:
        return "categorical" if column in self.categorical else "numeric"


@dataclass(frozen=True, eq=False)
class RawDataset:
    frame: pd.DataFrame
    columns: Tuple[Tuple[str, ColumnKind], ...]
    target_column: str

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    @property
    def feature_columns(self) -> List[Tuple[str, ColumnKind]]:
        return [(name, kind) for name, kind in self.columns if name != self.target_column]


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: Tuple[str, ...]
    name: str = "dataset"
    # column name -> indicator columns it expanded into
    categorical_blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def to_frame(self, target: str = "y") -> pd.DataFrame:
        frame = pd.DataFrame(self.X, columns=list(self.feature_names))
        frame[target] = self.y
        return frame


def load_csv(path: str, schema: CsvSchema) -> RawDataset:
    if not os.path.isfile(path):
        raise DatasetError(f"Dataset file not found: {path}")
    if os.path.getsize(path) == 0:
        raise DatasetError(f"Dataset file is empty: {path}")

    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            encoding="utf-8",
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"Dataset file is empty: {path}") from e
    except pd.errors.ParserError as e:
        raise DatasetError(f"Malformed CSV {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DatasetError(f"Dataset file {path} is not valid UTF-8: {e}") from e

    header = [c.strip() for c in frame.columns]
    frame.columns = header
    if schema.columns is not None and tuple(header) != tuple(schema.columns):
        raise DatasetError(
            f"Header of {path} does not match schema: expected {list(schema.columns)}, got {header}"
        )
    if schema.target not in header:
        raise DatasetError(f"Target column '{schema.target}' missing from {path}")
    if schema.target in schema.categorical:
        raise DatasetError(f"Target column '{schema.target}' must be numeric")
    unknown = [c for c in schema.categorical if c not in header]
    if unknown:
        raise DatasetError(f"Categorical columns {unknown} missing from {path}")
    if len(frame) == 0:
        raise DatasetError(f"Dataset file has no data rows: {path}")
    if len(frame) < 2:
        raise DatasetError(f"Dataset {path} needs at least 2 rows, found {len(frame)}")

    parsed = {}
    for column in header:
        values = frame[column].fillna("").str.strip()
        # header is line 1, first data row is line 2
        for offset, value in enumerate(values):
            if value == "":
                raise DatasetError(f"Missing value at row {offset + 2}, column '{column}' in {path}")
            if '"' in value:
                raise DatasetError(
                    f"Quoted field at row {offset + 2}, column '{column}' in {path}; quoting is not supported"
                )
        if schema.kind_of(column) == "categorical":
            parsed[column] = values
            continue
        numeric = pd.to_numeric(values, errors="coerce")
        bad = ~np.isfinite(numeric.to_numpy(dtype=float))
        if bad.any():
            offset = int(np.flatnonzero(bad)[0])
            raise DatasetError(
                f"Unparseable numeric value '{values.iloc[offset]}' at row {offset + 2}, column '{column}' in {path}"
            )
        parsed[column] = numeric.astype(float)

    columns = tuple((name, schema.kind_of(name)) for name in header)
    return RawDataset(frame=pd.DataFrame(parsed, columns=header), columns=columns, target_column=schema.target)


def one_hot_encode(raw: RawDataset) -> Tuple[np.ndarray, List[str], dict]:
    """
    Expand categorical columns into indicator blocks.

    Levels are ordered by first appearance. Returns the feature matrix, its
    column names and a map from categorical column to its indicator names.
    """
    blocks = []
    names: List[str] = []
    categorical_blocks = {}
    for column, kind in raw.feature_columns:
        values = raw.frame[column]
        if kind == "numeric":
            blocks.append(values.to_numpy(dtype=float)[:, None])
            names.append(column)
            continue

        levels = list(dict.fromkeys(values.tolist()))
        if len(levels) == 1:
            logging.warning("Categorical column '%s' has a single level '%s'", column, levels[0])
        codes = values.map({level: i for i, level in enumerate(levels)}).to_numpy(dtype=int)
        indicators = np.eye(len(levels))[codes]
        level_names = [f"{column}={level}" for level in levels]
        blocks.append(indicators)
        names.extend(level_names)
        categorical_blocks[column] = level_names

    if not blocks:
        raise DatasetError("Dataset has no feature columns")
    return np.hstack(blocks), names, categorical_blocks


def zscore_normalize(
    matrix: np.ndarray,
    y: np.ndarray,
    feature_names: Optional[Sequence[str]] = None,
    name: str = "dataset",
    categorical_blocks: Optional[dict] = None,
) -> Dataset:
    matrix = np.asarray(matrix, dtype=float)
    y = np.asarray(y, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise DatasetError("Normalization needs a 2-D matrix with at least 2 rows")
    if y.shape != (matrix.shape[0],):
        raise DatasetError(f"Target length {y.shape} does not match {matrix.shape[0]} rows")

    X = np.zeros_like(matrix)
    varying = np.ptp(matrix, axis=0) > 0
    if varying.any():
        sub = matrix[:, varying]
        X[:, varying] = (sub - sub.mean(axis=0)) / sub.std(axis=0, ddof=1)

    if feature_names is None:
        feature_names = [f"x{i}" for i in range(matrix.shape[1])]
    n, d = X.shape
    if n < d + 1:
        raise DatasetError(f"Dataset '{name}' has N={n} samples for d={d} features; need N >= d+1")
    return Dataset(
        X=X,
        y=y.copy(),
        feature_names=tuple(feature_names),
        name=name,
        categorical_blocks=dict(categorical_blocks or {}),
    )


def load_dataset(path: str, schema: CsvSchema, name: str = "dataset") -> Dataset:
    raw = load_csv(path, schema)
    matrix, names, blocks = one_hot_encode(raw)
    y = raw.frame[raw.target_column].to_numpy(dtype=float)
    dataset = zscore_normalize(matrix, y, names, name=name, categorical_blocks=blocks)
    logging.info("Loaded dataset '%s': N=%d, d=%d", name, dataset.N, dataset.d)
    return dataset
