"""CSV ingestion and JSON report serialisation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .core import Design, DesignProvenance, Sample

REPORT_SCHEMA = "epsobol.report/1"
SELECTION_SCHEMA = "epsobol.selection/1"
BENCH_SCHEMA = "epsobol.bench/1"


class ColumnError(KeyError):
    pass


class DataError(ValueError):
    pass


def read_table(path, delimiter: str = ",") -> pd.DataFrame:
    try:
        return pd.read_csv(path, sep=delimiter)
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc


def load_sample(
    path,
    response: str,
    inputs: Sequence[str] | None = None,
    delimiter: str = ",",
    drop_missing: bool = False,
) -> tuple[Sample, int]:
    """Read ``response`` and ``inputs`` columns from a delimited file.

    Returns the sample and the number of dropped rows. Rows with missing
    values are an error unless ``drop_missing`` is set.
    """
    df = read_table(path, delimiter)
    if inputs is None:
        inputs = [c for c in df.columns if c != response]
    cols = [response, *inputs]
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise ColumnError(f"columns not found in {path}: {', '.join(missing)}")
    if len(set(cols)) != len(cols):
        raise ColumnError("response and input columns must be distinct")
    sub = df[cols]
    for c in cols:
        converted = pd.to_numeric(sub[c], errors="coerce")
        bad = converted.isna() & sub[c].notna()
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataError(f"non-numeric value {sub[c].iloc[row]!r} in column {c!r} (row {row + 1})")
        sub = sub.assign(**{c: converted})
    values = sub.to_numpy(dtype=float)
    bad_rows = ~np.isfinite(values).all(axis=1)
    dropped = int(bad_rows.sum())
    if dropped and not drop_missing:
        row = int(np.flatnonzero(bad_rows)[0])
        raise DataError(f"missing or non-finite value in row {row + 1}; use --drop-missing to skip such rows")
    values = values[~bad_rows]
    if values.shape[0] < 2:
        raise DataError("at least two complete rows are required")
    return Sample(values[:, 0], values[:, 1:], tuple(inputs)), dropped


def load_design(path, columns: Sequence[str], delimiter: str = ",") -> Design:
    df = read_table(path, delimiter)
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ColumnError(f"design file lacks columns: {', '.join(missing)}")
    try:
        pts = df[list(columns)].to_numpy(dtype=float)
    except ValueError as exc:
        raise DataError(f"non-numeric design value: {exc}") from exc
    if not np.isfinite(pts).all():
        raise DataError("design file contains missing or non-finite values")
    return Design(pts, DesignProvenance.USER, meta={"path": str(path)})


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
