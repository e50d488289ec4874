"""Dataset CSV files and flat key=value config files.

Datasets are CSV with header ``x1,...,xD[,weight][,m]``; the ``weight``
column holds importance weights, the optional ``m`` column the modifier
values (their product with the weights must be 1 within 1e-9).  Floats
are serialized with 17 significant digits, which round-trips IEEE
doubles exactly: parse(serialize(S)) == S bit for bit.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import InputError
from .samples import SampleSet


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def write_samples(path, samples: SampleSet) -> None:
    path = Path(path)
    header = [f"x{i + 1}" for i in range(samples.dim)]
    columns = [samples.points[:, i] for i in range(samples.dim)]
    if samples.weights is not None:
        header.append("weight")
        columns.append(samples.weights)
    if samples.modifiers is not None:
        header.append("m")
        columns.append(samples.modifiers)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([format_float(v) for v in row])


def read_samples(path) -> SampleSet:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    dim = 0
    while dim < len(header) and header[dim] == f"x{dim + 1}":
        dim += 1
    if dim == 0:
        raise InputError(f"{path}: header must start with x1,...,xD")
    extras = header[dim:]
    if extras not in ([], ["weight"], ["m"], ["weight", "m"]):
        raise InputError(
            f"{path}: trailing columns must be [weight][,m], got {extras}"
        )
    if not rows:
        raise InputError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric cell ({exc})") from None
    if data.shape[1] != len(header):
        raise InputError(f"{path}: ragged rows")
    weights = data[:, dim + extras.index("weight")] if "weight" in extras else None
    modifiers = data[:, dim + extras.index("m")] if "m" in extras else None
    return SampleSet(data[:, :dim], weights=weights, modifiers=modifiers)


def write_table(path, header, rows) -> None:
    """Generic CSV writer; floats get the 17-digit treatment."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    format_float(v) if isinstance(v, float) else v
                    for v in row
                ]
            )


def read_config(path) -> dict[str, str]:
    """Flat key=value file; blank lines and '#' comments are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
