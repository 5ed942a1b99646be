"""Labelled square-matrix CSV shared by bigram and confusion matrices.

Layout: UTF-8, LF line endings, ``.`` decimal separator.  The first row is an
empty cell followed by column labels; every following row is a row label and
its values.  Floats are written with ``repr`` which round-trips exactly.
"""
from __future__ import annotations

import csv
import io
import math

import numpy as np


class MatrixCSVError(ValueError):
    """Malformed matrix file; the message names the file, row and column."""


def write_matrix_csv(path, labels, values) -> None:
    values = np.asarray(values, dtype=np.float64)
    labels = [str(x) for x in labels]
    if values.shape != (len(labels), len(labels)):
        raise ValueError("values must be a square matrix matching the labels")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + labels)
    for lab, row in zip(labels, values):
        w.writerow([lab] + [repr(float(v)) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_matrix_csv(path):
    """Return ``(labels, values)``; rows in the file must mirror the header."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise MatrixCSVError(f"{path}: empty file")
    header = rows[0]
    if not header or header[0] != "":
        raise MatrixCSVError(f"{path}: row 1, column 1: header must start with an empty cell")
    labels = header[1:]
    if not labels:
        raise MatrixCSVError(f"{path}: row 1: no column labels")
    seen = {}
    for c, lab in enumerate(labels, start=2):
        if lab in seen:
            raise MatrixCSVError(f"{path}: row 1, column {c}: duplicate label {lab!r} (first at column {seen[lab]})")
        seen[lab] = c
    n = len(labels)
    if len(rows) - 1 != n:
        raise MatrixCSVError(f"{path}: expected {n} data rows, found {len(rows) - 1}")
    values = np.empty((n, n))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise MatrixCSVError(f"{path}: row {r}: expected {n + 1} cells, found {len(row)}")
        if row[0] != labels[r - 2]:
            raise MatrixCSVError(f"{path}: row {r}, column 1: row label {row[0]!r} does not match column label {labels[r - 2]!r}")
        for c, cell in enumerate(row[1:], start=2):
            try:
                v = float(cell)
            except ValueError:
                raise MatrixCSVError(f"{path}: row {r}, column {c}: non-numeric cell {cell!r}") from None
            if not math.isfinite(v):
                raise MatrixCSVError(f"{path}: row {r}, column {c}: non-finite value {cell!r}")
            if v < 0:
                raise MatrixCSVError(f"{path}: row {r}, column {c}: negative value {v}")
            values[r - 2, c - 2] = v
    return labels, values
