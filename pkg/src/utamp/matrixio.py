"""Plain-text storage for matrices and vectors.

Layout: a header line ``M N real`` or ``M N complex`` followed by M data
rows.  Real entries are single floats; complex entries are written as
``re im`` pairs, so a complex row carries 2N numbers.  Vectors are stored
as single-column matrices.
"""

from __future__ import annotations

import numpy as np

__all__ = ["load_matrix", "save_matrix", "load_vector", "save_vector"]


def save_matrix(path, a) -> None:
    """Write a 2-D array to ``path`` in the text format above."""
    a = np.atleast_2d(np.asarray(a))
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {a.shape}")
    m, n = a.shape
    kind = "complex" if np.iscomplexobj(a) else "real"
    with open(path, "w") as fh:
        fh.write(f"{m} {n} {kind}\n")
        for row in a:
            if kind == "complex":
                parts = [f"{z.real:.17g} {z.imag:.17g}" for z in row]
            else:
                parts = [f"{float(v):.17g}" for v in row]
            fh.write(" ".join(parts) + "\n")


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix`.

    Raises ValueError with the offending line number on any malformed
    header or row.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    stripped = [(i + 1, ln.strip()) for i, ln in enumerate(lines)]
    rows = [(no, ln) for no, ln in stripped if ln]
    if not rows:
        raise ValueError(f"{path}: line 1: empty file, expected 'M N real|complex' header")

    head_no, head = rows[0]
    fields = head.split()
    if len(fields) != 3 or fields[2] not in ("real", "complex"):
        raise ValueError(f"{path}: line {head_no}: bad header {head!r}, expected 'M N real|complex'")
    try:
        m, n = int(fields[0]), int(fields[1])
    except ValueError:
        raise ValueError(f"{path}: line {head_no}: bad header {head!r}, M and N must be integers") from None
    if m < 1 or n < 1:
        raise ValueError(f"{path}: line {head_no}: dimensions must be positive, got {m} x {n}")

    body = rows[1:]
    if len(body) != m:
        raise ValueError(f"{path}: expected {m} data rows, found {len(body)}")

    is_complex = fields[2] == "complex"
    per_row = 2 * n if is_complex else n
    out = np.zeros((m, n), dtype=complex if is_complex else float)
    for r, (no, ln) in enumerate(body):
        toks = ln.split()
        if len(toks) != per_row:
            raise ValueError(f"{path}: line {no}: expected {per_row} numbers, found {len(toks)}")
        try:
            vals = [float(t) for t in toks]
        except ValueError as exc:
            raise ValueError(f"{path}: line {no}: {exc}") from None
        if is_complex:
            out[r] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
        else:
            out[r] = vals
    return out


def save_vector(path, v) -> None:
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D array, got shape {v.shape}")
    save_matrix(path, v[:, None])


def load_vector(path) -> np.ndarray:
    a = load_matrix(path)
    if a.shape[1] != 1:
        raise ValueError(f"{path}: expected a single-column vector file, got shape {a.shape}")
    return a[:, 0]
