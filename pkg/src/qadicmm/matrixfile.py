"""Plain-text matrix files.

Format: a header line ``M p rows cols`` followed by ``rows*cols``
whitespace-separated residues in row-major order.
"""

from __future__ import annotations

import numpy as np

from .fieldcore import PrimeModulus


class MatrixFormatError(ValueError):
    pass


def parse_matrix(text: str, source: str = "<string>") -> tuple[int, np.ndarray]:
    tokens = text.split()
    if len(tokens) < 4 or tokens[0] != "M":
        raise MatrixFormatError(f"{source}: expected header 'M p rows cols'")
    try:
        p, rows, cols = (int(x) for x in tokens[1:4])
        values = [int(x) for x in tokens[4:]]
    except ValueError as exc:
        raise MatrixFormatError(f"{source}: non-integer token ({exc})") from None
    if rows < 0 or cols < 0:
        raise MatrixFormatError(f"{source}: negative dimensions {rows}x{cols}")
    if len(values) != rows * cols:
        raise MatrixFormatError(
            f"{source}: header says {rows}x{cols} = {rows * cols} values, "
            f"found {len(values)}")
    PrimeModulus(p)
    a = np.array(values, dtype=np.int64).reshape(rows, cols)
    if a.size and (a.min() < 0 or a.max() >= p):
        raise MatrixFormatError(f"{source}: entries must lie in [0, {p - 1}]")
    return p, a


def read_matrix(path) -> tuple[int, np.ndarray]:
    with open(path) as fh:
        return parse_matrix(fh.read(), str(path))


def format_matrix(a: np.ndarray, p: int) -> str:
    a = np.asarray(a)
    lines = [f"M {p} {a.shape[0]} {a.shape[1]}"]
    lines += [" ".join(str(int(x)) for x in row) for row in a]
    return "\n".join(lines) + "\n"


def write_matrix(path, a: np.ndarray, p: int) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(a, p))
