"""Line-oriented text format for problem instances.

Grammar (one item per line, space separated, decimals with 17 significant
digits so doubles round-trip exactly):

    MLPR 1
    n <integer>
    alpha <decimal>        (optional)
    v <n decimals>
    <n lines: row i of the flattening, n^2 decimals each>

Columns are stored in the package's fixed layout, c = (k-1)*n + j.  Writing
is byte-deterministic, so equal instances produce equal files.
"""

from __future__ import annotations

import io
import os
from typing import TextIO, Union

import numpy as np

from .errors import ParseError
from .tensor import FlattenedTensor, ProblemInstance

MAGIC = "MLPR"
VERSION = 1

Source = Union[str, os.PathLike, TextIO]


def _format(x: float) -> str:
    return format(float(x), ".17g")


def write_problem(inst: ProblemInstance, destination: Source | None = None) -> str:
    """Serialize an instance; optionally write it to a path or text stream.

    Returns the exact text that was (or would be) written.
    """
    lines = [f"{MAGIC} {VERSION}", f"n {inst.n}"]
    if inst.alpha is not None:
        lines.append(f"alpha {_format(inst.alpha)}")
    lines.append("v " + " ".join(_format(x) for x in inst.v))
    for row in inst.tensor.entries:
        lines.append(" ".join(_format(x) for x in row))
    text = "\n".join(lines) + "\n"
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", encoding="ascii") as handle:
                handle.write(text)
    return text


class _LineReader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next_line(self, what: str) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            self.pos += 1
            if line.strip():
                return line
        raise ParseError(f"unexpected end of file, expected {what}", line=self.pos + 1)

    @property
    def line_no(self) -> int:
        return self.pos


def _parse_floats(tokens: list[str], count: int, what: str, line_no: int) -> np.ndarray:
    if len(tokens) != count:
        raise ParseError(
            f"expected {count} values for {what}, got {len(tokens)}", line=line_no
        )
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as err:
        raise ParseError(f"bad decimal in {what}: {err}", line=line_no) from err


def parse_problem(source: Source) -> ProblemInstance:
    """Parse and validate an instance from a path or text stream.

    Raises ParseError (with a 1-based line number) on malformed syntax and
    StochasticityError (naming the column) when the numbers are not column
    stochastic.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="ascii") as handle:
            text = handle.read()
    reader = _LineReader(text.splitlines())

    header = reader.next_line("header").split()
    if header[:1] != [MAGIC] or len(header) != 2:
        raise ParseError(f"expected '{MAGIC} <version>' header", line=reader.line_no)
    if header[1] != str(VERSION):
        raise ParseError(f"unsupported version {header[1]!r}", line=reader.line_no)

    tokens = reader.next_line("dimension").split()
    if len(tokens) != 2 or tokens[0] != "n":
        raise ParseError("expected 'n <integer>'", line=reader.line_no)
    try:
        n = int(tokens[1])
    except ValueError as err:
        raise ParseError(f"bad dimension {tokens[1]!r}", line=reader.line_no) from err
    if n < 1:
        raise ParseError(f"dimension must be positive, got {n}", line=reader.line_no)

    line = reader.next_line("alpha or v")
    alpha = None
    tokens = line.split()
    if tokens[0] == "alpha":
        alpha_arr = _parse_floats(tokens[1:], 1, "alpha", reader.line_no)
        alpha = float(alpha_arr[0])
        tokens = reader.next_line("v").split()
    if tokens[0] != "v":
        raise ParseError("expected 'v <values>'", line=reader.line_no)
    v = _parse_floats(tokens[1:], n, "v", reader.line_no)

    entries = np.empty((n, n * n))
    for i in range(n):
        tokens = reader.next_line(f"row {i + 1} of the flattening").split()
        entries[i] = _parse_floats(tokens, n * n, f"row {i + 1}", reader.line_no)

    if reader.pos < len(reader.lines) and any(
        line.strip() for line in reader.lines[reader.pos :]
    ):
        raise ParseError("trailing content after final row", line=reader.pos + 1)

    # FlattenedTensor/ProblemInstance validation yields the math diagnostics
    # (column sums, stochastic v, alpha range).
    return ProblemInstance(FlattenedTensor(n, entries), alpha, v)


def parse_problem_text(text: str) -> ProblemInstance:
    """Parse an instance from an in-memory string."""
    return parse_problem(io.StringIO(text))
