"""Reading data files.

One-sample files hold one number per line, optionally after a header line.
Two-sample files hold ``value,group`` rows.  Unicode minus signs and dashes
(as found in data pasted from typeset documents) are read as ``-``.
"""

from __future__ import annotations

import csv
import io
import os
import re
from typing import Optional, Union

import numpy as np

from .exceptions import InputError
from .shift_models import OneSampleData, TwoSampleData

PathLike = Union[str, os.PathLike]

_MINUS = str.maketrans({"−": "-", "–": "-", "‒": "-", "﹣": "-", "－": "-"})
_SPLIT = re.compile(r"[,\s;]+")


def _read_text(path: PathLike) -> str:
    try:
        with open(path, encoding="utf-8-sig") as fh:
            return fh.read()
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 text ({exc.reason})") from None


def _number(cell: str) -> Optional[float]:
    try:
        value = float(cell.translate(_MINUS))
    except ValueError:
        return None
    return value


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def parse_one_sample_text(text: str, source: str = "<string>") -> OneSampleData:
    values = []
    for k, (lineno, line) in enumerate(_lines(text)):
        cells = [c for c in _SPLIT.split(line) if c]
        if len(cells) != 1:
            raise InputError(f"{source}:{lineno}: expected one value per line, got {len(cells)}")
        value = _number(cells[0])
        if value is None:
            if k == 0:
                continue  # header
            raise InputError(f"{source}:{lineno}: not a number: {cells[0]!r}")
        values.append(value)
    if not values:
        raise InputError(f"{source}: no data")
    return OneSampleData(np.array(values))


def parse_one_sample_csv(path: PathLike) -> OneSampleData:
    """Read a single-column file of numbers; a non-numeric first line is a header."""
    return parse_one_sample_text(_read_text(path), str(path))


def read_two_sample_text(text: str, source: str = "<string>") -> tuple[np.ndarray, list]:
    """Values and group labels, in file order."""
    values, groups = [], []
    rows = [(lineno, line) for lineno, line in _lines(text)]
    for k, (lineno, line) in enumerate(rows):
        cells = next(csv.reader(io.StringIO(line)))
        if len(cells) == 1:
            cells = [c for c in _SPLIT.split(line) if c]
        cells = [c.strip() for c in cells]
        if len(cells) != 2:
            raise InputError(f"{source}:{lineno}: expected 'value,group', got {len(cells)} field(s)")
        value = _number(cells[0])
        if value is None:
            if k == 0:
                continue  # header
            raise InputError(f"{source}:{lineno}: not a number: {cells[0]!r}")
        if not cells[1]:
            raise InputError(f"{source}:{lineno}: empty group label")
        values.append(value)
        groups.append(cells[1])
    if not values:
        raise InputError(f"{source}: no data")
    return np.array(values), groups


def parse_two_sample_text(text: str, treatment_label: Optional[str] = None,
                          source: str = "<string>") -> TwoSampleData:
    values, groups = read_two_sample_text(text, source)
    try:
        return TwoSampleData.from_groups(values, groups, treatment_label)
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None


def parse_two_sample_csv(path: PathLike, treatment_label: Optional[str] = None) -> TwoSampleData:
    """Read ``value,group`` rows; treated units come first in the result.

    The treatment group is ``treatment_label`` if given, else the first
    label in the file.
    """
    return parse_two_sample_text(_read_text(path), treatment_label, str(path))
