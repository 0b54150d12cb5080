"""Small benchmark data sets shipped with the package.

* ``darwin.csv``: differences in height between 15 matched pairs of
  cross- and self-fertilized plants (one-sample).
* ``sleep.csv``: basal metabolism of 26 women by hours of sleep,
  groups ``7+`` and ``0-6`` (two-sample).
* ``lizard.csv``: meters run in two minutes by 15 infected and 15
  uninfected lizards (two-sample).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional

from ..data_io import parse_one_sample_text, parse_two_sample_text
from ..shift_models import OneSampleData, TwoSampleData

NAMES = ("darwin", "sleep", "lizard")


def path(name: str) -> Path:
    """Filesystem path of a bundled CSV file."""
    if name not in NAMES:
        raise KeyError(f"unknown data set {name!r}; choose from {NAMES}")
    return Path(str(resources.files(__name__).joinpath(f"{name}.csv")))


def _text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.csv").read_text(encoding="utf-8")


def load_darwin() -> OneSampleData:
    return parse_one_sample_text(_text("darwin"), "darwin.csv")


def load_sleep(treatment_label: Optional[str] = "0-6") -> TwoSampleData:
    """Sleep data; by default the short sleepers (``0-6``) are the treated group."""
    return parse_two_sample_text(_text("sleep"), treatment_label, "sleep.csv")


def load_lizard(treatment_label: Optional[str] = "uninfected") -> TwoSampleData:
    """Lizard data; by default the uninfected animals are the treated group."""
    return parse_two_sample_text(_text("lizard"), treatment_label, "lizard.csv")
