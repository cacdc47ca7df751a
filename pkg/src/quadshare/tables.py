"""Linguistic labels and the three gain-increment rule tables.

The tables are shipped twice on purpose: embedded below (the defaults) and as
plain-text grid files under data/ so tunable deployments can swap them out.
A grid file is 7 rows x 7 space-separated labels, row = error label,
column = error-rate label; '#' lines and blank lines are ignored.
"""
from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

LABELS: tuple[str, ...] = ("NB", "NM", "NS", "ZO", "PS", "PM", "PB")
LABEL_INDEX: dict[str, int] = {lab: i for i, lab in enumerate(LABELS)}

GAIN_TARGETS: tuple[str, ...] = ("kp", "ki", "kd")


@dataclass(frozen=True)
class RuleTable:
    """A 7x7 grid of consequent labels for one PID gain increment."""

    target: str
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if self.target not in GAIN_TARGETS:
            raise ValueError(f"unknown rule-table target {self.target!r}")
        if len(self.rows) != 7 or any(len(r) != 7 for r in self.rows):
            raise ValueError(f"{self.target} rule table must be 7x7")
        for r in self.rows:
            for lab in r:
                if lab not in LABEL_INDEX:
                    raise ValueError(f"unknown label {lab!r} in {self.target} table")

    def lookup(self, e_label: str, ec_label: str) -> str:
        """Consequent label at row e_label, column ec_label."""
        return self.rows[LABEL_INDEX[e_label]][LABEL_INDEX[ec_label]]

    def to_indices(self) -> np.ndarray:
        """Grid of consequent label indices, shape (7, 7), dtype int64."""
        return np.array(
            [[LABEL_INDEX[lab] for lab in row] for row in self.rows], dtype=np.int64
        )

    def format_grid(self) -> str:
        """7-line grid text, one row per error label."""
        return "\n".join(" ".join(row) for row in self.rows) + "\n"


def _table(target: str, text: str) -> RuleTable:
    rows = tuple(tuple(line.split()) for line in text.strip().splitlines())
    return RuleTable(target, rows)


KP_RULES = _table(
    "kp",
    """
    PB PB PB PB PB PB PM
    PM PM PM PM PM PM PM
    PS PS PS PS PS PS PS
    PS ZO ZO NS ZO ZO PS
    PS PS PS PS PS PS PS
    PM PM PM PM PM PM PM
    PM PM PS PS PS PM PB
    """,
)

KI_RULES = _table(
    "ki",
    """
    NB NB NB NB NB NB NB
    NM NM NM NM NM NM NM
    NS ZO PM PM PM ZO NS
    ZO PS PM PB PM PS ZO
    PM ZO PM PM PM ZO NS
    NM NM NM NM NM NM NM
    NB NB NB NB NB NB NB
    """,
)

KD_RULES = _table(
    "kd",
    """
    PB PM PS PS PS PM PM
    NS NS NS NS NS NS PM
    PS NS NM PM NM NS PS
    PS NS NM NM NM NS PS
    PS NS NM PM NM NS PS
    PM NS NS NS NS NS NS
    PB PM PS PS PS PM PM
    """,
)

DEFAULT_TABLES: dict[str, RuleTable] = {
    "kp": KP_RULES,
    "ki": KI_RULES,
    "kd": KD_RULES,
}


def parse_grid(text: str, target: str) -> RuleTable:
    """Parse a plain-text grid file into a RuleTable."""
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(tuple(line.split()))
    return RuleTable(target, tuple(rows))


def load_table_file(path, target: str) -> RuleTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_grid(fh.read(), target)


def load_packaged_table(target: str) -> RuleTable:
    """Read one of the shipped data/*.txt grids."""
    res = importlib.resources.files("quadshare.data").joinpath(f"{target}_rules.txt")
    return parse_grid(res.read_text(encoding="utf-8"), target)


def dump_all_tables() -> str:
    """Deterministic dump of all three tables (147 entries), golden-file checked."""
    parts = []
    for target in GAIN_TARGETS:
        parts.append(f"# {target.capitalize()} rule table (rows e = NB..PB, cols ec = NB..PB)\n")
        parts.append(DEFAULT_TABLES[target].format_grid())
        parts.append("\n")
    return "".join(parts[:-1])  # no trailing blank line after the last table
