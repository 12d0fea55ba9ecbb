"""Stable diagnostic codes and the error type carried by every rejection."""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import NOPOS, Pos

# The catalog of stable codes; golden expectations match on these.
CODES = (
    "UNBOUND",
    "DUPLICATE",
    "PARSE",
    "TYPE-MISMATCH",
    "NOT-A-FUNCTION",
    "PARAMETRIC-VIOLATION",
    "SIZE-INDEX-SHAPE",
    "SIZE-MONOTONICITY",
    "POSITIVITY",
    "SIZE-PATTERN-REQUIRED",
    "ILLEGAL-SIZE-REFINEMENT",
    "COFUN-MATCH-ON-VARIABLE-SIZE",
    "DOT-MISMATCH",
    "ADMISSIBILITY",
    "TERMINATION",
    "PRODUCTIVITY",
    "UNSOLVED-META",
    # runtime guards, outside the type-level catalog
    "FUEL",
    "STUCK-MATCH",
)


@dataclass
class Diagnostic(Exception):
    code: str
    message: str
    pos: Pos = NOPOS
    file: str | None = None

    def render(self) -> str:
        where = f"{self.file or '<input>'}:{self.pos[0]}:{self.pos[1]}"
        return f"{self.code} {where} {self.message}"

    def __str__(self):
        return self.render()
