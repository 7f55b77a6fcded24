from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from ..statespace import Lasso


class Status(str, Enum):
    HOLDS = "HOLDS"
    VIOLATED = "VIOLATED"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Path:
    """Finite witness: consecutive LTS state indices, starting at an initial state."""

    states: tuple[int, ...]


Witness = Union[Lasso, Path]


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Optional[Witness] = None
    note: str = ""

    def __post_init__(self):
        if self.status is Status.VIOLATED and self.witness is None:
            raise ValueError("a VIOLATED verdict needs a witness")

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def violated(self) -> bool:
        return self.status is Status.VIOLATED


def holds(note: str = "") -> Verdict:
    return Verdict(Status.HOLDS, None, note)


def unknown(note: str) -> Verdict:
    return Verdict(Status.UNKNOWN, None, note)


def violated(witness: Witness, note: str = "") -> Verdict:
    return Verdict(Status.VIOLATED, witness, note)


def combine(*verdicts: Verdict) -> Verdict:
    """First violation wins; otherwise UNKNOWN if any part is unknown."""
    for v in verdicts:
        if v.violated:
            return v
    for v in verdicts:
        if v.status is Status.UNKNOWN:
            return v
    return holds("; ".join(v.note for v in verdicts if v.note))
