"""NLI-style training triplets and their newline-delimited file format.

Each line is a JSON object ``{"anchor": ..., "positive": ..., "negative": ...}``
where the negative is the hard (contradiction) sentence for the anchor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class TripletFormatError(ValueError):
    """Raised when a triplet file violates the line schema."""


@dataclass(frozen=True)
class NliTriplet:
    anchor: str
    positive: str
    negative: str

    def __post_init__(self):
        for name in ("anchor", "positive", "negative"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise ValueError(f"triplet {name} must be a non-empty string")


def load_triplets(path: str | Path) -> list[NliTriplet]:
    path = Path(path)
    triplets = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TripletFormatError(
                    f"{path}:{line_no}: malformed JSON: {exc.msg}"
                ) from exc
            try:
                triplets.append(
                    NliTriplet(
                        anchor=record["anchor"],
                        positive=record["positive"],
                        negative=record["negative"],
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise TripletFormatError(f"{path}:{line_no}: {exc}") from exc
    return triplets


def save_triplets(triplets: Iterable[NliTriplet], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        for triplet in triplets:
            handle.write(
                json.dumps(
                    {
                        "anchor": triplet.anchor,
                        "positive": triplet.positive,
                        "negative": triplet.negative,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            handle.write("\n")
