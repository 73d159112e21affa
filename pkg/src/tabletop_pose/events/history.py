"""Training history as CSV: one row per EpochEndEvent."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import IO

from tabletop_pose.events.types import EpochEndEvent, Event

HISTORY_COLUMNS = ("epoch", "train_loss", "train_acc", "val_acc")


class HistoryCsvSink:
    """Writes `epoch,train_loss,train_acc,val_acc` rows; other events are ignored.

    The file is truncated on open so a rerun overwrites the previous history.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh: IO[str] = self.path.open("w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(HISTORY_COLUMNS)

    def emit(self, event: Event) -> None:
        if isinstance(event, EpochEndEvent):
            self._writer.writerow(
                [event.epoch, repr(event.train_loss), repr(event.train_acc), repr(event.val_acc)]
            )
            self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()


def read_history(path: str | Path) -> list[dict[str, float]]:
    """Rows of a history CSV, with numeric values."""
    with open(path, encoding="utf-8", newline="") as f:
        return [
            {key: (int(value) if key == "epoch" else float(value)) for key, value in row.items()}
            for row in csv.DictReader(f)
        ]
