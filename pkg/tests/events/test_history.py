"""Tests for events/history.py - the per-epoch history CSV."""

from __future__ import annotations

from pathlib import Path

from tabletop_pose.events.history import HistoryCsvSink, read_history
from tabletop_pose.events.types import BestCheckpointEvent, EpochEndEvent, TrainEndEvent, TrainStartEvent


class TestHistoryCsvSink:
    """Tests for HistoryCsvSink."""

    def test_header_and_rows(self, tmp_path: Path) -> None:
        """Only epoch_end events become rows."""
        path = tmp_path / "run" / "history.csv"
        sink = HistoryCsvSink(path)
        sink.emit(TrainStartEvent())
        sink.emit(EpochEndEvent(epoch=1, train_loss=2.0, train_acc=0.25, val_acc=0.5))
        sink.emit(BestCheckpointEvent(epoch=1, val_acc=0.5))
        sink.emit(EpochEndEvent(epoch=2, train_loss=1.5, train_acc=0.5, val_acc=0.75))
        sink.emit(TrainEndEvent())
        sink.close()

        assert path.read_text(encoding="utf-8") == (
            "epoch,train_loss,train_acc,val_acc\n" "1,2.0,0.25,0.5\n" "2,1.5,0.5,0.75\n"
        )

    def test_rerun_overwrites(self, tmp_path: Path) -> None:
        path = tmp_path / "history.csv"
        for epoch in (1, 2):
            sink = HistoryCsvSink(path)
            sink.emit(EpochEndEvent(epoch=epoch))
            sink.close()
        assert [row["epoch"] for row in read_history(path)] == [2]

    def test_rows_visible_before_close(self, tmp_path: Path) -> None:
        """Each row is flushed as it is written."""
        path = tmp_path / "history.csv"
        sink = HistoryCsvSink(path)
        sink.emit(EpochEndEvent(epoch=1, val_acc=0.1))
        assert len(read_history(path)) == 1
        sink.close()
        sink.close()


class TestReadHistory:
    """Tests for read_history."""

    def test_values_are_exact(self, tmp_path: Path) -> None:
        """Floats are written with repr so they read back unchanged."""
        path = tmp_path / "history.csv"
        sink = HistoryCsvSink(path)
        sink.emit(EpochEndEvent(epoch=7, train_loss=1 / 3, train_acc=0.1 + 0.2, val_acc=2 / 7))
        sink.close()

        (row,) = read_history(path)
        assert row == {"epoch": 7, "train_loss": 1 / 3, "train_acc": 0.1 + 0.2, "val_acc": 2 / 7}
        assert isinstance(row["epoch"], int)
