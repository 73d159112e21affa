"""Event sink protocol and implementations.

EventSink provides a unified interface for event emission. Sinks can write
JSONL logs, history CSVs, or both via MultiSink.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

if TYPE_CHECKING:
    from tabletop_pose.events.types import Event


@runtime_checkable
class EventSink(Protocol):
    """Protocol for event sinks."""

    def emit(self, event: Event) -> None:
        """Emit an event to this sink."""
        ...

    def close(self) -> None:
        """Flush and release any resources."""
        ...


class MultiSink:
    """Composite sink that broadcasts events to multiple sinks.

    Example:
        sink = MultiSink([JsonlSink("run.events.jsonl"), HistoryCsvSink("run.history.csv")])
        sink.emit(EpochEndEvent(epoch=1, val_acc=0.5))  # Goes to both
    """

    def __init__(self, sinks: list[EventSink] | None = None):
        self._sinks: list[EventSink] = list(sinks) if sinks else []

    def add(self, sink: EventSink) -> None:
        self._sinks.append(sink)

    def emit(self, event: Event) -> None:
        """Emit an event to all registered sinks, in registration order."""
        for sink in self._sinks:
            sink.emit(event)

    def close(self) -> None:
        """Close all registered sinks.

        Every sink is closed even if an earlier one fails; the first error is re-raised.
        """
        first_error: Exception | None = None
        for sink in self._sinks:
            try:
                sink.close()
            except Exception as e:
                first_error = first_error or e
        if first_error is not None:
            raise first_error

    def __len__(self) -> int:
        return len(self._sinks)


class NullSink:
    """A sink that discards all events."""

    def emit(self, event: Event) -> None:
        pass

    def close(self) -> None:
        pass


class ListSink:
    """A sink that collects events into a list.

    Useful for testing and inspection.
    """

    def __init__(self) -> None:
        self.events: list[Event] = []

    def emit(self, event: Event) -> None:
        self.events.append(event)

    def close(self) -> None:
        pass

    def of_type(self, event_type: str) -> list[Event]:
        """Collected events whose `type` field equals `event_type`."""
        return [e for e in self.events if e.type == event_type]

    def __len__(self) -> int:
        return len(self.events)
