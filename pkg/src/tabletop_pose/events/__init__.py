from tabletop_pose.events.history import HistoryCsvSink, read_history
from tabletop_pose.events.jsonl import JsonlSink, read_events
from tabletop_pose.events.sink import EventSink, ListSink, MultiSink, NullSink
from tabletop_pose.events.types import (
    BaseEvent,
    BestCheckpointEvent,
    EpochEndEvent,
    Event,
    TrainEndEvent,
    TrainStartEvent,
)

__all__ = [
    "EventSink",
    "MultiSink",
    "NullSink",
    "ListSink",
    "JsonlSink",
    "read_events",
    "HistoryCsvSink",
    "read_history",
    "BaseEvent",
    "Event",
    "TrainStartEvent",
    "EpochEndEvent",
    "BestCheckpointEvent",
    "TrainEndEvent",
]
