import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Sequence, Tuple

import numpy as np

from evdiff.errors import ShapeMismatchError
from evdiff.events.stream import EventStream, FrameTimeline, concatenate_streams
from evdiff.rawio import read_raw, write_raw

logger = logging.getLogger(f"evdiff_logger.{__name__}")

CHANNEL_ALL, CHANNEL_POS, CHANNEL_NEG = 0, 1, 2


@dataclass(frozen=True)
class EventGroup:
    """Events of frame ``index`` with ``start <= t < stop``."""

    index: int
    start: float
    stop: float
    events: EventStream

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True)
class EventVolume:
    """F x 3 x H x W stack: signed total, positive sum, negative (signed) sum."""

    data: np.ndarray
    flags: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "flags", frozenset(self.flags))
        if data.ndim != 4 or data.shape[1] != 3:
            raise ShapeMismatchError(f"EventVolume must be F x 3 x H x W, got {data.shape}")

    @property
    def n_frames(self):
        return self.data.shape[0]

    @property
    def spatial_shape(self):
        return self.data.shape[2:]

    def with_flag(self, flag):
        return EventVolume(self.data, self.flags | {flag})

    def validate(self):
        """Raise ValueError when the channel identity or the channel signs are broken."""
        total, pos, neg = self.data[:, CHANNEL_ALL], self.data[:, CHANNEL_POS], self.data[:, CHANNEL_NEG]
        if not np.array_equal(total, pos + neg):
            raise ValueError("Channel 0 differs from channel 1 + channel 2")
        if np.any(pos < 0) or np.any(neg > 0):
            raise ValueError("Positive channel must be >= 0 and negative channel <= 0")


def group_events(stream: EventStream, timeline: FrameTimeline) -> List[EventGroup]:
    """Split ``stream`` into one half-open group per frame.

    Group f gets ``s_{f-1} <= t < s_f`` (s_{-1} = 0); events at or after the
    last frame timestamp are dropped.
    """
    timeline.validate_for(stream.duration)
    edges = timeline.edges
    slot = np.searchsorted(edges, stream.t, side="right") - 1
    dropped = int(np.count_nonzero(slot >= len(timeline)))
    if dropped:
        logger.debug(f"{dropped} events at or after s_F-1 = {edges[-1]} discarded")
    return [
        EventGroup(f, float(edges[f]), float(edges[f + 1]), stream.subset(slot == f))
        for f in range(len(timeline))
    ]


def stack_events(groups: Sequence[EventGroup], width: int, height: int) -> EventVolume:
    data = np.zeros((len(groups), 3, height, width), dtype=np.float64)
    for f, group in enumerate(groups):
        ev = group.events
        positive = ev.p > 0
        np.add.at(data[f, CHANNEL_POS], (ev.y[positive], ev.x[positive]), 1.0)
        np.add.at(data[f, CHANNEL_NEG], (ev.y[~positive], ev.x[~positive]), -1.0)
    data[:, CHANNEL_ALL] = data[:, CHANNEL_POS] + data[:, CHANNEL_NEG]
    return EventVolume(data)


def group_bounds(groups: Sequence[EventGroup]) -> List[Tuple[float, float]]:
    """Half-open [start, stop) span of each group, in order."""
    return [(group.start, group.stop) for group in groups]


def repartition_groups(groups: Sequence[EventGroup], k: int) -> List[EventGroup]:
    """Redistribute contiguous groups into ``k`` equal-duration groups over the same span."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not groups:
        raise ValueError("repartition_groups needs at least one group")
    bounds = group_bounds(groups)
    for j, ((_, before_stop), (after_start, _)) in enumerate(zip(bounds, bounds[1:])):
        if not np.isclose(before_stop, after_start):
            raise ValueError(f"Groups {groups[j].index} and {groups[j + 1].index} are not contiguous")

    start, stop = bounds[0][0], bounds[-1][1]
    edges = np.linspace(start, stop, k + 1)
    original = np.array([b[0] for b in bounds] + [stop])
    if k == len(groups) and np.allclose(edges, original):
        edges = original

    merged = concatenate_streams([g.events for g in groups])
    slot = np.clip(np.searchsorted(edges, merged.t, side="right") - 1, 0, k - 1)
    first = groups[0].index
    return [
        EventGroup(first + j, float(edges[j]), float(edges[j + 1]), merged.subset(slot == j))
        for j in range(k)
    ]


def arbitrary_timestamp_groups(groups: Sequence[EventGroup], k: int) -> List[EventGroup]:
    """Keep the two endpoint groups and repartition the interior ones into ``k``."""
    if len(groups) < 3:
        raise ValueError("Need at least one interior group between the endpoints")
    interior = repartition_groups(groups[1:-1], k)
    last = groups[-1]
    tail = EventGroup(interior[-1].index + 1, last.start, last.stop, last.events)
    return [groups[0]] + interior + [tail]


def write_volume(volume: EventVolume, path: str):
    write_raw(path, volume.data)


def read_volume(path: str) -> EventVolume:
    return EventVolume(read_raw(path))
