import logging
import os
import struct
from dataclasses import dataclass
from typing import Iterator, List, NamedTuple, Sequence

import numpy as np

from evdiff.errors import EventFormatError

logger = logging.getLogger(f"evdiff_logger.{__name__}")

BINARY_MAGIC = b"EVT0"
# magic, width, height, duration
BINARY_HEADER = struct.Struct("<4sHHd")
BINARY_RECORD = np.dtype([("t", "<f8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1")])


class Event(NamedTuple):
    x: int
    y: int
    t: float
    p: int


@dataclass(frozen=True)
class EventStream:
    """Time-sorted events of one sensor, stored column-wise."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    width: int
    height: int
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=np.float64))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.int64))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int64))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=np.int64))
        n = self.t.shape[0]
        if not (self.x.shape[0] == self.y.shape[0] == self.p.shape[0] == n):
            raise ValueError("Event columns have different lengths")
        if self.width <= 0 or self.height <= 0 or self.duration < 0:
            raise ValueError(f"Invalid sensor metadata {self.width}x{self.height}, T={self.duration}")
        if n == 0:
            return
        if np.any(np.diff(self.t) < 0):
            raise ValueError("Events are not sorted by timestamp")
        if np.any((self.x < 0) | (self.x >= self.width) | (self.y < 0) | (self.y >= self.height)):
            raise ValueError("Event coordinates outside the sensor")
        if np.any((self.t < 0) | (self.t > self.duration)):
            raise ValueError("Event timestamps outside the stream duration")
        if np.any(np.abs(self.p) != 1):
            raise ValueError("Event polarity must be +1 or -1")

    def __len__(self):
        return int(self.t.shape[0])

    def __iter__(self) -> Iterator[Event]:
        for x, y, t, p in zip(self.x, self.y, self.t, self.p):
            yield Event(int(x), int(y), float(t), int(p))

    @property
    def events(self) -> List[Event]:
        return list(self)

    def subset(self, mask):
        return EventStream(self.t[mask], self.x[mask], self.y[mask], self.p[mask],
                           self.width, self.height, self.duration)

    @classmethod
    def empty(cls, width, height, duration):
        return cls(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0), width, height, duration)

    @classmethod
    def from_unsorted(cls, t, x, y, p, width, height, duration):
        """Stable sort on t, then validate."""
        t = np.asarray(t, dtype=np.float64)
        order = np.argsort(t, kind="stable")
        return cls(t[order], np.asarray(x)[order], np.asarray(y)[order], np.asarray(p)[order],
                   width, height, duration)


@dataclass(frozen=True)
class FrameTimeline:
    """Frame timestamps s_0 < ... < s_{F-1}; s_{-1} is implicitly 0."""

    timestamps: np.ndarray

    def __post_init__(self):
        stamps = np.asarray(self.timestamps, dtype=np.float64)
        object.__setattr__(self, "timestamps", stamps)
        if stamps.ndim != 1 or stamps.size < 1:
            raise ValueError("A timeline needs at least one timestamp")
        if np.any(np.diff(stamps) <= 0):
            raise ValueError("Timeline timestamps must be strictly increasing")
        if stamps[0] < 0:
            raise ValueError("Timeline timestamps must be non-negative")

    def __len__(self):
        return int(self.timestamps.size)

    @property
    def edges(self):
        """Group boundaries [0, s_0, ..., s_{F-1}]."""
        return np.concatenate([[0.0], self.timestamps])

    def validate_for(self, duration):
        if self.timestamps[-1] > duration:
            raise ValueError(f"Last frame at {self.timestamps[-1]} s is beyond the stream duration {duration} s")


def uniform_timeline(n_frames, duration=1.0):
    """F frames evenly spread so that s_{F-1} == duration."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    return FrameTimeline(np.arange(1, n_frames + 1, dtype=np.float64) * (duration / n_frames))


def _parse_polarity(token, line_no):
    try:
        value = int(float(token))
    except ValueError:
        raise EventFormatError(f"polarity '{token}' is not a number", line_no)
    if value == 0:
        return -1
    if value in (1, -1):
        return value
    raise EventFormatError(f"polarity {value} not in {{-1, 0, 1}}", line_no)


def parse_event_stream(text: str, width: int, height: int, duration: float) -> EventStream:
    """Parse ``t,x,y,p`` lines into a sorted stream.

    Blank lines and lines starting with ``#`` are ignored. Polarity 0 is read
    as -1.

    Raises:
        EventFormatError: wrong field count, unparsable field, coordinate
            outside the sensor or timestamp outside [0, duration]. The
            message carries the 1-based line number.
    """
    ts, xs, ys, ps = [], [], [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [field.strip() for field in line.split(",")]
        if len(fields) != 4:
            raise EventFormatError(f"expected 4 fields t,x,y,p, got {len(fields)}", line_no)
        try:
            t = float(fields[0])
            x = int(fields[1])
            y = int(fields[2])
        except ValueError as exc:
            raise EventFormatError(str(exc), line_no)
        p = _parse_polarity(fields[3], line_no)
        if not (0 <= x < width and 0 <= y < height):
            raise EventFormatError(f"coordinate ({x}, {y}) outside {width}x{height} sensor", line_no)
        if not (0.0 <= t <= duration):
            raise EventFormatError(f"timestamp {t} outside [0, {duration}]", line_no)
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)

    stream = EventStream.from_unsorted(ts, xs, ys, ps, width, height, duration)
    logger.debug(f"Parsed {len(stream)} events for a {width}x{height} sensor over {duration} s")
    return stream


def format_event_stream(stream: EventStream) -> str:
    lines = [f"# width={stream.width} height={stream.height} duration={stream.duration!r}"]
    lines += [f"{t!r},{x},{y},{p}" for x, y, t, p in stream]
    return "\n".join(lines) + "\n"


def _parse_text_metadata(text):
    """Pick ``# width=.. height=.. duration=..`` out of the first comment line."""
    first = text.split("\n", 1)[0]
    if not first.startswith("#"):
        return {}
    meta = {}
    for item in first[1:].split():
        if "=" in item:
            key, value = item.split("=", 1)
            meta[key] = value
    return meta


def write_event_stream(stream: EventStream, path: str):
    if path.endswith(".bin"):
        records = np.zeros(len(stream), dtype=BINARY_RECORD)
        records["t"], records["x"], records["y"], records["p"] = stream.t, stream.x, stream.y, stream.p
        with open(path, "wb") as handle:
            handle.write(BINARY_HEADER.pack(BINARY_MAGIC, stream.width, stream.height, stream.duration))
            handle.write(records.tobytes())
    else:
        with open(path, "w") as handle:
            handle.write(format_event_stream(stream))


def read_event_stream(path: str, width=None, height=None, duration=None) -> EventStream:
    """Load a text or ``EVT0`` binary stream.

    Text files written by :func:`write_event_stream` carry their metadata in
    the first comment line; explicit arguments take precedence.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, "rb") as handle:
        payload = handle.read()

    if payload[:4] == BINARY_MAGIC:
        if len(payload) < BINARY_HEADER.size:
            raise EventFormatError("truncated EVT0 header")
        _, bin_width, bin_height, bin_duration = BINARY_HEADER.unpack_from(payload)
        body = payload[BINARY_HEADER.size:]
        if len(body) % BINARY_RECORD.itemsize:
            raise EventFormatError(f"EVT0 body of {len(body)} bytes is not a whole number of records")
        records = np.frombuffer(body, dtype=BINARY_RECORD)
        return EventStream.from_unsorted(records["t"], records["x"], records["y"], records["p"],
                                         width or bin_width, height or bin_height,
                                         duration if duration is not None else bin_duration)

    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EventFormatError(f"{path} is neither EVT0 binary nor UTF-8 text: {exc.reason} at byte {exc.start}")
    meta = _parse_text_metadata(text)
    try:
        width = width or int(meta["width"])
        height = height or int(meta["height"])
        duration = duration if duration is not None else float(meta["duration"])
    except KeyError as exc:
        raise EventFormatError(f"sensor metadata {exc} missing; pass width/height/duration explicitly")
    return parse_event_stream(text, width, height, duration)


def concatenate_streams(streams: Sequence[EventStream]) -> EventStream:
    first = streams[0]
    return EventStream.from_unsorted(
        np.concatenate([s.t for s in streams]), np.concatenate([s.x for s in streams]),
        np.concatenate([s.y for s in streams]), np.concatenate([s.p for s in streams]),
        first.width, first.height, first.duration)
