"""Linear-intensity DVS emulator with a carried-over reference level.

Each pixel keeps ``ref = V_0 + C * N`` where N is the net number of events it
has fired so far. Over an interval ending at intensity ``b`` it fires
``n = trunc((b - ref) / C)`` events of polarity ``sign(n)`` and the reference
moves by ``C * n``. So ``|b - ref| < C`` holds after every interval and the
cumulative error of C * (event count) against the true change stays below C.
"""
from typing import List, Sequence, Union

import numpy as np

from evdiff import custom_logger
from evdiff.events.stacking import CHANNEL_ALL, EventVolume, stack_events, group_events
from evdiff.events.stream import EventStream
from evdiff.simulator.frames import FrameSequence, ResidualField, SimConfig

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def luminance(frames: FrameSequence) -> np.ndarray:
    """F x H x W intensity plane the sensor sees when colour is not simulated."""
    if frames.channels == 1:
        return frames.data[:, 0]
    return np.tensordot(frames.data, LUMA_WEIGHTS, axes=([1], [0]))


def _simulate_plane(plane, timestamps, threshold):
    """Events of one F x H x W intensity plane as column arrays (t, x, y, p)."""
    n_frames, height, width = plane.shape
    base = plane[0]
    fired = np.zeros((height, width), dtype=np.int64)
    ts, xs, ys, ps = [], [], [], []

    for k in range(n_frames - 1):
        start, stop = plane[k], plane[k + 1]
        ref = base + threshold * fired
        count = np.fix((stop - ref) / threshold).astype(np.int64)
        rows, cols = np.nonzero(count)
        if rows.size:
            n = count[rows, cols]
            reps = np.abs(n)
            pol = np.repeat(np.sign(n), reps)
            offsets = np.cumsum(reps) - reps
            j = np.arange(reps.sum()) - np.repeat(offsets, reps) + 1
            r, c = np.repeat(rows, reps), np.repeat(cols, reps)
            level = ref[r, c] + threshold * pol * j
            a, b = start[r, c], stop[r, c]
            span = b - a
            safe = np.where(span != 0, span, 1.0)
            frac = np.clip(np.where(span != 0, (level - a) / safe, 1.0), 0.0, 1.0)
            s_k, s_next = timestamps[k], timestamps[k + 1]
            t = s_k + frac * (s_next - s_k)
            # keep events inside [s_k, s_{k+1}) so they land in group k+1
            t = np.minimum(t, np.nextafter(s_next, s_k))
            ts.append(t)
            xs.append(c)
            ys.append(r)
            ps.append(pol)
            fired += count

    if not ts:
        return (np.zeros(0),) * 4
    return np.concatenate(ts), np.concatenate(xs), np.concatenate(ys), np.concatenate(ps)


def _check_frames(frames):
    if frames.n_frames < 2:
        raise ValueError(f"Simulation needs at least 2 frames, got {frames.n_frames}")


def simulate_events(frames: FrameSequence, config: SimConfig) -> EventStream:
    """Event stream of a frame sequence under the contrast-threshold model.

    Colour input is reduced to luminance; use :func:`simulate_channel_events`
    for per-channel sensors.
    """
    _check_frames(frames)
    if config.per_channel and frames.channels == 3:
        raise ValueError("per_channel simulation yields one stream per channel; use simulate_channel_events")
    t, x, y, p = _simulate_plane(luminance(frames), frames.timeline.timestamps, config.contrast_threshold)
    stream = EventStream.from_unsorted(t, x, y, p, frames.width, frames.height, frames.duration)
    custom_logger.debug(f"Simulated {len(stream)} events at C={config.contrast_threshold}")
    return stream


def simulate_channel_events(frames: FrameSequence, config: SimConfig) -> List[EventStream]:
    _check_frames(frames)
    streams = []
    for channel in range(frames.channels):
        t, x, y, p = _simulate_plane(frames.data[:, channel], frames.timeline.timestamps,
                                     config.contrast_threshold)
        streams.append(EventStream.from_unsorted(t, x, y, p, frames.width, frames.height, frames.duration))
    custom_logger.debug(f"Simulated {[len(s) for s in streams]} events per channel")
    return streams


def events_to_volumes(streams, frames: FrameSequence) -> List[EventVolume]:
    """Group and stack one or many streams on the frames' timeline."""
    if isinstance(streams, EventStream):
        streams = [streams]
    return [stack_events(group_events(s, frames.timeline), frames.width, frames.height) for s in streams]


def residual_from_events(volumes: Union[EventVolume, Sequence[EventVolume]], config: SimConfig,
                         channels: int = 1) -> ResidualField:
    """R_k = C * (signed event sum between frames k and k+1).

    With the uniform timeline that interval is group k+1. A single luminance
    volume is repeated over ``channels``; a list of per-channel volumes gives
    one residual channel each.
    """
    if isinstance(volumes, EventVolume):
        volumes = [volumes]
    per_channel = [config.contrast_threshold * v.data[1:, CHANNEL_ALL] for v in volumes]
    data = np.stack(per_channel, axis=1)
    if len(volumes) == 1 and channels > 1:
        data = np.repeat(data, channels, axis=1)
    return ResidualField(data)
