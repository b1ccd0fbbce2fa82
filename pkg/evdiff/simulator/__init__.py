from evdiff.simulator.frames import (
    FrameSequence,
    ResidualField,
    SimConfig,
    read_frames,
    write_frames,
    write_preview,
)
from evdiff.simulator.emulator import (
    events_to_volumes,
    luminance,
    residual_from_events,
    simulate_channel_events,
    simulate_events,
)
from evdiff.simulator.synthetic import drifting_blobs, translating_edge
