from evdiff.events.stream import (
    Event,
    EventStream,
    FrameTimeline,
    parse_event_stream,
    read_event_stream,
    uniform_timeline,
    write_event_stream,
)
from evdiff.events.stacking import (
    EventGroup,
    EventVolume,
    arbitrary_timestamp_groups,
    group_bounds,
    group_events,
    read_volume,
    repartition_groups,
    stack_events,
    write_volume,
)
from evdiff.events.noise import inject_noise
