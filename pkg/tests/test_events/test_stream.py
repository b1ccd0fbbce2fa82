import os
import tempfile
import unittest

import numpy as np

from evdiff.errors import EventFormatError
from evdiff.events.stream import (
    Event,
    EventStream,
    FrameTimeline,
    parse_event_stream,
    read_event_stream,
    uniform_timeline,
    write_event_stream,
)


class TestParseEventStream(unittest.TestCase):

    def get_sample_data_path(self, filename):
        return os.path.join(os.path.dirname(__file__), 'data', filename)

    def test_single_record(self):
        stream = parse_event_stream("0.10,1,0,1", width=2, height=2, duration=1.0)
        self.assertEqual(len(stream), 1)
        self.assertEqual(stream.events[0], Event(x=1, y=0, t=0.1, p=1))

    def test_empty_input(self):
        stream = parse_event_stream("", width=2, height=2, duration=1.0)
        self.assertEqual(len(stream), 0)
        self.assertEqual((stream.width, stream.height, stream.duration), (2, 2, 1.0))

    # Unsorted input comes back sorted by timestamp
    def test_sorts_by_time(self):
        stream = parse_event_stream("0.5,0,0,1\n0.2,1,1,-1", width=2, height=2, duration=1.0)
        np.testing.assert_array_equal(stream.t, [0.2, 0.5])
        np.testing.assert_array_equal(stream.p, [-1, 1])

    def test_zero_polarity_means_negative(self):
        stream = parse_event_stream("0.1,0,0,0\n0.2,0,0,1", width=1, height=1, duration=1.0)
        np.testing.assert_array_equal(stream.p, [-1, 1])

    def test_field_count_error_carries_line(self):
        with open(self.get_sample_data_path("bad_field_count.txt")) as handle:
            text = handle.read()
        with self.assertRaises(EventFormatError) as ctx:
            parse_event_stream(text, width=4, height=3, duration=1.0)
        self.assertEqual(ctx.exception.line_no, 3)
        self.assertIn("line 3", str(ctx.exception))

    def test_unparsable_field(self):
        with self.assertRaises(EventFormatError):
            parse_event_stream("abc,0,0,1", width=2, height=2, duration=1.0)

    def test_bad_polarity(self):
        with self.assertRaises(EventFormatError):
            parse_event_stream("0.1,0,0,2", width=2, height=2, duration=1.0)

    def test_coordinate_outside_sensor(self):
        with self.assertRaises(EventFormatError):
            parse_event_stream("0.1,2,0,1", width=2, height=2, duration=1.0)

    def test_timestamp_outside_duration(self):
        with self.assertRaises(EventFormatError):
            parse_event_stream("1.5,0,0,1", width=2, height=2, duration=1.0)

    # EventFormatError is still a ValueError for callers that only know builtins
    def test_error_is_value_error(self):
        with self.assertRaises(ValueError):
            parse_event_stream("0.1,0,0", width=2, height=2, duration=1.0)


class TestEventStreamFiles(unittest.TestCase):

    def get_sample_data_path(self, filename):
        return os.path.join(os.path.dirname(__file__), 'data', filename)

    def test_read_text_with_metadata(self):
        stream = read_event_stream(self.get_sample_data_path("sample_events.txt"))
        self.assertEqual((stream.width, stream.height, stream.duration), (4, 3, 1.0))
        self.assertEqual(len(stream), 6)
        np.testing.assert_array_equal(stream.t, [0.05, 0.20, 0.30, 0.30, 0.75, 0.95])
        # equal timestamps keep their file order
        np.testing.assert_array_equal(stream.x[2:4], [3, 1])
        np.testing.assert_array_equal(stream.p, [1, 1, -1, -1, 1, -1])

    def test_missing_metadata(self):
        with self.assertRaises(EventFormatError):
            read_event_stream(self.get_sample_data_path("no_metadata.txt"))

    def test_explicit_metadata(self):
        stream = read_event_stream(self.get_sample_data_path("no_metadata.txt"), width=2, height=2, duration=1.0)
        self.assertEqual(len(stream), 1)

    def test_file_not_found(self):
        with self.assertRaises(FileNotFoundError):
            read_event_stream("/path/to/nonexistent/events.txt")

    # Test when the file is neither EVT0 binary nor UTF-8 text
    def test_undecodable_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "events.txt")
            with open(path, "wb") as handle:
                handle.write(b"\xff\xfe\x00\x81 0.1,0,0,1\n")
            with self.assertRaises(EventFormatError) as ctx:
                read_event_stream(path, width=2, height=2, duration=1.0)
        self.assertIn("UTF-8", str(ctx.exception))

    def test_binary_file(self):
        stream = read_event_stream(self.get_sample_data_path("sample_events.txt"))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "events.bin")
            write_event_stream(stream, path)
            with open(path, "rb") as handle:
                self.assertEqual(handle.read(4), b"EVT0")
            loaded = read_event_stream(path)
        self.assertEqual(loaded.events, stream.events)
        self.assertEqual((loaded.width, loaded.height, loaded.duration), (4, 3, 1.0))

    def test_truncated_binary(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "events.bin")
            with open(path, "wb") as handle:
                handle.write(b"EVT0\x04\x00")
            with self.assertRaises(EventFormatError):
                read_event_stream(path)


class TestEventStreamInvariants(unittest.TestCase):

    def test_unsorted_columns_rejected(self):
        with self.assertRaises(ValueError):
            EventStream(np.array([0.5, 0.1]), np.zeros(2), np.zeros(2), np.ones(2), 1, 1, 1.0)

    def test_from_unsorted_is_stable(self):
        stream = EventStream.from_unsorted([0.3, 0.1, 0.3], [0, 1, 2], [0, 0, 0], [1, -1, -1], 3, 1, 1.0)
        np.testing.assert_array_equal(stream.x, [1, 0, 2])

    def test_subset_keeps_metadata(self):
        stream = EventStream.from_unsorted([0.1, 0.2], [0, 1], [0, 0], [1, -1], 2, 1, 1.0)
        part = stream.subset(stream.p > 0)
        self.assertEqual(len(part), 1)
        self.assertEqual((part.width, part.height), (2, 1))


class TestFrameTimeline(unittest.TestCase):

    def test_uniform_timeline(self):
        timeline = uniform_timeline(4, duration=2.0)
        np.testing.assert_allclose(timeline.timestamps, [0.5, 1.0, 1.5, 2.0])
        np.testing.assert_allclose(timeline.edges, [0.0, 0.5, 1.0, 1.5, 2.0])
        self.assertEqual(timeline.timestamps[-1], 2.0)

    def test_not_increasing(self):
        with self.assertRaises(ValueError):
            FrameTimeline(np.array([0.5, 0.5]))

    def test_beyond_duration(self):
        with self.assertRaises(ValueError):
            FrameTimeline(np.array([0.5, 1.5])).validate_for(1.0)

    def test_no_frames(self):
        with self.assertRaises(ValueError):
            uniform_timeline(0)


if __name__ == '__main__':
    unittest.main()
