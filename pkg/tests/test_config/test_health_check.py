import logging
import os
import tempfile
import unittest
from unittest.mock import patch

from evdiff import health_check, util
from evdiff.errors import ConfigError
from evdiff.logging_configure.custom_logging import set_log_level


class TestCheckConfigFile(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text):
        path = os.path.join(self.tmp.name, "config.ini")
        with open(path, "w") as config_file:
            config_file.write(text)
        return path

    def test_example_config_is_valid(self):
        example = os.path.join(os.path.dirname(util.__file__), "example.ini")
        config = health_check.check_config_file(example)
        self.assertEqual(config.get("guidance", "mode"), "linear")

    # Test when the file does not exist
    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            health_check.check_config_file("/path/to/nonexistent/config.ini")

    def test_unknown_section(self):
        with self.assertRaises(ConfigError):
            health_check.check_config_file(self.write("[metrics]\nenabled = true\n"))

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            health_check.check_config_file(self.write("[schedule]\nsigma = 1.0\n"))
        self.assertIn("sigma", str(ctx.exception))

    def test_invalid_choice(self):
        with self.assertRaises(ConfigError):
            health_check.check_config_file(self.write("[train]\noptimizer = sgd\n"))

    def test_invalid_numbers(self):
        for text in ("[simulator]\nthreshold = 0\n", "[guidance]\ns_max = -0.1\n", "[schedule]\nsteps = many\n",
                     "[schedule]\nsigma_min = 90\n", "[zeroshot]\nfinal_alpha = 2\n",
                     "[events]\ndrop = maybe\n", "[run]\ndecoder = linear\n"):
            with self.assertRaises(ConfigError, msg=text):
                health_check.check_config_file(self.write(text))

    def test_valid_overrides(self):
        config = health_check.check_config_file(self.write("[guidance]\nmode = off\nwindow = 0\n"))
        self.assertEqual(config.getint("guidance", "window"), 0)

    @patch("evdiff.health_check.sys")
    def test_old_python(self, mock_sys):
        mock_sys.version_info = (3, 8, 10)
        with self.assertRaises(RuntimeError):
            health_check.check_python_version()


class TestLogLevel(unittest.TestCase):

    def tearDown(self):
        set_log_level("INFO")

    def test_set_log_level(self):
        set_log_level("debug")
        logger = logging.getLogger("evdiff_logger")
        self.assertEqual(logger.level, logging.DEBUG)
        self.assertTrue(all(handler.level == logging.DEBUG for handler in logger.handlers))


if __name__ == '__main__':
    unittest.main()
