import logging
import os

from PyQt6.QtCore import QSettings

from fraisse.constants import (
    APP_NAME,
    DEFAULT_BELL_TABLE_MAX,
    DEFAULT_CERTIFY_MAX_LEVEL,
    DEFAULT_ENUMERATION_GUARD,
    DEFAULT_HALF_WIDTH_TARGET,
    DEFAULT_ISOMORPHISM_GUARD,
    DEFAULT_THREADS,
    DEFAULT_TRIAL_BATCH,
    OUTPUT_FORMATS,
    FORMAT_CSV,
    THREADS_ENV_VAR,
)

logger = logging.getLogger(__name__)


class Settings:
    # key -> (default, minimum, maximum)
    INTEGER_SETTINGS = {
        "enumeration_guard": (DEFAULT_ENUMERATION_GUARD, 1, 30),
        "isomorphism_guard": (DEFAULT_ISOMORPHISM_GUARD, 1, 10),
        "bell_table_max": (DEFAULT_BELL_TABLE_MAX, 1, 20000),
        "certify_max_level": (DEFAULT_CERTIFY_MAX_LEVEL, 2, 8),
        "trial_batch": (DEFAULT_TRIAL_BATCH, 1, 4096),
        "threads": (DEFAULT_THREADS, 1, 256),
    }
    FLOAT_SETTINGS = {
        "half_width_target": (DEFAULT_HALF_WIDTH_TARGET, 0.0, 0.5),
    }
    VALID_OUTPUT_FORMATS = OUTPUT_FORMATS

    def __init__(self):
        self.settings = QSettings(APP_NAME, APP_NAME)
        self.init_default_settings()

    def init_default_settings(self):
        """Initialize default settings if they don't exist"""
        for key, (default, _, _) in self.INTEGER_SETTINGS.items():
            if self.settings.value(key) is None:
                self.settings.setValue(key, default)
        for key, (default, _, _) in self.FLOAT_SETTINGS.items():
            if self.settings.value(key) is None:
                self.settings.setValue(key, default)
        if self.settings.value("output_format") is None:
            self.settings.setValue("output_format", FORMAT_CSV)

    def get(self, key, default=None):
        """Get a setting value with proper type conversion"""
        value = self.settings.value(key, default)
        if value is None:
            return default

        if key in self.INTEGER_SETTINGS:
            fallback, low, high = self.INTEGER_SETTINGS[key]
            try:
                number = int(value)
            except (ValueError, TypeError):
                logger.warning(f"Invalid {key} in settings: {value!r}, using default: {fallback}")
                return fallback
            if not low <= number <= high:
                logger.warning(f"{key}={number} outside [{low}, {high}], using default: {fallback}")
                return fallback
            return number

        if key in self.FLOAT_SETTINGS:
            fallback, low, high = self.FLOAT_SETTINGS[key]
            try:
                number = float(value)
            except (ValueError, TypeError):
                logger.warning(f"Invalid {key} in settings: {value!r}, using default: {fallback}")
                return fallback
            if not low <= number <= high:
                logger.warning(f"{key}={number} outside [{low}, {high}], using default: {fallback}")
                return fallback
            return number

        if key == "output_format" and value not in self.VALID_OUTPUT_FORMATS:
            logger.warning(f"Invalid output_format in settings: {value}, using default: {FORMAT_CSV}")
            return FORMAT_CSV

        return value

    def set(self, key, value):
        """Validate and store a setting"""
        if key in self.INTEGER_SETTINGS:
            _, low, high = self.INTEGER_SETTINGS[key]
            try:
                value = int(value)
            except (ValueError, TypeError):
                raise ValueError(f"{key} must be an integer, got {value!r}")
            if not low <= value <= high:
                raise ValueError(f"{key} must be between {low} and {high}, got {value}")
        elif key in self.FLOAT_SETTINGS:
            _, low, high = self.FLOAT_SETTINGS[key]
            try:
                value = float(value)
            except (ValueError, TypeError):
                raise ValueError(f"{key} must be a number, got {value!r}")
            if not low <= value <= high:
                raise ValueError(f"{key} must be between {low} and {high}, got {value}")
        elif key == "output_format" and value not in self.VALID_OUTPUT_FORMATS:
            raise ValueError(f"Invalid output format: {value}. Valid options: {', '.join(self.VALID_OUTPUT_FORMATS)}")

        logger.info(f"Setting {key} to {value}")
        self.settings.setValue(key, value)
        self.settings.sync()

    def save(self):
        self.settings.sync()

    def threads(self):
        """Worker thread count; the environment variable wins over stored settings."""
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw is not None:
            try:
                threads = int(raw)
                if threads >= 1:
                    return threads
            except ValueError:
                pass
            logger.warning(f"Ignoring invalid {THREADS_ENV_VAR}={raw!r}")
        return self.get("threads", DEFAULT_THREADS)
