"""
Tests for the Settings class

Tests cover:
- Initialization and default values
- Get/set operations
- Type conversion (integers, floats)
- Validation of guards, thread counts and the output format
- The FRAISSE_THREADS environment override
"""

import pytest
from unittest.mock import patch

from fraisse.settings import Settings
from fraisse.constants import (
    DEFAULT_BELL_TABLE_MAX,
    DEFAULT_CERTIFY_MAX_LEVEL,
    DEFAULT_ENUMERATION_GUARD,
    DEFAULT_HALF_WIDTH_TARGET,
    DEFAULT_ISOMORPHISM_GUARD,
    DEFAULT_THREADS,
    DEFAULT_TRIAL_BATCH,
    FORMAT_CSV,
    THREADS_ENV_VAR,
)

pytestmark = pytest.mark.settings


@pytest.fixture
def temp_settings():
    """Create a temporary Settings instance for testing"""
    # Use a temporary application name to avoid conflicts
    with patch('fraisse.settings.APP_NAME', 'TestFraisseWorkbench'):
        settings = Settings()
        yield settings
        # Cleanup: remove the temporary settings
        settings.settings.clear()
        settings.settings.sync()


def test_settings_initialization(temp_settings):
    """Test that Settings initializes with default values"""
    assert temp_settings.get('enumeration_guard') == DEFAULT_ENUMERATION_GUARD
    assert temp_settings.get('isomorphism_guard') == DEFAULT_ISOMORPHISM_GUARD
    assert temp_settings.get('bell_table_max') == DEFAULT_BELL_TABLE_MAX
    assert temp_settings.get('certify_max_level') == DEFAULT_CERTIFY_MAX_LEVEL
    assert temp_settings.get('trial_batch') == DEFAULT_TRIAL_BATCH
    assert temp_settings.get('half_width_target') == DEFAULT_HALF_WIDTH_TARGET
    assert temp_settings.get('output_format') == FORMAT_CSV


def test_settings_get_with_default(temp_settings):
    """Test getting a non-existent setting returns default"""
    assert temp_settings.get('nonexistent_key', 'default_value') == 'default_value'
    assert temp_settings.get('nonexistent_key') is None


def test_settings_set_and_get(temp_settings):
    """Test setting and getting values"""
    temp_settings.set('enumeration_guard', 18)
    assert temp_settings.get('enumeration_guard') == 18

    temp_settings.set('output_format', 'json')
    assert temp_settings.get('output_format') == 'json'


def test_integer_conversion(temp_settings):
    """Test integer settings are properly converted"""
    temp_settings.set('trial_batch', '32')
    assert temp_settings.get('trial_batch') == 32
    assert isinstance(temp_settings.get('trial_batch'), int)

    # QSettings may hand back strings
    temp_settings.settings.setValue('isomorphism_guard', '6')
    assert temp_settings.get('isomorphism_guard') == 6


def test_float_conversion(temp_settings):
    """Test float settings are properly converted"""
    temp_settings.settings.setValue('half_width_target', '0.05')
    assert temp_settings.get('half_width_target') == pytest.approx(0.05)

    temp_settings.set('half_width_target', 0)
    assert temp_settings.get('half_width_target') == 0.0


def test_integer_validation(temp_settings):
    """Test range checks on integer settings"""
    with pytest.raises(ValueError, match="between 1 and 30"):
        temp_settings.set('enumeration_guard', 31)

    with pytest.raises(ValueError, match="between 2 and 8"):
        temp_settings.set('certify_max_level', 1)

    with pytest.raises(ValueError, match="must be an integer"):
        temp_settings.set('threads', 'many')

    # Out-of-range values in storage fall back to the default on get
    temp_settings.settings.setValue('enumeration_guard', '99')
    assert temp_settings.get('enumeration_guard') == DEFAULT_ENUMERATION_GUARD

    temp_settings.settings.setValue('trial_batch', 'lots')
    assert temp_settings.get('trial_batch') == DEFAULT_TRIAL_BATCH


def test_float_validation(temp_settings):
    """Test range checks on float settings"""
    with pytest.raises(ValueError, match="between"):
        temp_settings.set('half_width_target', 0.6)

    with pytest.raises(ValueError, match="must be a number"):
        temp_settings.set('half_width_target', 'narrow')

    temp_settings.settings.setValue('half_width_target', '-1')
    assert temp_settings.get('half_width_target') == DEFAULT_HALF_WIDTH_TARGET


def test_output_format_validation(temp_settings):
    """Test output_format setting validation"""
    for fmt in ['csv', 'json', 'table']:
        temp_settings.set('output_format', fmt)
        assert temp_settings.get('output_format') == fmt

    with pytest.raises(ValueError, match="Invalid output format"):
        temp_settings.set('output_format', 'xml')

    # Invalid format in storage should return csv on get
    temp_settings.settings.setValue('output_format', 'xml')
    assert temp_settings.get('output_format') == FORMAT_CSV


def test_threads_default(temp_settings, monkeypatch):
    """Test thread count comes from settings without the environment variable"""
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    assert temp_settings.threads() == DEFAULT_THREADS

    temp_settings.set('threads', 4)
    assert temp_settings.threads() == 4


def test_threads_environment_override(temp_settings, monkeypatch):
    """Test FRAISSE_THREADS wins over stored settings"""
    temp_settings.set('threads', 4)
    monkeypatch.setenv(THREADS_ENV_VAR, '8')
    assert temp_settings.threads() == 8

    # Invalid values are ignored
    monkeypatch.setenv(THREADS_ENV_VAR, 'zero')
    assert temp_settings.threads() == 4

    monkeypatch.setenv(THREADS_ENV_VAR, '0')
    assert temp_settings.threads() == 4


def test_save_syncs(temp_settings):
    """Test save() flushes to the backing store"""
    with patch.object(temp_settings, 'settings') as backend:
        temp_settings.save()
    backend.sync.assert_called_once()


def test_existing_values_survive_initialization(temp_settings):
    """Test defaults do not overwrite stored values"""
    temp_settings.set('isomorphism_guard', 5)
    temp_settings.init_default_settings()
    assert temp_settings.get('isomorphism_guard') == 5
