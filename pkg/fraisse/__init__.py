"""Fraisse workbench: finite structures, amalgamation and zero-one law experiments."""

from fraisse.constants import APP_VERSION

__version__ = APP_VERSION
