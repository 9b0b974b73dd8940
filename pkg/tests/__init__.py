"""
tests/__init__.py - Tests package for fraisse

This file makes the tests directory a proper Python package,
allowing for better organization and imports.
"""
