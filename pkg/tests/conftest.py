"""
tests/conftest.py - Pytest configuration for fraisse tests

This file provides common fixtures and setup for all tests.
"""

import os
import sys
import pytest
import logging

# Add parent directory to path to import modules from fraisse
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from fraisse.classes.catalog import catalog
from fraisse.enumeration import clear_level_tables
from fraisse.structures.signature import Signature
from fraisse.structures.structure import FinStructure


# Configure logging for tests
@pytest.fixture(scope="session", autouse=True)
def configure_logging():
    """Configure logging for tests"""
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


@pytest.fixture(scope="module", autouse=True)
def fresh_level_tables():
    """Level tables are cached per class; start every module from scratch"""
    clear_level_tables()
    yield
    clear_level_tables()


@pytest.fixture
def graph_signature():
    """One binary relation E on sort V"""
    return Signature.single_sorted({"E": 2})


@pytest.fixture
def graphs():
    return catalog("graphs")


@pytest.fixture
def triangle_free():
    return catalog("triangle-free")


@pytest.fixture
def path3(graph_signature):
    """The path 0 - 1 - 2 as a symmetric irreflexive graph"""
    return FinStructure.build(graph_signature, 3, {"E": [(0, 1), (1, 0), (1, 2), (2, 1)]})


@pytest.fixture
def triangle(graph_signature):
    edges = [(i, j) for i in range(3) for j in range(3) if i != j]
    return FinStructure.build(graph_signature, 3, {"E": edges})


@pytest.fixture
def make_graph(graph_signature):
    """Build a graph on n vertices from a list of unordered pairs"""
    def build(n, edges):
        facts = [(i, j) for i, j in edges] + [(j, i) for i, j in edges]
        return FinStructure.build(graph_signature, n, {"E": facts})
    return build


# Mock for settings
class MockSettings:
    """Mock Settings class for testing"""
    def __init__(self, **values):
        self.settings = dict(values)

    def get(self, key, default=None):
        return self.settings.get(key, default)

    def set(self, key, value):
        self.settings[key] = value

    def threads(self):
        return self.settings.get("threads", 1)


@pytest.fixture
def mock_settings():
    """Fixture providing a mock Settings instance"""
    return MockSettings()
