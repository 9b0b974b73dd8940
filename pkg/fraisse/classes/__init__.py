"""Class specifications and their constraints.

The catalog and the hereditary check are imported from their modules,
since they depend on enumeration.
"""

from fraisse.classes.constraints import (
    Constraint,
    Equivalence,
    ForbiddenInduced,
    Labeling,
    Local,
    Parametric,
    Violation,
)
from fraisse.classes.spec import ClassSpec

__all__ = [
    "ClassSpec",
    "Constraint",
    "Equivalence",
    "ForbiddenInduced",
    "Labeling",
    "Local",
    "Parametric",
    "Violation",
]
