"""Cardinality-constrained standard quadratic optimization toolkit.

Subpackages
-----------
linalg
    Symmetric-matrix primitives: svec/smat packing, eigendecomposition,
    PSD projection, spectrum-controlled random matrices.
conic
    Standard-form conic programs over products of nonnegative and PSD
    cones, a native operator-splitting solver, and an optional external
    solver hook.
formulations
    Builders for the four reduced/unreduced DNN relaxations of the sparse
    problem, the plain simplex-QP DNN relaxation, lifting maps between the
    reduced and full variable spaces, and feasibility checkers.
instances
    Generators for provably nontrivial sparse instances in three hardness
    families, plus their verification.
oracle
    Exact optima at desk scale by stationary-point enumeration.
bench / fileio / svgplot / cli
    Instance file I/O, experiment grids, CSV and SVG reporting, and the
    command-line front end.
"""

from . import bench, cli, conic, fileio, formulations, instances, linalg, oracle, svgplot
from .errors import (
    BudgetError,
    DimensionError,
    NumericalError,
    ParameterError,
    SstqpError,
    StatusError,
    UnsupportedBackendError,
)

__version__ = "0.1.0"

__all__ = [
    "bench",
    "cli",
    "conic",
    "fileio",
    "formulations",
    "instances",
    "linalg",
    "oracle",
    "svgplot",
    "BudgetError",
    "DimensionError",
    "NumericalError",
    "ParameterError",
    "SstqpError",
    "StatusError",
    "UnsupportedBackendError",
    "__version__",
]
