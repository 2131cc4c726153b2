"""Pointer networks, exact geometric solvers and TSP heuristics.

Indices are 1-based throughout; 0 is the end token in decoded sequences.
"""

try:
    from ._ptrgeo import *  # noqa: F401,F403  (installed wheel)
    from ._ptrgeo import __doc__ as _native_doc  # noqa: F401
except ImportError:
    # Development tree: the extension sits in the build directory instead.
    from _ptrgeo import *  # type: ignore  # noqa: F401,F403

__all__ = [
    "ArgumentError", "CapacityError", "ContractError", "Decoded", "DegenerateInputError",
    "DimensionError", "Example", "Model", "ParseError", "PtrgeoError", "SpecError",
    "TrainingError", "UnsupportedLengthError", "ValidationError",
    "a1", "a2", "a3", "area_coverage", "convex_hull", "coverage_fails", "delaunay",
    "evaluate", "generate", "held_karp", "hull_accuracy", "nearest_neighbor", "parse",
    "read_file", "serialize", "shoelace_area", "tour_length", "train",
    "triangulation_metrics", "tsp_metrics", "write_file",
]
