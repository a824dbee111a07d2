"""Graph isomorphism via a doubly stochastic relaxation solved by Frank–Wolfe."""

from .config import SolverConfig
from .graphs import (
    GraphFormatError,
    Permutation,
    WeightedGraph,
    apply_permutation,
    generate,
    read_graph,
    verify_isomorphism,
    write_graph,
)
from .relaxation import HOperator, NullSpaceBasis, rank_of_h, sign_equations
from .solver import DimensionOverflowError, IsoVerdict, Verdict, check
from .spectral import GroupedSpectrum, compare_spectra, decompose

__all__ = [
    "DimensionOverflowError",
    "GraphFormatError",
    "GroupedSpectrum",
    "HOperator",
    "IsoVerdict",
    "NullSpaceBasis",
    "Permutation",
    "SolverConfig",
    "Verdict",
    "WeightedGraph",
    "apply_permutation",
    "check",
    "compare_spectra",
    "decompose",
    "generate",
    "rank_of_h",
    "read_graph",
    "sign_equations",
    "verify_isomorphism",
    "write_graph",
]
