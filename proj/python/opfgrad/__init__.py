"""DC-OPF solution operator, binding regions and Jacobians.

Indices (generators, loads, branches) are 0-based here; the command-line
tool uses 1-based numbering.
"""

from ._core import (
    BudgetExceeded,
    Case,
    ConstructionFailed,
    DependentSets,
    Infeasible,
    InvalidInput,
    MultipleOptima,
    RegionBoundary,
    SingularCombo,
    closed_form_jacobian,
    conic_jacobian,
    construct,
    enumerate_combos,
    fd_jacobian,
    load_case,
    parse_case,
    scan_load_plane,
    solve,
    worst_case,
)

__all__ = [
    "BudgetExceeded",
    "Case",
    "ConstructionFailed",
    "DependentSets",
    "Infeasible",
    "InvalidInput",
    "MultipleOptima",
    "RegionBoundary",
    "SingularCombo",
    "closed_form_jacobian",
    "conic_jacobian",
    "construct",
    "enumerate_combos",
    "fd_jacobian",
    "load_case",
    "parse_case",
    "scan_load_plane",
    "solve",
    "worst_case",
]
