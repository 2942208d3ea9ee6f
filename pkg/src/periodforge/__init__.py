"""Weierstrass data, period problems, and geometry for families of
embedded doubly periodic minimal surfaces.

The usual flow: pick a family (`FamilySpec`), solve its period problem
(`solve_period_problem` or `continue_family`), then hand the solved
parameters to the geometry layer (`build_mesh`, `develop_flat`,
`lattice_periods`) or persist them (`store`).
"""

from __future__ import annotations

from .curve import (
    BranchDivisor,
    BranchPointError,
    EndAngleClass,
    PairedPoint,
    PoleError,
    Role,
    SymmetryGroup,
    WeierstrassData,
    end_gauss_values,
    w_on_axis,
    w_squared,
)
from .families import (
    FamilyKind,
    FamilySpec,
    OrderingError,
    StructuralError,
    PeriodEquation,
    PeriodSystem,
    close_end_constraint,
    default_seed,
    instantiate,
    residual_vector,
    table_seed,
)
from .geometry import (
    ClearanceError,
    FlatPolygon,
    LatticePeriods,
    Mesh,
    MeshError,
    MeshGrid,
    SeamRun,
    build_mesh,
    cone_angle_defects,
    develop_flat,
    end_normal_bound,
    export_flat_svg,
    export_flat_text,
    export_obj,
    immerse,
    lattice_periods,
    mesh_diameter,
    stadium_loop,
)
from .numerics import (
    ConfigurationError,
    parse_decimal,
    to_decimal_string,
    working_precision,
)
from .quadrature import FormKind, QuadratureError, Segment, period_integral
from .solver import (
    Branch,
    JacobianError,
    NonConvergenceError,
    Solution,
    SolveOptions,
    SolverError,
    continue_family,
    jacobian,
    solve_period_problem,
)
from .store import (
    SolutionRecord,
    StoreError,
    bundled_catalog,
    bundled_paper_tables,
    bundled_record,
    bundled_solved_records,
    load,
    record_from_solution,
    save,
    serialize,
)

__version__ = "0.1.0"

__all__ = [
    "BranchDivisor",
    "Branch",
    "BranchPointError",
    "ClearanceError",
    "ConfigurationError",
    "EndAngleClass",
    "FamilyKind",
    "FamilySpec",
    "FlatPolygon",
    "FormKind",
    "JacobianError",
    "LatticePeriods",
    "Mesh",
    "MeshError",
    "MeshGrid",
    "NonConvergenceError",
    "OrderingError",
    "PairedPoint",
    "PeriodEquation",
    "PeriodSystem",
    "PoleError",
    "QuadratureError",
    "Role",
    "SeamRun",
    "Segment",
    "Solution",
    "SolutionRecord",
    "SolveOptions",
    "SolverError",
    "StoreError",
    "StructuralError",
    "SymmetryGroup",
    "WeierstrassData",
    "build_mesh",
    "bundled_catalog",
    "bundled_paper_tables",
    "bundled_record",
    "bundled_solved_records",
    "close_end_constraint",
    "cone_angle_defects",
    "continue_family",
    "default_seed",
    "develop_flat",
    "end_gauss_values",
    "end_normal_bound",
    "export_flat_svg",
    "export_flat_text",
    "export_obj",
    "immerse",
    "instantiate",
    "jacobian",
    "lattice_periods",
    "load",
    "mesh_diameter",
    "parse_decimal",
    "period_integral",
    "record_from_solution",
    "residual_vector",
    "save",
    "serialize",
    "solve_period_problem",
    "stadium_loop",
    "table_seed",
    "to_decimal_string",
    "w_on_axis",
    "w_squared",
    "working_precision",
]
