"""Generalized-convexity checks for isotropic planar energies on GL+(2)."""
from .builtin import (
    ADM_CONVEX,
    ADM_POLYCONVEX,
    ADM_RANK_ONE,
    adm,
    aubert,
    by_name,
    determinant_energy,
    frobenius_squared,
    silhavy_energy,
    w0,
)
from .energy import (
    DomainGrid,
    OrderedSVEnergy,
    ScalarFunction,
    VolIsoSplitEnergy,
    as_ordered,
    eval_entries,
    eval_matrix,
    h_function,
    ordered_partials,
    split_to_ordered,
    unordered_h,
    validate_partials,
)
from .errors import (
    ConvexLabError,
    DomainError,
    ParseError,
    PreconditionError,
    SeamError,
    SeparationError,
    SmoothnessError,
)
from .expr import load_energy_file, parse_energy_text
from .planar import (
    Mat2,
    OrderedSV,
    RankOneDir,
    boundary_distance,
    linear_distortion,
    rank_one_matrix,
    rot,
    rotation_angle,
    rotation_power,
    singular_values,
    svd_ordered,
)
from .polyconvexity import (
    CInterval,
    FalsifyResult,
    PolyWitness,
    c_interval,
    feasible_interval,
    minorant_residual,
    polyconvexity_falsify,
    required_c_bound,
)
from .rank_one import (
    convexity_scan,
    infimum_t2_g2,
    rank_one_scan,
    rank_one_second_difference,
    split_rank_one_criterion,
)
from .report import CheckReport, contour_sheet, contour_svg, reproduce_paper
from .sublevel import (
    CompactnessReport,
    SublevelPath,
    aubert_connect_path,
    compactness_check,
    connect_path,
    grid_connectivity,
    growth_check,
    q_convexity_1d,
)

__version__ = "0.1.0"

__all__ = [
    "load_energy_file",
    "parse_energy_text",
    "CheckReport",
    "contour_sheet",
    "contour_svg",
    "reproduce_paper",
    "ADM_CONVEX",
    "ADM_POLYCONVEX",
    "ADM_RANK_ONE",
    "adm",
    "aubert",
    "by_name",
    "determinant_energy",
    "frobenius_squared",
    "silhavy_energy",
    "w0",
    "DomainGrid",
    "OrderedSVEnergy",
    "ScalarFunction",
    "VolIsoSplitEnergy",
    "as_ordered",
    "eval_entries",
    "eval_matrix",
    "h_function",
    "ordered_partials",
    "split_to_ordered",
    "unordered_h",
    "validate_partials",
    "ConvexLabError",
    "DomainError",
    "ParseError",
    "PreconditionError",
    "SeamError",
    "SeparationError",
    "SmoothnessError",
    "Mat2",
    "OrderedSV",
    "RankOneDir",
    "boundary_distance",
    "linear_distortion",
    "rank_one_matrix",
    "rot",
    "rotation_angle",
    "rotation_power",
    "singular_values",
    "svd_ordered",
    "CInterval",
    "FalsifyResult",
    "PolyWitness",
    "c_interval",
    "feasible_interval",
    "minorant_residual",
    "polyconvexity_falsify",
    "required_c_bound",
    "convexity_scan",
    "infimum_t2_g2",
    "rank_one_scan",
    "rank_one_second_difference",
    "split_rank_one_criterion",
    "CompactnessReport",
    "SublevelPath",
    "aubert_connect_path",
    "compactness_check",
    "connect_path",
    "grid_connectivity",
    "growth_check",
    "q_convexity_1d",
]
