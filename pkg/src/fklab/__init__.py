"""fklab: a desk-scale laboratory for Frenkel-Kontorova chains in periodic,
torus, and Beatty-quasicrystal environments.

Modules: environments (hulls, patterns, return times), towers (Kakutani-Rohlin
induction), lagrangians (model catalog), chain_opt (chain minimization and
Aubry order), mane (cocycle tables and calibration), holonomic_lp (finite
measure LP with dual), cli (config-driven front end).
"""

from ._accel import USE_NUMBA
from .chain_opt import (
    Chain,
    GridSpec,
    GroundEnergyEstimate,
    MinimizeResult,
    aubry_exchange_repair,
    crossing_gain,
    ground_energy,
    make_chain,
    minimize_fixed,
    minimize_free,
    structure_report,
)
from .environments import (
    CylinderSpec,
    EnvPoint,
    Pattern,
    PointSet,
    beatty_points,
    canonical_point_section,
    cylinder_at,
    hull_distance,
    pattern_at,
    pattern_equal,
    return_times,
    translate_env,
    transverse_frequency,
)
from .errors import (
    ConfigError,
    DomainError,
    FKError,
    InsufficientDataError,
    NumericalFailure,
    ResourceError,
)
from .exact import AlphaValue
from .holonomic_lp import (
    DiscreteMeasure,
    DualPotential,
    LPProblem,
    discretize_circle,
    mather_support,
    solve_dual,
    solve_primal,
    support_projection,
)
from .lagrangians import (
    LagrangianSpec,
    chain_energy,
    circle_model,
    coercivity_probe,
    energy,
    equivariant_potential,
    spring_value,
    sturm_model,
    torus_model,
    twist_defect,
)
from .mane import (
    CalibrationReport,
    ManeTable,
    RotationReport,
    calibrate_window,
    cocycle_defects,
    equidistribution_counts,
    grid_sensitivity,
    mane_table,
    phi_lookup,
    rotation_number,
)
from .towers import HomologyMatrix, Tower, induce_tower, level0_tower, tower_measure_residual

__version__ = "0.1.0"
