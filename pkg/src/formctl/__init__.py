"""Robust time-varying formation control for disturbed second-order multi-agent systems.

Builds interaction topologies, checks formation feasibility, synthesizes
protocol gains from a closed-form Riccati kernel, simulates the full closed
loop with per-agent disturbance observers, and decomposes the resulting
formation-center motion into its initial-condition, disturbance, and
formation-induced parts.
"""

from .center import (
    CenterDecomposition,
    CenterVerification,
    compute_c0,
    compute_cf,
    compute_cz,
    decompose,
    kernel_exp,
    verify_decomposition,
)
from .config import ScenarioConfig, load_config, parse_config
from .design import DesignReport, design
from .errors import (
    ConfigError,
    FormatError,
    FormationControlError,
    Infeasible,
    InvalidLambda2,
    NonFiniteState,
    NoSpanningTree,
    NotHurwitz,
    NotPositiveDefinite,
)
from .eso import EsoParams, EsoState, eso_derivative, residual_gain
from .graph import Digraph, LaplacianSpectrum, build_laplacian, has_spanning_tree, spectrum
from .riccati import (
    HurwitzRecord,
    PlantParams,
    RiccatiSolution,
    are_residual,
    gain,
    lyapunov_certificate,
    plant_kernel,
    solve_are,
    verify_hurwitz,
)
from .signals import (
    AxisSignal,
    DisturbanceSpec,
    FormationSpec,
    Sinusoid,
    eval_disturbance,
    eval_formation,
    feasibility_residual,
    hexagon_formation,
)
from .simulator import (
    ClosedLoop,
    Scenario,
    SimulationTrace,
    SystemState,
    control_input,
    rk4_step,
    simulate,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "AxisSignal",
    "CenterDecomposition",
    "CenterVerification",
    "ClosedLoop",
    "ConfigError",
    "DesignReport",
    "Digraph",
    "DisturbanceSpec",
    "EsoParams",
    "EsoState",
    "FormatError",
    "FormationControlError",
    "FormationSpec",
    "HurwitzRecord",
    "Infeasible",
    "InvalidLambda2",
    "LaplacianSpectrum",
    "NoSpanningTree",
    "NonFiniteState",
    "NotHurwitz",
    "NotPositiveDefinite",
    "PlantParams",
    "RiccatiSolution",
    "Scenario",
    "ScenarioConfig",
    "SimulationTrace",
    "Sinusoid",
    "SystemState",
    "are_residual",
    "build_laplacian",
    "compute_c0",
    "compute_cf",
    "compute_cz",
    "control_input",
    "decompose",
    "design",
    "eso_derivative",
    "eval_disturbance",
    "eval_formation",
    "feasibility_residual",
    "gain",
    "has_spanning_tree",
    "hexagon_formation",
    "kernel_exp",
    "load_config",
    "lyapunov_certificate",
    "parse_config",
    "plant_kernel",
    "residual_gain",
    "rk4_step",
    "simulate",
    "solve_are",
    "spectrum",
    "step",
    "verify_decomposition",
    "verify_hurwitz",
]
