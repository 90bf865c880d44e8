"""Numerical laboratory for a 1-D coupled wave system with local Kelvin-Voigt damping.

Two wave fields on (-1, 1) are coupled through their velocities; one
carries viscoelastic (Kelvin-Voigt) damping on the subinterval (0, 1)
only.  The package discretizes the semigroup generator with P1 finite
elements in the energy norm and provides:

- time evolution by the contractive Crank-Nicolson scheme with an exact
  discrete energy balance (:mod:`kvwavelab.evolution`);
- resolvent-norm estimation along the imaginary axis, polynomial-bound
  probes, and a shift-invert spectrum probe (:mod:`kvwavelab.resolvent`);
- the closed-form resonant construction whose forcings stay bounded while
  the resolvent images blow up, ruling out exponential stability
  (:mod:`kvwavelab.quasimode`);
- a numerical audit of the printed large-n expansions behind that
  construction (:mod:`kvwavelab.audit`);
- a deterministic CLI (``kvwavelab``) emitting CSV tables and figures
  (:mod:`kvwavelab.cli`).
"""

from .audit import (
    AuditReport,
    AuditRow,
    ExpansionEntry,
    defining_identity_residual,
    expansion_audit,
    registered_names,
    trace_growth_report,
)
from .config import RunConfig, parse_config
from .errors import (
    DegenerateDenominator,
    DimensionMismatch,
    EmptySupport,
    EmptyWindow,
    EnergyBalanceError,
    KvwaveError,
    MeshTooCoarse,
    MisalignedSupport,
    NearSingularShift,
    NegativeD,
    NoConvergence,
    NonPositiveC,
    NonPositiveEnergy,
    ParseError,
    RegistryMiss,
    ResidualTooLarge,
    SingularMass,
    SinThetaDegenerate,
    ValidationError,
)
from .evolution import DecayFit, EnergyTrace, cn_step, fit_decay, simulate
from .fem import (
    GramMatrices,
    Mesh,
    ShiftedSolver,
    StateBlock,
    assemble,
    dissipation_rate,
    energy,
    energy_inner,
    energy_norm,
    generator_apply,
    make_mesh,
    random_state,
    shifted_solve,
    smooth_state,
)
from .model import DampingProfile, ModelParams, energy_density, validate_params
from .quasimode import (
    BlowupResult,
    ClosedFormSolution,
    QuasimodeConstants,
    blowup_experiment,
    closed_form_solution,
    constants,
    converged_mesh_rule,
    default_mesh_rule,
    forcing_eval,
    forcing_norm,
    interface_residuals,
    omega_n,
)
from .resolvent import (
    PolyBoundReport,
    ResolventSample,
    SpectrumEstimate,
    poly_bound_probe,
    resolvent_norm,
    scan,
    spectrum_probe,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "ModelParams",
    "DampingProfile",
    "validate_params",
    "energy_density",
    # discretization
    "Mesh",
    "GramMatrices",
    "StateBlock",
    "make_mesh",
    "assemble",
    "generator_apply",
    "energy",
    "energy_inner",
    "energy_norm",
    "dissipation_rate",
    "ShiftedSolver",
    "shifted_solve",
    "random_state",
    "smooth_state",
    # evolution
    "EnergyTrace",
    "DecayFit",
    "cn_step",
    "simulate",
    "fit_decay",
    # resolvent
    "ResolventSample",
    "PolyBoundReport",
    "SpectrumEstimate",
    "resolvent_norm",
    "scan",
    "poly_bound_probe",
    "spectrum_probe",
    # quasimode
    "QuasimodeConstants",
    "ClosedFormSolution",
    "BlowupResult",
    "omega_n",
    "constants",
    "closed_form_solution",
    "interface_residuals",
    "forcing_eval",
    "forcing_norm",
    "default_mesh_rule",
    "converged_mesh_rule",
    "blowup_experiment",
    # audit
    "ExpansionEntry",
    "AuditRow",
    "AuditReport",
    "registered_names",
    "expansion_audit",
    "defining_identity_residual",
    "trace_growth_report",
    # config
    "RunConfig",
    "parse_config",
    # errors
    "KvwaveError",
    "NonPositiveC",
    "NegativeD",
    "EmptySupport",
    "ValidationError",
    "MisalignedSupport",
    "SingularMass",
    "DimensionMismatch",
    "NearSingularShift",
    "ResidualTooLarge",
    "EmptyWindow",
    "NonPositiveEnergy",
    "EnergyBalanceError",
    "NoConvergence",
    "DegenerateDenominator",
    "SinThetaDegenerate",
    "MeshTooCoarse",
    "RegistryMiss",
    "ParseError",
]
