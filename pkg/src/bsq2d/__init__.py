"""Pseudo-spectral toolkit for a dispersive 2D Boussinesq-type system on the torus.

Submodules
----------
spectral, littlewood_paley, model, good_unknowns, phases
    Fourier grids, dyadic multipliers, the primitive system, the
    symmetrized unknowns and the phase-function analysis.
integrators, experiment
    Time stepping, diagnostics, lifespan sweeps and the finite-difference
    consistency check.
probes, verify, io, plotting, cli
    Numerical probes, invariant suites, output and the command line.
"""

from .experiment import (
    ExperimentPlan,
    RunSpec,
    lifespan_sweep,
    simulate,
    symmetrize_consistency,
)
from .integrators import IntegratorConfig, Scheme, Stepper, step
from .spectral import GridSpec
from .verify import verify

__version__ = "0.1.0"

__all__ = [
    "ExperimentPlan",
    "GridSpec",
    "IntegratorConfig",
    "RunSpec",
    "Scheme",
    "Stepper",
    "lifespan_sweep",
    "simulate",
    "step",
    "symmetrize_consistency",
    "verify",
    "__version__",
]
