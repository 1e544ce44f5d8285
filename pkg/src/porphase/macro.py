"""Homogenized solvers on the unperforated box.

The effective tensors from the cell problems replace the microscopic
coefficients.  For lam > 0 the macroscopic system keeps convection and
phase advection with coefficient sqrt(lam); for lam = 0 both terms are
structurally absent (not merely multiplied by zero), giving the limiting
Stokes-type model.  The capillary coupling and the phase energy carry
unit weight in both regimes.
"""

from dataclasses import dataclass, field

import numpy as np

from .cell_problems import EffectiveTensors
from .errors import ConfigError
from .grid import StaggeredGrid
from .stepper import EnergyTrace, PhaseFlowStepper, SourceModel


@dataclass
class MacroParams:
    """Parameters of a homogenized run (lam is the limit of lambda_eps)."""

    lam: float = 1.0
    tensors: EffectiveTensors = field(
        default_factory=EffectiveTensors.identity)
    source: SourceModel = field(default_factory=SourceModel.linear)
    force: object = None
    dt: float = 1e-3
    T_end: float = 1.0
    S0: float = 2.0

    def validate(self):
        if self.lam < 0:
            raise ConfigError("lam must be nonnegative")
        if self.dt <= 0 or self.T_end <= 0:
            raise ConfigError("dt and T_end must be positive")
        if self.dt * self.source.c2 > 0.5:
            raise ConfigError(
                "dt too large for the source stiffness: need dt*c2 <= 0.5")


def macro_grid(n: int) -> StaggeredGrid:
    """Unperforated box grid with n cells per side."""
    return StaggeredGrid(np.ones((n, n), dtype=bool), 1.0 / n, periodic=False)


def make_macro_stepper(n, params: MacroParams) -> PhaseFlowStepper:
    params.validate()
    grid = macro_grid(n)
    T = params.tensors
    root = np.sqrt(params.lam)
    return PhaseFlowStepper(
        grid,
        A=T.A_hom,
        dt=params.dt,
        S0=params.S0,
        source=params.source,
        B_mat=T.B_hom,
        C_mat=T.C_hom,
        conv_coef=root,       # exactly zero => convection never assembled
        adv_coef=root,
        kort_coef=1.0,
        phase_weight=1.0,
        force=params.force,
        force_scale=1.0,
    )


def run_macro(n, params: MacroParams, phi0=None, u0=None,
              snapshot_times=(), trace=None):
    """March the homogenized system to T_end on an n x n box."""
    stepper = make_macro_stepper(n, params)
    if trace is None:
        trace = EnergyTrace()
    state = stepper.initial_state(phi0=phi0, u0=u0)
    state, snaps = stepper.run(state, params.T_end, trace=trace,
                               snapshot_times=snapshot_times)
    return state, trace, snaps
