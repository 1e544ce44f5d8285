"""Microscopic solver on the perforated box.

Builds the staggered grid from a tiled PerforatedDomain and drives the
shared IMEX stepper with the microscopic couplings: identity mobilities,
capillary coupling and phase-energy weight lambda_eps, and body force
scaled by sqrt(lambda_eps).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .fields import ViscosityModel
from .geometry import PerforatedDomain
from .grid import StaggeredGrid
from .stepper import EnergyTrace, PhaseFlowStepper, SourceModel


@dataclass
class MicroParams:
    """Physical and numerical parameters of a microscopic run."""

    lambda_eps: float = 1.0
    A: ViscosityModel = field(default_factory=lambda: ViscosityModel.isotropic())
    source: SourceModel = field(default_factory=SourceModel.linear)
    force: object = None          # (gx, gy) constants or callable t -> (gx, gy)
    dt: float = 1e-3
    T_end: float = 1.0
    S0: float = 2.0

    def validate(self):
        if self.lambda_eps <= 0:
            raise ConfigError("lambda_eps must be positive")
        if self.dt <= 0 or self.T_end <= 0:
            raise ConfigError("dt and T_end must be positive")
        if self.dt * self.source.c2 > 0.5:
            raise ConfigError(
                "dt too large for the source stiffness: need dt*c2 <= 0.5")
        if self.S0 < 0:
            raise ConfigError("S0 must be nonnegative")


def micro_grid(domain: PerforatedDomain) -> StaggeredGrid:
    """Box staggered grid over the pore part of a tiled domain."""
    return StaggeredGrid(domain.global_mask, domain.h, periodic=False)


def make_micro_stepper(domain, params: MicroParams) -> PhaseFlowStepper:
    params.validate()
    grid = micro_grid(domain)
    lam = params.lambda_eps
    return PhaseFlowStepper(
        grid,
        A=params.A,
        dt=params.dt,
        S0=params.S0,
        source=params.source,
        conv_coef=1.0,
        adv_coef=1.0,
        kort_coef=lam,
        phase_weight=lam,
        force=params.force,
        force_scale=np.sqrt(lam),
        eps=domain.eps,
    )


def smooth_phase(grid, amplitude=0.5, kmax=3, seed=0):
    """Seeded smooth random initial phase, built from wall-compatible modes.

    Uses cos(pi k x) cos(pi l y) modes, which have zero normal derivative on
    the outer walls; the amplitude is the resulting sup norm.
    """
    rng = np.random.default_rng(seed)
    X, Y = grid.cell_centers()
    phi = np.zeros_like(X)
    for k in range(kmax + 1):
        for l in range(kmax + 1):
            if k == 0 and l == 0:
                continue
            phi += rng.standard_normal() * np.cos(np.pi * k * X) \
                * np.cos(np.pi * l * Y)
    peak = np.abs(phi[grid.mask]).max()
    if peak > 0:
        phi *= amplitude / peak
    return np.where(grid.mask, phi, 0.0)


def uniform_phase(grid, value=0.5):
    return np.where(grid.mask, value, 0.0)


def run_micro(domain, params: MicroParams, phi0=None, u0=None,
              snapshot_times=(), trace=None):
    """March the microscopic system to T_end.

    Returns (final_state, trace, snapshots) where snapshots maps each
    requested time to the state reached at the nearest step.
    """
    stepper = make_micro_stepper(domain, params)
    if trace is None:
        trace = EnergyTrace()
    state = stepper.initial_state(phi0=phi0, u0=u0)
    state, snaps = stepper.run(state, params.T_end, trace=trace,
                               snapshot_times=snapshot_times)
    return state, trace, snaps
