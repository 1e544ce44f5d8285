"""Shared IMEX time stepper for the coupled phase-field / flow systems.

One core drives both the microscopic system on the perforated box and the
homogenized systems on the unperforated box; they differ only in the
assembled operators and scalar coefficients:

  phase step   (phi_next - phi)/dt + a_adv * div(u phi_up) + G(phi)
                  = div(C grad mu_next)
               mu_next = f(phi) + S0 (phi_next - phi) - div(B grad phi_next)
  flow step    predictor with implicit viscosity div(A D(u)), explicit
               antisymmetrized convection (coefficient a_conv), explicit
               capillary force -a_kort * phi (C grad mu) using the updated
               phase fields, body force; then pressure projection.

The double well f(s) = s^3 - s is split convex/concave with an S0 shift,
which keeps the phase solve linear and gradient stable.  All constant
operators are factorized once per run.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fields import ScalarField, VectorField, ViscosityModel
from .linsolve import PinnedNeumannSolver, factorized

TRACE_COLUMNS = ("t", "T", "T_K", "T_F", "phi_mean", "u_l2",
                 "diss_residual", "div_residual")


def double_well(s):
    """F(s) = (s^2 - 1)^2 / 4."""
    return 0.25 * (s * s - 1.0) ** 2


def double_well_prime(s):
    return s ** 3 - s


@dataclass
class SourceModel:
    """Monotone bulk source G with G(0)=0 and c1 <= G' <= c2."""

    func: callable
    c1: float
    c2: float

    def __call__(self, s):
        return self.func(s)

    @classmethod
    def linear(cls, c=1.0):
        return cls(func=lambda s: c * s, c1=c, c2=c)

    @classmethod
    def bounded(cls, c1=0.5, c2=2.0):
        """G(s) = c1*s + (c2-c1)*tanh(s): derivative ranges over [c1, c2]."""
        a, b = c1, c2 - c1
        return cls(func=lambda s: a * s + b * np.tanh(s), c1=c1, c2=c2)


@dataclass
class FlowState:
    """Time-stepped unknowns: velocity, pressure, phase, potential."""

    u: VectorField
    p: ScalarField
    phi: ScalarField
    mu: ScalarField
    t: float = 0.0


@dataclass
class EnergyTrace:
    """Per-step diagnostics with the fixed CSV column order."""

    rows: list = field(default_factory=list)
    extras: list = field(default_factory=list)

    def append(self, row, extra=None):
        self.rows.append(tuple(float(row[c]) for c in TRACE_COLUMNS))
        self.extras.append(extra or {})

    def column(self, name):
        k = TRACE_COLUMNS.index(name)
        return np.array([r[k] for r in self.rows])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for r in self.rows:
                w.writerow([repr(v) for v in r])

    @classmethod
    def read_csv(cls, path):
        tr = cls()
        with open(path) as fh:
            rd = csv.reader(fh)
            header = next(rd)
            for line in rd:
                tr.rows.append(tuple(float(v) for v in line))
                tr.extras.append({})
        return tr


class PhaseFlowStepper:
    """IMEX stepper parameterized by the assembled operators and couplings."""

    def __init__(self, grid, *, A, dt, S0=2.0, source=None,
                 B_mat=None, C_mat=None, conv_coef=1.0, adv_coef=1.0,
                 kort_coef=1.0, phase_weight=1.0, force=None, force_scale=1.0,
                 eps=1.0):
        self.grid = grid
        self.dt = float(dt)
        self.S0 = float(S0)
        self.source = source or SourceModel.linear()
        self.B_mat = np.eye(2) if B_mat is None else np.asarray(B_mat, float)
        self.C_mat = np.eye(2) if C_mat is None else np.asarray(C_mat, float)
        self.conv_coef = float(conv_coef)
        self.adv_coef = float(adv_coef)
        self.kort_coef = float(kort_coef)
        self.phase_weight = float(phase_weight)
        self.force = force
        self.force_scale = float(force_scale)
        self.eps = float(eps)

        if isinstance(A, ViscosityModel):
            self.A_model = A
            A_cells = A.at_cells(grid, t=0.0, eps=eps)
            self.time_dependent_A = A.time_dependent
        else:
            self.A_model = None
            A_cells = np.asarray(A, dtype=float)
            self.time_dependent_A = False

        n = grid.npore
        self.LB = grid.aniso_laplacian(self.B_mat)
        self.LC = grid.aniso_laplacian(self.C_mat)
        M_ch = (sp.eye(n) / self.dt + self.LC @ self.LB
                - self.S0 * self.LC).tocsc()
        self._ch_solve = factorized(M_ch)
        self._build_viscous(A_cells)
        self.poisson = PinnedNeumannSolver(grid.L)
        self._force_vec_cache = None

    def _build_viscous(self, A_cells):
        g = self.grid
        self.K = g.viscous_matrix(A_cells)
        self._u_solve = factorized((sp.eye(g.nu) + self.dt * self.K).tocsc())

    def _force_vec(self, t):
        if self.force is None:
            return None
        if callable(self.force):
            gx, gy = self.force(t)
        else:
            gx, gy = self.force
        g = self.grid
        if np.ndim(gx) == 0:
            if self._force_vec_cache is None:
                vec = np.empty(g.nu)
                vec[: g.nux] = gx
                vec[g.nux:] = gy
                self._force_vec_cache = vec
            return self.force_scale * self._force_vec_cache
        return self.force_scale * g.gather_faces(gx, gy)

    # ------------------------------------------------------------------
    def initial_state(self, phi0=None, u0=None):
        g = self.grid
        phi = ScalarField.zeros(g, role="phi") if phi0 is None else \
            ScalarField(g, np.where(g.mask, phi0, 0.0), role="phi")
        u = VectorField.zeros(g) if u0 is None else \
            VectorField(g, u0[0], u0[1])
        if u0 is not None:
            # project the supplied velocity onto the discretely div-free space
            uvec = u.vec()
            q = self.poisson.solve(g.G.T @ uvec)
            u = VectorField.from_vec(g, uvec - g.G @ q)
        phivec = g.gather_cells(phi.values)
        mu = ScalarField(
            g,
            g.scatter_cells(double_well_prime(phivec) - self.LB @ phivec),
            role="mu",
        )
        return FlowState(u=u, p=ScalarField.zeros(g, role="p"),
                         phi=phi, mu=mu, t=0.0)

    def ch_substep(self, state):
        """Linear phase solve; returns (phi_next_vec, mu_next_vec)."""
        g = self.grid
        phi = g.gather_cells(state.phi.values)
        rhs = phi / self.dt - self.source(phi)
        if self.adv_coef != 0.0:
            adv = g.advect_upwind(state.u.ux, state.u.uy, state.phi.values)
            rhs -= self.adv_coef * g.gather_cells(adv)
        fphi = double_well_prime(phi)
        rhs += self.LC @ (fphi - self.S0 * phi)
        phi_next = self._ch_solve(rhs)
        mu_next = fphi + self.S0 * (phi_next - phi) - self.LB @ phi_next
        return phi_next, mu_next

    def ns_substep(self, state, phi_next, mu_next, t):
        """Predictor + projection; returns (u_vec, p_vec, conv_energy)."""
        g = self.grid
        uvec = state.u.vec()
        expl = np.zeros(g.nu)
        conv_energy = 0.0
        if self.conv_coef != 0.0:
            B = g.convection_matrix(state.u.ux, state.u.uy)
            conv = 0.5 * (B @ uvec - B.T @ uvec)
            conv_energy = float(conv @ uvec) * g.cell_volume()
            expl -= self.conv_coef * conv
        if self.kort_coef != 0.0:
            phi_full = g.scatter_cells(phi_next)
            mu_full = g.scatter_cells(mu_next)
            expl -= self.kort_coef * g.capillary_force(phi_full, mu_full,
                                                       C=self.C_mat)
        fvec = self._force_vec(t)
        if fvec is not None:
            expl += fvec
        if self.time_dependent_A:
            self._build_viscous(self.A_model.at_cells(self.grid, t=t,
                                                      eps=self.eps))
        ustar = self._u_solve(uvec + self.dt * expl)
        q = self.poisson.solve(g.G.T @ ustar)
        u_next = ustar - g.G @ q
        p = q / self.dt
        return u_next, p, conv_energy

    def step(self, state, trace=None):
        g = self.grid
        t = state.t
        phi_next, mu_next = self.ch_substep(state)
        u_next, p_next, conv_energy = self.ns_substep(state, phi_next,
                                                      mu_next, t)
        t_next = t + self.dt
        new = FlowState(
            u=VectorField.from_vec(g, u_next, t=t_next),
            p=ScalarField(g, g.scatter_cells(p_next), role="p", t=t_next),
            phi=ScalarField(g, g.scatter_cells(phi_next), role="phi",
                            t=t_next),
            mu=ScalarField(g, g.scatter_cells(mu_next), role="mu", t=t_next),
            t=t_next,
        )
        if trace is not None:
            self.record(trace, state, new, conv_energy)
        return new

    # ------------------------------------------------------------------
    def energy(self, state):
        """(T_total, T_kinetic, T_free) with the configured weights."""
        g = self.grid
        vol = g.cell_volume()
        uvec = state.u.vec()
        T_K = 0.5 * float(uvec @ uvec) * vol
        phi = g.gather_cells(state.phi.values)
        grad_energy = -float(phi @ (self.LB @ phi)) * vol
        T_F = self.phase_weight * (0.5 * grad_energy
                                   + float(np.sum(double_well(phi))) * vol)
        return T_K + T_F, T_K, T_F

    def dissipation_terms(self, state):
        """Viscous + phase dissipation rate and force power at a state."""
        g = self.grid
        vol = g.cell_volume()
        uvec = state.u.vec()
        visc = float(uvec @ (self.K @ uvec)) * vol
        mu = g.gather_cells(state.mu.values)
        phase = -self.phase_weight * float(mu @ (self.LC @ mu)) * vol
        fvec = self._force_vec(state.t)
        power = float(fvec @ uvec) * vol if fvec is not None else 0.0
        return visc, phase, power

    def record(self, trace, old, new, conv_energy=0.0):
        T1, _, _ = self.energy(old)
        T2, T_K, T_F = self.energy(new)
        visc, phase, power = self.dissipation_terms(new)
        div_res = float(np.abs(self.grid.div(new.u.ux, new.u.uy)).max())
        trace.append(
            {
                "t": new.t,
                "T": T2,
                "T_K": T_K,
                "T_F": T_F,
                "phi_mean": new.phi.mean(),
                "u_l2": new.u.l2(),
                "diss_residual": (T2 - T1) / self.dt + visc + phase - power,
                "div_residual": div_res,
            },
            extra={"conv_energy": conv_energy},
        )

    def run(self, state, T_end, trace=None, snapshot_times=(),
            snapshot_cb=None):
        """March to T_end; optionally collect state copies near given times."""
        nsteps = int(round(T_end / self.dt))
        snaps = {}
        pending = sorted(snapshot_times)
        for _ in range(nsteps):
            state = self.step(state, trace=trace)
            while pending and state.t >= pending[0] - 0.5 * self.dt:
                snaps[pending.pop(0)] = state
            if snapshot_cb is not None:
                snapshot_cb(state)
        return state, snaps
