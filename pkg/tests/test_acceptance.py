"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned; configurations (grids, time steps, data) are the
frozen reference setups.  Each criterion is computed independently of the
library's own report plumbing wherever possible.
"""

import numpy as np
import pytest

from porphase.cell_problems import (EffectiveTensors, coercivity_estimate,
                                    effective_tensors)
from porphase.geometry import build_unit_cell, tile_domain
from porphase.grid import StaggeredGrid
from porphase.linsolve import PinnedNeumannSolver
from porphase.macro import MacroParams, macro_grid, make_macro_stepper
from porphase.micro import (MicroParams, make_micro_stepper, micro_grid,
                            run_micro, smooth_phase, uniform_phase)
from porphase.stepper import EnergyTrace, SourceModel
from porphase.unfolding import compare_micro_macro, energy_convergence, unfold


def report(num, name, ok, details=""):
    verdict = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} ({name}): {verdict}  {details}")
    assert ok, f"acceptance criterion {num} ({name}) failed: {details}"


def macro_profile(X, Y):
    """Reference macroscopic initial phase for the studies."""
    return (0.5 + 0.2 * np.cos(np.pi * X) * np.cos(np.pi * Y)
            + 0.15 * np.sin(np.pi * X) + 0.1 * np.sin(np.pi * Y))


# ----------------------------------------------------------------------
def test_acceptance_1_tensor_identities():
    checks = []
    for n_y in (64, 128):
        cell = build_unit_cell(2, "disk", 0.25, n_y)
        _, T = effective_tensors(cell)
        evals = np.linalg.eigvalsh(T.B_hom)
        checks.append(np.abs(T.B_hom - T.C_hom).max() < 1e-8)
        checks.append(evals.min() > 0 and evals.max() <= 1.0 + 1e-12)
        checks.append(T.diagnostics["B_flux_vs_energy"] < 1e-7)
        checks.append(T.diagnostics["A_asymmetry"] < 1e-8)
        checks.append(coercivity_estimate(T.A_hom, n_samples=100, seed=0) > 0)
    cell0 = build_unit_cell(2, "disk", 0.0, 16)
    _, T0 = effective_tensors(cell0)
    empty_err = max(np.abs(T0.A_hom - 2.0 * np.eye(3)).max(),
                    np.abs(T0.B_hom - np.eye(2)).max(),
                    np.abs(T0.C_hom - np.eye(2)).max())
    checks.append(empty_err < 1e-10)
    report(1, "tensor identities", all(checks),
           f"empty-inclusion error {empty_err:.2e}")


# ----------------------------------------------------------------------
def test_acceptance_2_mass_law():
    cell = build_unit_cell(2, "disk", 0.25, 16)
    dom = tile_domain(cell, 4)
    g = micro_grid(dom)
    phi0 = uniform_phase(g, 0.5)

    dt = 0.01
    p = MicroParams(lambda_eps=1.0, dt=dt, T_end=2.0,
                    source=SourceModel.linear(1.0))
    _, tr, _ = run_micro(dom, p, phi0=phi0)
    t = tr.column("t")
    rel = np.abs(tr.column("phi_mean") - 0.5 * np.exp(-t)) \
        / (0.5 * np.exp(-t))
    exact_ok = rel.max() < 2 * dt

    dtb = 0.005
    pb = MicroParams(lambda_eps=1.0, dt=dtb, T_end=2.0,
                     source=SourceModel.bounded(0.5, 2.0))
    _, trb, _ = run_micro(dom, pb, phi0=phi0)
    tb = trb.column("t")
    pm = np.abs(trb.column("phi_mean"))
    slack = 2 * dtb
    bracket_ok = bool(
        (pm >= 0.5 * np.exp(-2.0 * tb) * (1 - slack)).all()
        and (pm <= 0.5 * np.exp(-0.5 * tb) * (1 + slack)).all())
    report(2, "mass law", exact_ok and bracket_ok,
           f"linear rel err {rel.max():.3e} (gate {2 * dt}), "
           f"bracket {'holds' if bracket_ok else 'violated'}")


# ----------------------------------------------------------------------
def test_acceptance_3_energy_dissipation():
    cell = build_unit_cell(2, "disk", 0.25, 32)
    dom = tile_domain(cell, 4)                    # eps = 1/4, 128^2 grid
    g = micro_grid(dom)
    p = MicroParams(lambda_eps=1.0, dt=0.004, T_end=0.2)
    stepper = make_micro_stepper(dom, p)
    state = stepper.initial_state(phi0=smooth_phase(g, 0.9, seed=42))
    T_prev = stepper.energy(state)[0]
    slack = 1e-10 * T_prev
    trace = EnergyTrace()
    max_inc, max_skew = -np.inf, 0.0
    for _ in range(50):
        state = stepper.step(state, trace=trace)
        T = stepper.energy(state)[0]
        max_inc = max(max_inc, T - T_prev)
        T_prev = T
    max_skew = max(abs(e["conv_energy"]) for e in trace.extras)
    ok = max_inc <= slack and max_skew <= 1e-12
    report(3, "energy dissipation", ok,
           f"max energy increase {max_inc:.2e} (slack {slack:.2e}), "
           f"max skew energy {max_skew:.2e}")


# ----------------------------------------------------------------------
def test_acceptance_4_sqrt_lambda_scaling():
    cell = build_unit_cell(2, "disk", 0.25, 16)
    dom = tile_domain(cell, 4)
    g = micro_grid(dom)
    X, Y = g.cell_centers()
    phi0 = np.where(g.mask, macro_profile(X, Y), 0.0)
    curves = []
    for lam_eps in (1.0, 0.25, 0.01):
        p = MicroParams(lambda_eps=lam_eps, dt=0.005, T_end=1.0,
                        force=(40.0, 15.0))
        _, tr, _ = run_micro(dom, p, phi0=phi0)
        curves.append(tr.column("u_l2") / np.sqrt(lam_eps))
    ref = max(np.abs(c).max() for c in curves)
    dev = max(np.abs(curves[i] - curves[j]).max()
              for i in range(3) for j in range(i + 1, 3)) / ref
    report(4, "sqrt-lambda scaling", dev < 0.25,
           f"relative sup deviation {dev:.4f} (gate 0.25)")


# ----------------------------------------------------------------------
def _run_study(lam, cell, tensors, slack=0.10):
    dt, T_end = 0.005, 0.5
    n_macro = 64
    gM = macro_grid(n_macro)
    XM, YM = gM.cell_centers()
    pM = MacroParams(lam=lam, tensors=tensors, dt=dt, T_end=T_end)
    stM = make_macro_stepper(n_macro, pM)
    sM = stM.initial_state(phi0=macro_profile(XM, YM))
    trM = EnergyTrace()
    sM, _ = stM.run(sM, T_end, trace=trM)

    phi_errs, energy_devs = [], []
    for m in (2, 4, 8):
        dom = tile_domain(cell, m)
        g = micro_grid(dom)
        X, Y = g.cell_centers()
        lam_eps = lam + dom.eps if lam > 0 else dom.eps
        p = MicroParams(lambda_eps=lam_eps, dt=dt, T_end=T_end)
        st, tr, _ = run_micro(dom, p,
                              phi0=np.where(g.mask, macro_profile(X, Y), 0.0))
        row = compare_micro_macro(st, sM, dom, lam_eps, g, gM)
        _, _, sup = energy_convergence(tr, trM, lam_eps, tensors.porosity)
        phi_errs.append(row["phi_error"])
        energy_devs.append(sup)

    def monotone(seq):
        return all(b <= a * (1 + slack) for a, b in zip(seq, seq[1:]))

    return phi_errs, energy_devs, monotone(phi_errs) and monotone(energy_devs)


def test_acceptance_5_eps_convergence_study():
    cell = build_unit_cell(2, "disk", 0.25, 32)
    _, tensors = effective_tensors(cell)
    p1, e1, ok1 = _run_study(1.0, cell, tensors)
    p0, e0, ok0 = _run_study(0.0, cell, tensors)
    report(5, "eps-convergence study", ok1 and ok0,
           f"lam=1 phi errs {[f'{v:.2e}' for v in p1]}, "
           f"energy devs {[f'{v:.2e}' for v in e1]}; "
           f"lam=0 phi errs {[f'{v:.2e}' for v in p0]}, "
           f"energy devs {[f'{v:.2e}' for v in e0]}")


# ----------------------------------------------------------------------
def test_acceptance_6_solver_equivalence():
    cell = build_unit_cell(2, "disk", 0.0, 64)
    dom = tile_domain(cell, 1)
    g = micro_grid(dom)
    phi0 = smooth_phase(g, 0.5, seed=7)
    dt = 0.002
    micro = make_micro_stepper(
        dom, MicroParams(lambda_eps=1.0, dt=dt, T_end=1.0,
                         force=(1.0, -0.3)))
    macro = make_macro_stepper(
        64, MacroParams(lam=1.0, tensors=EffectiveTensors.identity(),
                        dt=dt, T_end=1.0, force=(1.0, -0.3)))
    sm = micro.initial_state(phi0=phi0)
    sM = macro.initial_state(phi0=phi0)
    worst = 0.0
    for _ in range(100):
        sm = micro.step(sm)
        sM = macro.step(sM)
        diff = max(np.abs(sm.phi.values - sM.phi.values).max(),
                   np.abs(sm.u.ux - sM.u.ux).max(),
                   np.abs(sm.u.uy - sM.u.uy).max())
        worst = max(worst, diff)
    report(6, "solver equivalence", worst <= 1e-8,
           f"max per-step field difference {worst:.2e} over 100 steps")


# ----------------------------------------------------------------------
def test_acceptance_7_manufactured_convergence():
    # scalar Neumann solve
    pois_errs = []
    for n in (32, 64, 128):
        g = StaggeredGrid(np.ones((n, n), bool), 1.0 / n)
        X, Y = g.cell_centers()
        s_ex = np.cos(np.pi * X) * np.cos(2 * np.pi * Y)
        sol = PinnedNeumannSolver(g.L).solve(
            g.gather_cells(5 * np.pi ** 2 * s_ex))
        pois_errs.append(np.abs(g.scatter_cells(sol)
                                - (s_ex - s_ex.mean())).max())
    pois_orders = [np.log2(a / b) for a, b in zip(pois_errs, pois_errs[1:])]

    # gradient and divergence
    grad_errs, div_errs = [], []
    for n in (32, 64, 128):
        g = StaggeredGrid(np.ones((n, n), bool), 1.0 / n)
        X, Y = g.cell_centers()
        s = np.sin(np.pi * X) * np.cos(np.pi * Y)
        gx, _ = g.grad(s)
        xf = np.arange(n + 1) / n
        yc = (np.arange(n) + 0.5) / n
        Xf, Yc = np.meshgrid(xf, yc, indexing="ij")
        exact = np.pi * np.cos(np.pi * Xf) * np.cos(np.pi * Yc)
        grad_errs.append(np.abs(gx - exact)[g.fx_active].max())

        ux = np.sin(np.pi * Xf) ** 2 * np.sin(np.pi * Yc)
        Xc, Yf = np.meshgrid(yc, xf, indexing="ij")
        uy = np.sin(np.pi * Xc) * np.sin(np.pi * Yf) ** 2
        d = g.div(ux, uy)
        d_ex = (np.pi * np.sin(2 * np.pi * X) * np.sin(np.pi * Y)
                + np.pi * np.sin(np.pi * X) * np.sin(2 * np.pi * Y))
        inner = np.zeros((n, n), bool)
        inner[1:-1, 1:-1] = True
        div_errs.append(np.abs(d - d_ex)[inner].max())
    grad_orders = [np.log2(a / b) for a, b in zip(grad_errs, grad_errs[1:])]
    div_orders = [np.log2(a / b) for a, b in zip(div_errs, div_errs[1:])]

    # unperforated viscous solve: (I + K) u = f with
    # psi = (sin(pi x) sin(pi y))^2, u = (psi_y, -psi_x)
    visc_errs = []
    for n in (32, 64, 128):
        g = StaggeredGrid(np.ones((n, n), bool), 1.0 / n)
        xf = np.arange(n + 1) / n
        yc = (np.arange(n) + 0.5) / n
        Xf, Yc = np.meshgrid(xf, yc, indexing="ij")
        Xc, Yf = np.meshgrid(yc, xf, indexing="ij")
        ux_ex = np.pi * np.sin(np.pi * Xf) ** 2 * np.sin(2 * np.pi * Yc)
        uy_ex = -np.pi * np.sin(2 * np.pi * Xc) * np.sin(np.pi * Yf) ** 2
        lap_ux = 2 * np.pi ** 3 * (
            np.cos(2 * np.pi * Xf) * np.sin(2 * np.pi * Yc)
            - 2 * np.sin(np.pi * Xf) ** 2 * np.sin(2 * np.pi * Yc))
        lap_uy = -2 * np.pi ** 3 * (
            np.sin(2 * np.pi * Xc) * np.cos(2 * np.pi * Yf)
            - 2 * np.sin(2 * np.pi * Xc) * np.sin(np.pi * Yf) ** 2)
        fx = ux_ex - lap_ux
        fy = uy_ex - lap_uy
        import scipy.sparse as sp
        from porphase.linsolve import factorized
        K = g.viscous_matrix(2.0 * np.eye(3))
        sol = factorized((sp.eye(g.nu) + K).tocsc())(g.gather_faces(fx, fy))
        uxn, uyn = g.scatter_faces(sol)
        visc_errs.append(max(np.abs(uxn - ux_ex)[g.fx_active].max(),
                             np.abs(uyn - uy_ex)[g.fy_active].max()))
    visc_orders = [np.log2(a / b) for a, b in zip(visc_errs, visc_errs[1:])]

    ok = all(o >= 1.9 for o in pois_orders + grad_orders + div_orders
             + visc_orders)
    report(7, "manufactured convergence", ok,
           f"orders: poisson {[f'{o:.2f}' for o in pois_orders]}, "
           f"grad {[f'{o:.2f}' for o in grad_orders]}, "
           f"div {[f'{o:.2f}' for o in div_orders]}, "
           f"viscous {[f'{o:.2f}' for o in visc_orders]}")


# ----------------------------------------------------------------------
def test_acceptance_8_unfolding_exactness():
    rng = np.random.default_rng(0)
    cell = build_unit_cell(2, "disk", 0.25, 32)
    worst = 0.0
    for m in (2, 4):
        dom = tile_domain(cell, m)
        f = rng.standard_normal((dom.n, dom.n))
        uf = unfold(f, dom)
        h = dom.h
        worst = max(worst,
                    abs(uf.integral() - f.sum() * h * h),
                    abs(uf.l2() ** 2 - np.sum(f * f) * h * h))
    report(8, "unfolding exactness", worst < 1e-12,
           f"max integral/isometry error {worst:.2e}")
