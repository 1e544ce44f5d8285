"""Two-scale convergence study: micro runs vs the homogenized limit.

For eps in {1/2, 1/4, 1/8} the microscopic system is solved on the tiled
perforated box with lambda_eps = lam + eps and compared against one
homogenized solve: the L2(pore) error of the phase at the final time and
the sup-in-time deviation |T_eps/lambda_eps - |Y_p| T| both decrease with
eps.  The same gates hold for the lam = 0 (Stokes-CH) limit with
lambda_eps = eps.
"""

import time

import numpy as np

from porphase.cell_problems import effective_tensors
from porphase.geometry import build_unit_cell, tile_domain
from porphase.macro import MacroParams, macro_grid, make_macro_stepper
from porphase.micro import MicroParams, micro_grid, run_micro
from porphase.stepper import EnergyTrace
from porphase.unfolding import (StudyReport, compare_micro_macro,
                                energy_convergence)


def phi_profile(X, Y):
    return (0.5 + 0.2 * np.cos(np.pi * X) * np.cos(np.pi * Y)
            + 0.15 * np.sin(np.pi * X) + 0.1 * np.sin(np.pi * Y))


dt, T_end = 0.005, 0.5
cell = build_unit_cell(2, "disk", 0.25, 32)
_, tensors = effective_tensors(cell)

for lam in (1.0, 0.0):
    print(f"\n=== study lam={lam} ===")
    gM = macro_grid(64)
    XM, YM = gM.cell_centers()
    stM = make_macro_stepper(64, MacroParams(lam=lam, tensors=tensors,
                                             dt=dt, T_end=T_end))
    sM = stM.initial_state(phi0=phi_profile(XM, YM))
    trM = EnergyTrace()
    sM, _ = stM.run(sM, T_end, trace=trM)

    report = StudyReport(lam=lam)
    for m in (2, 4, 8):
        dom = tile_domain(cell, m)
        g = micro_grid(dom)
        X, Y = g.cell_centers()
        lam_eps = lam + dom.eps if lam > 0 else dom.eps
        t0 = time.time()
        st, tr, _ = run_micro(dom,
                              MicroParams(lambda_eps=lam_eps, dt=dt,
                                          T_end=T_end),
                              phi0=np.where(g.mask, phi_profile(X, Y), 0.0))
        row = compare_micro_macro(st, sM, dom, lam_eps, g, gM)
        _, _, sup = energy_convergence(tr, trM, lam_eps, tensors.porosity)
        report.add_row({"eps": dom.eps, "lambda_eps": lam_eps,
                        "phi_error": row["phi_error"],
                        "u_error": row["u_error"], "energy_dev": sup})
        print(f"eps=1/{m} ({time.time() - t0:4.1f}s): "
              f"phi error {row['phi_error']:.3e}, "
              f"energy deviation {sup:.3e}")
    ok = report.finalize(slack=0.10)
    print("verdicts:", report.verdicts)
