"""Command-line entry point: cell / micro / macro / study / unfold.

Each subcommand reads a JSON config (see config.py and the README),
runs the corresponding scenario, and writes deterministic artifacts into
the output directory.  Every report embeds the config hash and package
version; files are written atomically (temp + rename).  Exit codes:
0 success, 1 solver failure, 2 config error, 3 acceptance-gate failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .cell_problems import coercivity_estimate, effective_tensors
from .errors import ConfigError, PorphaseError, SolverError
from .config import RunConfig
from .fields import save_snapshot
from .geometry import tile_domain
from .macro import macro_grid, make_macro_stepper
from .micro import micro_grid, make_micro_stepper
from .stepper import EnergyTrace
from .unfolding import (StudyReport, compare_micro_macro, energy_convergence,
                        unfold)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2
EXIT_GATE = 3


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _report(cfg, payload):
    out = {"version": __version__, "config_hash": cfg.hash()}
    out.update(payload)
    return json.dumps(out, indent=1, sort_keys=True) + "\n"


def _set_threads(n):
    if n is None:
        return
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(limits=n)
    except Exception:
        pass


def run_cell(cfg, outdir):
    """Solve the cell problems; write cell_report.json; gate on invariants."""
    cell = cfg.unit_cell()
    _, tensors = effective_tensors(cell, A=cfg.viscosity())
    coerc = coercivity_estimate(tensors.A_hom,
                                seed=cfg["physics"]["seed"])
    evals = np.linalg.eigvalsh(tensors.B_hom).tolist()
    gates = {
        "B_equals_C": bool(np.abs(tensors.B_hom - tensors.C_hom).max() < 1e-8),
        "B_spd_unit": bool(min(evals) > 0 and max(evals) <= 1 + 1e-12),
        "flux_vs_energy": bool(
            tensors.diagnostics["B_flux_vs_energy"] < 1e-7),
        "A_symmetric": bool(tensors.diagnostics["A_asymmetry"] < 1e-8),
        "A_coercive": bool(coerc > 0),
    }
    report = {
        "porosity": tensors.porosity,
        "A_hom": tensors.A_hom.tolist(),
        "B_hom": tensors.B_hom.tolist(),
        "C_hom": tensors.C_hom.tolist(),
        "B_eigenvalues": evals,
        "coercivity": coerc,
        "diagnostics": tensors.diagnostics,
        "gates": gates,
    }
    _atomic_write(os.path.join(outdir, "cell_report.json"),
                  _report(cfg, report))
    return EXIT_OK if all(gates.values()) else EXIT_GATE


def _emit_run(cfg, outdir, prefix, stepper, grid, phi0):
    trace = EnergyTrace()
    state = stepper.initial_state(phi0=phi0)
    state, _ = stepper.run(state, cfg["numerics"]["T_end"], trace=trace)
    trace_path = os.path.join(outdir, f"{prefix}_trace.csv")
    trace.write_csv(trace_path + ".tmp")
    os.replace(trace_path + ".tmp", trace_path)
    for name, arr in (("phi", state.phi.values), ("p", state.p.values),
                      ("ux", state.u.ux), ("uy", state.u.uy)):
        save_snapshot(os.path.join(outdir, f"{prefix}_{name}"), arr,
                      {"field": name, "t": state.t, "n": grid.n,
                       "config_hash": cfg.hash(), "version": __version__})
    report = {
        "steps": len(trace.rows),
        "t_end": state.t,
        "final_phi_mean": state.phi.mean(),
        "final_u_l2": state.u.l2(),
        "max_div_residual": float(trace.column("div_residual").max()),
        "trace": os.path.basename(trace_path),
    }
    _atomic_write(os.path.join(outdir, f"{prefix}_report.json"),
                  _report(cfg, report))
    return state, trace


def run_micro(cfg, outdir):
    dom = cfg.domain()
    grid = micro_grid(dom)
    stepper = make_micro_stepper(dom, cfg.micro_params(dom.eps))
    _emit_run(cfg, outdir, "micro", stepper, grid, cfg.initial_phase(grid))
    return EXIT_OK


def run_macro(cfg, outdir):
    cell = cfg.unit_cell()
    _, tensors = effective_tensors(cell, A=cfg.viscosity())
    n = cfg["numerics"]["n_macro"]
    stepper = make_macro_stepper(n, cfg.macro_params(tensors))
    grid = macro_grid(n)
    _emit_run(cfg, outdir, "macro", stepper, grid, cfg.initial_phase(grid))
    return EXIT_OK


def run_study(cfg, outdir, slack=0.10):
    """Cell solve once, macro once, micro per eps; gate on monotonicity."""
    cell = cfg.unit_cell()
    _, tensors = effective_tensors(cell, A=cfg.viscosity())
    n_macro = cfg["numerics"]["n_macro"]
    gM = macro_grid(n_macro)
    macro_stepper = make_macro_stepper(n_macro, cfg.macro_params(tensors))
    trM = EnergyTrace()
    sM = macro_stepper.initial_state(phi0=cfg.initial_phase(gM))
    sM, _ = macro_stepper.run(sM, cfg["numerics"]["T_end"], trace=trM)

    report = StudyReport(lam=float(cfg["physics"]["lam"]))
    report.meta = {"n_y": cfg["geometry"]["n_y"], "n_macro": n_macro,
                   "porosity": tensors.porosity}
    for eps in cfg["study"]["eps_list"]:
        m = int(round(1.0 / eps))
        dom = tile_domain(cell, m)
        grid = micro_grid(dom)
        lam_eps = cfg.lambda_eps(dom.eps)
        stepper = make_micro_stepper(dom, cfg.micro_params(dom.eps))
        tr = EnergyTrace()
        st = stepper.initial_state(phi0=cfg.initial_phase(grid))
        st, _ = stepper.run(st, cfg["numerics"]["T_end"], trace=tr)
        row = compare_micro_macro(st, sM, dom, lam_eps, grid, gM)
        _, _, sup = energy_convergence(tr, trM, lam_eps, tensors.porosity)
        report.add_row({
            "eps": dom.eps,
            "lambda_eps": lam_eps,
            "phi_error": row["phi_error"],
            "u_error": row["u_error"],
            "energy_dev": sup,
            "n": grid.n,
            "steps": len(tr.rows),
        })
    ok = report.finalize(slack=slack)
    _atomic_write(os.path.join(outdir, "study_report.json"),
                  _report(cfg, json.loads(report.to_json())))
    csv_path = os.path.join(outdir, "study_report.csv")
    report.write_csv(csv_path + ".tmp")
    os.replace(csv_path + ".tmp", csv_path)
    return EXIT_OK if ok else EXIT_GATE


def run_unfold(cfg, outdir):
    """Unfolding self-checks on a seeded random field over the geometry."""
    dom = cfg.domain()
    rng = np.random.default_rng(cfg["physics"]["seed"])
    f = rng.standard_normal((dom.n, dom.n))
    uf = unfold(f, dom)
    h = dom.h
    int_err = abs(uf.integral() - float(f.sum()) * h * h)
    l2_err = abs(uf.l2() - float(np.sqrt(np.sum(f * f))) * h)
    report = {
        "eps": dom.eps,
        "n": dom.n,
        "integral_error": int_err,
        "isometry_error": l2_err,
        "pass": bool(int_err < 1e-12 and l2_err < 1e-12),
    }
    _atomic_write(os.path.join(outdir, "unfold_report.json"),
                  _report(cfg, report))
    return EXIT_OK if report["pass"] else EXIT_GATE


_COMMANDS = {
    "cell": run_cell,
    "micro": run_micro,
    "macro": run_macro,
    "study": run_study,
    "unfold": run_unfold,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="porphase",
        description="Multiscale phase-field flow solver on perforated domains")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    _set_threads(args.threads)
    try:
        cfg = RunConfig.from_file(args.config)
        if args.seed is not None:
            cfg.blocks["physics"]["seed"] = int(args.seed)
        outdir = args.out or cfg["output"]["dir"]
        os.makedirs(outdir, exist_ok=True)
        return _COMMANDS[args.command](cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, PorphaseError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
