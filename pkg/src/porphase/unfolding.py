"""Periodic unfolding, pore-field extension, and two-scale comparisons.

Unfolding re-indexes a field on the tiled grid (n = m * n_y voxels per
side) into macro-cell / micro-voxel coordinates: value(kappa, y) =
value(eps*kappa + eps*y).  With exact tiling this is a bijection on
voxels, so integrals and L2 norms are preserved to machine precision.

Comparisons implement the two-scale error norms of the convergence study:
velocity is normalized by sqrt(lambda_eps) before comparing against the
homogenized velocity, phase is compared directly, and the energy check
is |T_eps / lambda_eps - |Y_p| * T|.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CompatibilityError, ConfigError


@dataclass
class UnfoldedField:
    """Field values indexed by (macro cell kx, ky, micro voxel yx, yy)."""

    values: np.ndarray          # shape (m, m, n_y, n_y)
    eps: float
    cell: object = None

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def n_y(self):
        return self.values.shape[2]

    def integral(self):
        """Integral over Omega x Y with the product quadrature weights."""
        w = (self.eps / self.n_y) ** 2
        return float(self.values.sum()) * w

    def l2(self):
        w = (self.eps / self.n_y) ** 2
        return float(np.sqrt(np.sum(self.values ** 2) * w))


def unfold(values, domain) -> UnfoldedField:
    """Unfold a full (n, n) cell array on the tiled grid; pure re-indexing."""
    values = np.asarray(values, dtype=float)
    m, n_y = domain.m, domain.cell.n_y
    if values.shape != (m * n_y, m * n_y):
        raise CompatibilityError(
            f"field shape {values.shape} does not match the {m}x{n_y} tiling")
    unf = values.reshape(m, n_y, m, n_y).transpose(0, 2, 1, 3)
    return UnfoldedField(values=np.ascontiguousarray(unf), eps=domain.eps,
                         cell=domain.cell)


def refold(uf: UnfoldedField):
    """Inverse of unfold: back to the (n, n) tiled array."""
    return np.ascontiguousarray(
        uf.values.transpose(0, 2, 1, 3).reshape(uf.m * uf.n_y,
                                                uf.m * uf.n_y))


def extend(values, domain, mode="cell-mean"):
    """Fill solid voxels of a pore field; pore values are never changed.

    Modes: "cell-mean" fills each macro cell's solid voxels with that
    cell's pore average; "harmonic" solves a discrete Laplace equation on
    the solid voxels with the adjacent pore values as Dirichlet data.
    """
    values = np.asarray(values, dtype=float)
    mask = domain.global_mask
    if values.shape != mask.shape:
        raise CompatibilityError("field shape does not match the domain grid")
    if mask.all():
        return values.copy()
    if mode == "cell-mean":
        uf = unfold(values, domain)
        pore = domain.cell.pore_mask
        out = uf.values.copy()
        means = uf.values[:, :, pore].mean(axis=2)
        out[:, :, ~pore] = means[:, :, None]
        full = refold(UnfoldedField(out, uf.eps, uf.cell))
        return np.where(mask, values, full)
    if mode == "harmonic":
        return _harmonic_fill(values, mask)
    raise ConfigError(f"unknown extension mode: {mode!r}")


def _harmonic_fill(values, mask):
    """Laplace in-fill on solid voxels; pore neighbors act as Dirichlet data."""
    solid = ~mask
    n = mask.shape[0]
    sid = -np.ones(mask.shape, dtype=np.int64)
    ns = int(solid.sum())
    sid[solid] = np.arange(ns)
    si, sj = np.nonzero(solid)
    rows, cols, vals = [], [], []
    rhs = np.zeros(ns)
    diag = np.zeros(ns)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = si + di, sj + dj
        inb = (ni >= 0) & (ni < n) & (nj >= 0) & (nj < n)
        diag += inb                      # out-of-domain neighbors: Neumann
        which = np.nonzero(inb)[0]
        a, b = ni[which], nj[which]
        is_solid = solid[a, b]
        rows.append(sid[si[which[is_solid]], sj[which[is_solid]]])
        cols.append(sid[a[is_solid], b[is_solid]])
        vals.append(np.full(int(is_solid.sum()), -1.0))
        w = which[~is_solid]
        np.add.at(rhs, sid[si[w], sj[w]], values[ni[w], nj[w]])
    rows.append(np.arange(ns))
    cols.append(np.arange(ns))
    vals.append(diag)
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ns, ns))
    fill = spla.spsolve(A.tocsc(), rhs)
    out = values.copy()
    out[solid] = fill
    return out


# ----------------------------------------------------------------------
# two-scale error norms
# ----------------------------------------------------------------------
def _sample_macro_to_micro(macro_values, n_micro):
    """Piecewise-constant sampling of a macro cell array onto a finer grid."""
    macro_values = np.asarray(macro_values, dtype=float)
    n_macro = macro_values.shape[0]
    centers = (np.arange(n_micro) + 0.5) / n_micro
    idx = np.clip((centers * n_macro).astype(int), 0, n_macro - 1)
    return macro_values[np.ix_(idx, idx)]


def _pore_l2(diff, mask, h):
    return float(np.sqrt(np.sum(diff[mask] ** 2) * h * h))


def compare_micro_macro(micro_state, macro_state, domain, lambda_eps,
                        micro_grid, macro_grid):
    """L2(pore) errors of u/sqrt(lambda_eps) and phi against the macro run.

    Macro cell-centered fields are sampled onto the micro grid piecewise
    constantly; velocity is compared through cell-centered components.
    Returns a dict with absolute and phi-relative errors.
    """
    if abs(micro_state.t - macro_state.t) > 1e-9 + 1e-9 * abs(micro_state.t):
        raise CompatibilityError(
            f"time mismatch: micro t={micro_state.t}, macro t={macro_state.t}")
    mask = domain.global_mask
    h = micro_grid.h
    n = micro_grid.n
    root = np.sqrt(lambda_eps)

    phi_macro = _sample_macro_to_micro(macro_state.phi.values, n)
    phi_err = _pore_l2(micro_state.phi.values - phi_macro, mask, h)
    phi_ref = _pore_l2(phi_macro, mask, h)

    mux, muy = micro_grid.cell_velocity(micro_state.u.ux, micro_state.u.uy)
    Mux, Muy = macro_grid.cell_velocity(macro_state.u.ux, macro_state.u.uy)
    dux = mux / root - _sample_macro_to_micro(Mux, n)
    duy = muy / root - _sample_macro_to_micro(Muy, n)
    u_err = float(np.sqrt((np.sum(dux[mask] ** 2)
                           + np.sum(duy[mask] ** 2)) * h * h))
    return {
        "t": float(micro_state.t),
        "phi_error": phi_err,
        "phi_rel_error": phi_err / phi_ref if phi_ref > 0 else phi_err,
        "u_error": u_err,
    }


def energy_convergence(micro_trace, macro_trace, lambda_eps, porosity,
                       tol=1e-9):
    """Per-time deviations d(t) = |T_eps(t)/lambda_eps - |Y_p| * T(t)|.

    Requires aligned time grids; returns (times, deviations, sup).
    """
    tm = micro_trace.column("t")
    tM = macro_trace.column("t")
    if tm.shape != tM.shape or np.abs(tm - tM).max() > tol:
        raise CompatibilityError("micro and macro traces are not time-aligned")
    d = np.abs(micro_trace.column("T") / lambda_eps
               - porosity * macro_trace.column("T"))
    return tm, d, float(d.max())


# ----------------------------------------------------------------------
# study report
# ----------------------------------------------------------------------
@dataclass
class StudyReport:
    """Per-eps error rows of a convergence study plus monotonicity verdicts."""

    lam: float
    rows: list = field(default_factory=list)   # dicts, eps strictly decreasing
    verdicts: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add_row(self, row):
        if self.rows and row["eps"] >= self.rows[-1]["eps"]:
            raise ConfigError("study eps values must be strictly decreasing")
        self.rows.append(dict(row))

    def finalize(self, slack=0.10):
        """Monotone-within-slack verdicts for the phi and energy errors."""
        for key in ("phi_error", "energy_dev"):
            seq = [r[key] for r in self.rows]
            ok = all(seq[i + 1] <= seq[i] * (1.0 + slack)
                     for i in range(len(seq) - 1))
            self.verdicts[f"{key}_monotone"] = bool(ok)
        self.verdicts["pass"] = all(
            v for k, v in self.verdicts.items() if k != "pass")
        return self.verdicts["pass"]

    def to_json(self):
        return json.dumps(
            {"lam": self.lam, "rows": self.rows, "verdicts": self.verdicts,
             "meta": self.meta},
            indent=1, sort_keys=True)

    def write_csv(self, path):
        keys = list(self.rows[0].keys()) if self.rows else ["eps"]
        with open(path, "w") as fh:
            fh.write(",".join(keys) + "\n")
            for r in self.rows:
                fh.write(",".join(repr(r[k]) for k in keys) + "\n")
