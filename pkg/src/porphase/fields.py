"""Field containers, the viscosity tensor model, and snapshot I/O.

A ScalarField is a cell-centered quantity on the pore region; a VectorField
holds staggered face-normal components.  Snapshots are raw little-endian
float64 arrays with a JSON sidecar header.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import StaggeredGrid, mandel_vector, MANDEL_BASIS


@dataclass
class ScalarField:
    """Cell-centered scalar on a staggered grid (zero on solid voxels)."""

    grid: StaggeredGrid
    values: np.ndarray
    role: str = "scalar"
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.mask.shape:
            raise ValueError("scalar values must live on the cell grid")
        if not np.isfinite(self.values[self.grid.mask]).all():
            raise ValueError("non-finite scalar values on pore voxels")

    @classmethod
    def zeros(cls, grid, role="scalar", t=0.0):
        return cls(grid, np.zeros(grid.mask.shape), role=role, t=t)

    def pore_values(self):
        return self.grid.gather_cells(self.values)

    def mean(self):
        return float(self.pore_values().mean())

    def l2(self):
        return float(np.sqrt(np.sum(self.pore_values() ** 2)
                             * self.grid.cell_volume()))


@dataclass
class VectorField:
    """Face-staggered velocity; wall and obstacle faces are identically zero."""

    grid: StaggeredGrid
    ux: np.ndarray
    uy: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.ux = np.asarray(self.ux, dtype=float)
        self.uy = np.asarray(self.uy, dtype=float)
        if self.ux.shape != self.grid.xface_shape:
            raise ValueError("ux shape mismatch")
        if self.uy.shape != self.grid.yface_shape:
            raise ValueError("uy shape mismatch")
        # enforce the essential boundary zeros
        self.ux = np.where(self.grid.fx_active, self.ux, 0.0)
        self.uy = np.where(self.grid.fy_active, self.uy, 0.0)

    @classmethod
    def zeros(cls, grid, t=0.0):
        return cls(grid, np.zeros(grid.xface_shape), np.zeros(grid.yface_shape),
                   t=t)

    @classmethod
    def from_vec(cls, grid, vec, t=0.0):
        ux, uy = grid.scatter_faces(vec)
        return cls(grid, ux, uy, t=t)

    def vec(self):
        return self.grid.gather_faces(self.ux, self.uy)

    def l2(self):
        v = self.vec()
        return float(np.sqrt(v @ v * self.grid.cell_volume()))


class ViscosityModel:
    """Rank-4 viscosity tensor on symmetric matrices, in Mandel form.

    `evaluator(t, y)` returns the 3x3 Mandel matrix at micro coordinate
    y in the unit cell (y is a pair of arrays for vectorized evaluation);
    a constant matrix may be passed instead.  kappa1/kappa2 are the
    coercivity and boundedness constants.
    """

    def __init__(self, evaluator, kappa1, kappa2=None, time_dependent=False):
        if callable(evaluator):
            self._eval = evaluator
            self.constant = None
        else:
            A = np.asarray(evaluator, dtype=float)
            if A.shape != (3, 3):
                raise ValueError("constant viscosity must be a 3x3 Mandel matrix")
            self.constant = A
            self._eval = None
        self.kappa1 = float(kappa1)
        self.kappa2 = float(kappa2) if kappa2 is not None else None
        self.time_dependent = bool(time_dependent)

    @classmethod
    def isotropic(cls, nu=1.0):
        """A Xi = 2 nu Xi; Mandel representation is 2 nu times the identity."""
        return cls(2.0 * nu * np.eye(3), kappa1=2.0 * nu, kappa2=2.0 * nu)

    def at_cells(self, grid, t=0.0, eps=1.0):
        """Per-pore-cell Mandel blocks, evaluating at wrapped micro coords.

        For a micro grid with period eps the tensor is evaluated at
        {x / eps}; with eps=1 it is evaluated at x itself.
        """
        if self.constant is not None:
            return self.constant
        X, Y = grid.cell_centers()
        yx = np.mod(X / eps, 1.0)[grid.mask]
        yy = np.mod(Y / eps, 1.0)[grid.mask]
        blocks = self._eval(t, (yx, yy))
        blocks = np.asarray(blocks, dtype=float)
        if blocks.shape == (3, 3):
            blocks = np.broadcast_to(blocks, (grid.npore, 3, 3))
        return blocks

    def apply(self, Xi, t=0.0, y=(0.25, 0.25)):
        """Action on a symmetric 2x2 matrix at one point (for checks)."""
        v = mandel_vector(Xi)
        A = self.constant if self.constant is not None else np.asarray(
            self._eval(t, (np.array([y[0]]), np.array([y[1]]))), dtype=float)
        if A.ndim == 3:
            A = A[0]
        w = A @ v
        return sum(w[k] * MANDEL_BASIS[k] for k in range(3))


def save_snapshot(path_base, array, header):
    """Write `<base>.raw` (little-endian float64) and `<base>.json`."""
    arr = np.asarray(array, dtype="<f8")
    with open(str(path_base) + ".raw", "wb") as fh:
        fh.write(arr.tobytes())
    meta = dict(header)
    meta["shape"] = list(arr.shape)
    meta["dtype"] = "<f8"
    with open(str(path_base) + ".json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)


def load_snapshot(path_base):
    with open(str(path_base) + ".json") as fh:
        meta = json.load(fh)
    data = np.fromfile(str(path_base) + ".raw", dtype="<f8")
    return data.reshape(meta["shape"]), meta
