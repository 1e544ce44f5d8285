"""Voxelized reference cell and its periodic tiling into a perforated box.

The reference cell is the unit cube split into a pore part and a compactly
contained solid inclusion (disk/sphere centered at 0.5 with radius r).  The
macroscopic domain is the unit box tiled exactly by m**dim translated copies
of the cell, so the pore region has no cut boundary layer.  Geometry is
voxelized: a voxel is solid iff its center lies inside the inclusion.

Face labels on the tiled grid distinguish interior pore faces, outer no-slip
walls, the staircase obstacle interface, and faces buried in the solid.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

# face label codes
FACE_SOLID = 0
FACE_INTERIOR = 1
FACE_OUTER_WALL = 2
FACE_OBSTACLE = 3

# refuse grids beyond this many voxels (keeps runs desk-scale)
MAX_VOXELS = 1 << 24


def _periodic_connected(mask):
    """Check connectivity of True voxels under face adjacency with wraparound."""
    if not mask.any():
        return False
    reached = np.zeros_like(mask)
    seed = np.unravel_index(np.argmax(mask), mask.shape)
    reached[seed] = True
    while True:
        grown = reached.copy()
        for axis in range(mask.ndim):
            grown |= np.roll(reached, 1, axis=axis)
            grown |= np.roll(reached, -1, axis=axis)
        grown &= mask
        if (grown == reached).all():
            break
        reached = grown
    return bool(reached.sum() == mask.sum())


@dataclass(frozen=True)
class Inclusion:
    """Shape descriptor for the solid part: a disk (2D) or sphere (3D)."""

    shape: str
    r: float


@dataclass(frozen=True)
class UnitCell:
    """Reference periodicity cell: pore mask on an n_y**dim voxel grid."""

    dim: int
    inclusion: Inclusion
    n_y: int
    pore_mask: np.ndarray = field(repr=False)

    @property
    def porosity(self):
        return float(self.pore_mask.sum()) / self.pore_mask.size

    @property
    def h(self):
        return 1.0 / self.n_y


@dataclass(frozen=True)
class PerforatedDomain:
    """The unit box tiled by m**dim copies of a cell; ``eps = 1/m``."""

    cell: UnitCell
    m: int
    global_mask: np.ndarray = field(repr=False)

    @property
    def eps(self):
        return 1.0 / self.m

    @property
    def n(self):
        return self.m * self.cell.n_y

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def dim(self):
        return self.cell.dim

    @property
    def porosity(self):
        return float(self.global_mask.sum()) / self.global_mask.size

    def face_labels(self):
        """Per-axis face label arrays (2D only).

        Returns (label_x, label_y): label_x has shape (n+1, n) for faces
        normal to x, label_y has shape (n, n+1).
        """
        if self.dim != 2:
            raise GeometryError("face labels implemented for dim=2 only")
        return _face_labels_2d(self.global_mask)


def _face_labels_2d(mask):
    n0, n1 = mask.shape
    lx = np.full((n0 + 1, n1), FACE_SOLID, dtype=np.int8)
    ly = np.full((n0, n1 + 1), FACE_SOLID, dtype=np.int8)

    left = mask[:-1, :]
    right = mask[1:, :]
    lx[1:-1][left & right] = FACE_INTERIOR
    lx[1:-1][left ^ right] = FACE_OBSTACLE
    lx[0][mask[0]] = FACE_OUTER_WALL
    lx[-1][mask[-1]] = FACE_OUTER_WALL

    bot = mask[:, :-1]
    top = mask[:, 1:]
    ly[:, 1:-1][bot & top] = FACE_INTERIOR
    ly[:, 1:-1][bot ^ top] = FACE_OBSTACLE
    ly[:, 0][mask[:, 0]] = FACE_OUTER_WALL
    ly[:, -1][mask[:, -1]] = FACE_OUTER_WALL
    return lx, ly


def build_unit_cell(dim=2, shape="disk", r=0.25, n_y=64):
    """Voxelize the reference cell with a centered disk/sphere inclusion.

    A voxel is solid iff its center lies strictly inside the inclusion.
    Raises GeometryError if the (voxelized closure of the) inclusion is not
    strictly inside the cell or the pore region is not periodically connected.
    """
    if dim not in (2, 3):
        raise GeometryError(f"dim must be 2 or 3, got {dim}")
    if shape not in ("disk", "sphere"):
        raise GeometryError(f"unknown inclusion shape {shape!r}")
    if r < 0:
        raise GeometryError("inclusion radius must be nonnegative")
    if n_y < 8 or n_y % 2:
        raise GeometryError("n_y must be even and at least 8")
    if r > 0 and r + 1.0 / n_y >= 0.5:
        raise GeometryError(
            f"inclusion r={r} with n_y={n_y} not compactly contained in the cell"
        )

    coords = (np.arange(n_y) + 0.5) / n_y - 0.5
    grids = np.meshgrid(*([coords] * dim), indexing="ij")
    dist2 = sum(g * g for g in grids)
    pore = dist2 >= r * r

    if not pore.any():
        raise GeometryError("pore region is empty")
    if not _periodic_connected(pore):
        raise GeometryError("pore region is not periodically connected")
    return UnitCell(dim=dim, inclusion=Inclusion(shape=shape, r=r), n_y=n_y,
                    pore_mask=pore)


def tile_domain(cell, m):
    """Tile the unit box by m**dim copies of the cell (period eps = 1/m)."""
    if m < 1 or int(m) != m:
        raise GeometryError("m must be a positive integer")
    m = int(m)
    n = m * cell.n_y
    if n ** cell.dim > MAX_VOXELS:
        raise GeometryError(f"grid {n}^{cell.dim} exceeds configured maximum")
    global_mask = np.tile(cell.pore_mask, (m,) * cell.dim)
    return PerforatedDomain(cell=cell, m=m, global_mask=global_mask)


def porosity(domain):
    """Pore volume fraction of a domain (equals the cell porosity)."""
    return domain.porosity


def dump_mask_pgm(mask, path):
    """Write a 2D mask as a plain PGM image (pore=255, solid=0)."""
    arr = np.where(mask.T[::-1], 255, 0).astype(np.uint8)
    with open(path, "w") as fh:
        fh.write(f"P2\n{arr.shape[1]} {arr.shape[0]}\n255\n")
        for row in arr:
            fh.write(" ".join(str(v) for v in row) + "\n")


def dump_mask_csv(mask, path):
    np.savetxt(path, mask.astype(np.int8), fmt="%d", delimiter=",")
