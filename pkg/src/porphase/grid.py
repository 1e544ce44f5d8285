"""Staggered (MAC) grid on a masked box or periodic cell, with sparse operators.

Scalars live at voxel centers of pore cells; velocity components live on
faces.  A face is an unknown only if both neighboring cells are pore
("interior" face); faces on the outer wall or on the staircase obstacle
interface carry the value zero (no-slip wall / impermeability), which makes
the discrete divergence and gradient exact negative adjoints of each other.

Conventions (2D, square grid, arrays indexed [ix, iy]):
  box grid:       x-faces shape (n+1, n), y-faces shape (n, n+1)
  periodic grid:  x-faces shape (n, n) (face i sits between cells i-1 and i,
                  with wraparound), y-faces likewise

Strain is represented at cell centers in an orthonormal (Mandel) basis of
symmetric matrices, E = (Dxx, Dyy, sqrt(2)*Dxy); shear is evaluated at
corners and averaged to centers.  Corners touching a solid cell contribute
zero shear (traction-free tangential closure); corners on the outer wall use
a mirrored no-slip ghost.
"""

from functools import cached_property

import numpy as np
import scipy.sparse as sp

SQRT2 = np.sqrt(2.0)

#: Orthonormal basis of 2x2 symmetric matrices matching the Mandel layout.
MANDEL_BASIS = (
    np.array([[1.0, 0.0], [0.0, 0.0]]),
    np.array([[0.0, 0.0], [0.0, 1.0]]),
    np.array([[0.0, 1.0 / SQRT2], [1.0 / SQRT2, 0.0]]),
)


def mandel_vector(M):
    """Coordinates of a symmetric 2x2 matrix in the Mandel basis."""
    M = np.asarray(M, dtype=float)
    return np.array([M[0, 0], M[1, 1], SQRT2 * M[0, 1]])


def mandel_matrix(v):
    """Symmetric 2x2 matrix from its Mandel coordinates."""
    return np.array([[v[0], v[2] / SQRT2], [v[2] / SQRT2, v[1]]])


class StaggeredGrid:
    """Masked MAC grid (box with outer walls, or fully periodic cell)."""

    def __init__(self, mask, h, periodic=False):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
            raise ValueError("mask must be a square 2D array")
        self.mask = mask
        self.h = float(h)
        self.periodic = bool(periodic)
        self.n = mask.shape[0]

        self.npore = int(mask.sum())
        self.pid = -np.ones(mask.shape, dtype=np.int64)
        self.pid[mask] = np.arange(self.npore)

        n = self.n
        if periodic:
            self.fx_active = mask & np.roll(mask, 1, axis=0)
            self.fy_active = mask & np.roll(mask, 1, axis=1)
        else:
            fx = np.zeros((n + 1, n), dtype=bool)
            fx[1:-1] = mask[:-1] & mask[1:]
            fy = np.zeros((n, n + 1), dtype=bool)
            fy[:, 1:-1] = mask[:, :-1] & mask[:, 1:]
            self.fx_active = fx
            self.fy_active = fy

        self.nux = int(self.fx_active.sum())
        self.nuy = int(self.fy_active.sum())
        self.nu = self.nux + self.nuy
        self.uxid = -np.ones(self.fx_active.shape, dtype=np.int64)
        self.uxid[self.fx_active] = np.arange(self.nux)
        self.uyid = -np.ones(self.fy_active.shape, dtype=np.int64)
        self.uyid[self.fy_active] = self.nux + np.arange(self.nuy)

    # ------------------------------------------------------------------
    # gather / scatter between full arrays and unknown vectors
    # ------------------------------------------------------------------
    @property
    def xface_shape(self):
        n = self.n
        return (n, n) if self.periodic else (n + 1, n)

    @property
    def yface_shape(self):
        n = self.n
        return (n, n) if self.periodic else (n, n + 1)

    def gather_cells(self, s):
        return np.asarray(s, dtype=float)[self.mask]

    def scatter_cells(self, vec):
        out = np.zeros(self.mask.shape)
        out[self.mask] = vec
        return out

    def gather_faces(self, ux, uy):
        return np.concatenate(
            [np.asarray(ux, dtype=float)[self.fx_active],
             np.asarray(uy, dtype=float)[self.fy_active]]
        )

    def scatter_faces(self, vec):
        ux = np.zeros(self.xface_shape)
        uy = np.zeros(self.yface_shape)
        ux[self.fx_active] = vec[: self.nux]
        uy[self.fy_active] = vec[self.nux:]
        return ux, uy

    def cell_centers(self):
        c = (np.arange(self.n) + 0.5) * self.h
        return np.meshgrid(c, c, indexing="ij")

    def cell_volume(self):
        return self.h ** 2

    # ------------------------------------------------------------------
    # first-order operators
    # ------------------------------------------------------------------
    @cached_property
    def Gx(self):
        """Gradient x-component: (nux x npore) sparse matrix."""
        i, j = np.nonzero(self.fx_active)
        rows = self.uxid[i, j]
        if self.periodic:
            c_hi = self.pid[i, j]
            c_lo = self.pid[(i - 1) % self.n, j]
        else:
            c_hi = self.pid[i, j]
            c_lo = self.pid[i - 1, j]
        data = np.concatenate([np.full(rows.size, 1.0 / self.h),
                               np.full(rows.size, -1.0 / self.h)])
        r = np.concatenate([rows, rows])
        c = np.concatenate([c_hi, c_lo])
        return sp.csr_matrix((data, (r, c)), shape=(self.nux, self.npore))

    @cached_property
    def Gy(self):
        i, j = np.nonzero(self.fy_active)
        rows = self.uyid[i, j] - self.nux
        if self.periodic:
            c_hi = self.pid[i, j]
            c_lo = self.pid[i, (j - 1) % self.n]
        else:
            c_hi = self.pid[i, j]
            c_lo = self.pid[i, j - 1]
        data = np.concatenate([np.full(rows.size, 1.0 / self.h),
                               np.full(rows.size, -1.0 / self.h)])
        r = np.concatenate([rows, rows])
        c = np.concatenate([c_hi, c_lo])
        return sp.csr_matrix((data, (r, c)), shape=(self.nuy, self.npore))

    @cached_property
    def G(self):
        """Full gradient (nu x npore); divergence is -G.T."""
        return sp.vstack([self.Gx, self.Gy]).tocsr()

    @cached_property
    def L(self):
        """Pure-Neumann Poisson matrix -div(grad) = G.T @ G (SPSD)."""
        return (self.G.T @ self.G).tocsr()

    def grad(self, s_cells):
        """Face gradient of a full cell array; zero on non-interior faces."""
        g = self.G @ self.gather_cells(s_cells)
        return self.scatter_faces(g)

    def div(self, ux, uy):
        """Cell divergence of face arrays; zero on solid cells."""
        d = -(self.G.T @ self.gather_faces(ux, uy))
        return self.scatter_cells(d)

    # ------------------------------------------------------------------
    # averaging between face families (for anisotropic fluxes)
    # ------------------------------------------------------------------
    @cached_property
    def Axy(self):
        """Average active y-face values onto x-faces (4 nearest, weight 1/4)."""
        i, j = np.nonzero(self.fx_active)
        rows_all, cols_all = [], []
        n = self.n
        if self.periodic:
            neigh = [((i - 1) % n, j), ((i - 1) % n, (j + 1) % n),
                     (i, j), (i, (j + 1) % n)]
            for a, b in neigh:
                cid = self.uyid[a, b]
                keep = cid >= 0
                rows_all.append(self.uxid[i, j][keep])
                cols_all.append(cid[keep] - self.nux)
        else:
            for a, b in [(i - 1, j), (i - 1, j + 1), (i, j), (i, j + 1)]:
                ok = (a >= 0) & (a < n) & (b >= 0) & (b <= n)
                cid = np.full(i.size, -1, dtype=np.int64)
                cid[ok] = self.uyid[a[ok], b[ok]]
                keep = cid >= 0
                rows_all.append(self.uxid[i, j][keep])
                cols_all.append(cid[keep] - self.nux)
        rows = np.concatenate(rows_all)
        cols = np.concatenate(cols_all)
        data = np.full(rows.size, 0.25)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.nux, self.nuy))

    def aniso_laplacian(self, C):
        """Matrix for div(C grad .) with Neumann closure (negative semidef.)."""
        C = np.asarray(C, dtype=float)
        Gx, Gy = self.Gx, self.Gy
        flux_x = C[0, 0] * Gx
        flux_y = C[1, 1] * Gy
        if C[0, 1] != 0.0 or C[1, 0] != 0.0:
            flux_x = flux_x + C[0, 1] * (self.Axy @ Gy)
            flux_y = flux_y + C[1, 0] * (self.Axy.T @ Gx)
        return (-(Gx.T @ flux_x + Gy.T @ flux_y)).tocsr()

    # ------------------------------------------------------------------
    # strain operator (Mandel components at pore-cell centers)
    # ------------------------------------------------------------------
    @cached_property
    def Dmat(self):
        """Sparse strain operator (3*npore x nu), rows blocked by component."""
        n, h = self.n, self.h
        npore = self.npore
        ci, cj = np.nonzero(self.mask)
        cell = self.pid[ci, cj]

        rows, cols, vals = [], [], []

        def add(r, c, v):
            keep = c >= 0
            rows.append(r[keep])
            cols.append(c[keep])
            vals.append(np.full(int(keep.sum()), v))

        # Dxx rows: (ux_right - ux_left)/h
        if self.periodic:
            right = self.uxid[(ci + 1) % n, cj]
            left = self.uxid[ci, cj]
        else:
            right = self.uxid[ci + 1, cj]
            left = self.uxid[ci, cj]
        add(cell, right, 1.0 / h)
        add(cell, left, -1.0 / h)

        # Dyy rows
        if self.periodic:
            up = self.uyid[ci, (cj + 1) % n]
            dn = self.uyid[ci, cj]
        else:
            up = self.uyid[ci, cj + 1]
            dn = self.uyid[ci, cj]
        add(npore + cell, up, 1.0 / h)
        add(npore + cell, dn, -1.0 / h)

        Dnorm = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(2 * npore, self.nu),
        )
        D3 = SQRT2 * (self._corner_average() @ self._corner_shear())
        return sp.vstack([Dnorm, D3]).tocsr()

    def _corner_ids(self):
        n = self.n
        if self.periodic:
            return n, n
        return n + 1, n + 1

    @cached_property
    def _fluid_corner(self):
        """Corners whose (in-range) adjacent cells are all pore."""
        n = self.n
        m = self.mask
        if self.periodic:
            return (m & np.roll(m, 1, axis=0) & np.roll(m, 1, axis=1)
                    & np.roll(np.roll(m, 1, axis=0), 1, axis=1))
        P = np.pad(m, 1, constant_values=True)
        # corner (ci, cj): cells (ci-1..ci, cj-1..cj) -> padded (ci..ci+1, cj..cj+1)
        return (P[:-1, :-1] & P[1:, :-1] & P[:-1, 1:] & P[1:, 1:])

    def _corner_shear(self):
        """Sparse (ncorners x nu): 0.5*(dux/dy + duy/dx) at fluid corners."""
        n, h = self.n, self.h
        nc0, nc1 = self._corner_ids()
        ncorners = nc0 * nc1
        fluid = self._fluid_corner
        ci, cj = np.nonzero(fluid)
        crow = ci * nc1 + cj

        rows, cols, vals = [], [], []

        def add(r, c, v):
            keep = c >= 0
            rows.append(r[keep])
            cols.append(c[keep])
            vals.append(v[keep] if np.ndim(v) else np.full(int(keep.sum()), v))

        half = 0.5 / h
        if self.periodic:
            # dux/dy: (ux[ci, cj] - ux[ci, cj-1]) / h
            add(crow, self.uxid[ci, cj], half)
            add(crow, self.uxid[ci, (cj - 1) % n], -half)
            # duy/dx
            add(crow, self.uyid[ci, cj], half)
            add(crow, self.uyid[(ci - 1) % n, cj], -half)
        else:
            # dux/dy
            interior = (cj >= 1) & (cj <= n - 1)
            ii, jj = ci[interior], cj[interior]
            add(crow[interior], self.uxid[ii, jj], half)
            add(crow[interior], self.uxid[ii, jj - 1], -half)
            bot = cj == 0
            add(crow[bot], self.uxid[ci[bot], np.zeros(int(bot.sum()), int)],
                2.0 * half)
            top = cj == n
            add(crow[top], self.uxid[ci[top], np.full(int(top.sum()), n - 1)],
                -2.0 * half)
            # duy/dx
            interior = (ci >= 1) & (ci <= n - 1)
            ii, jj = ci[interior], cj[interior]
            add(crow[interior], self.uyid[ii, jj], half)
            add(crow[interior], self.uyid[ii - 1, jj], -half)
            west = ci == 0
            add(crow[west], self.uyid[np.zeros(int(west.sum()), int), cj[west]],
                2.0 * half)
            east = ci == n
            add(crow[east], self.uyid[np.full(int(east.sum()), n - 1), cj[east]],
                -2.0 * half)

        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(ncorners, self.nu),
        )

    def _corner_average(self):
        """Sparse (npore x ncorners): mean of the 4 corners of each pore cell."""
        n = self.n
        nc0, nc1 = self._corner_ids()
        ci, cj = np.nonzero(self.mask)
        cell = self.pid[ci, cj]
        if self.periodic:
            corners = [(ci, cj), ((ci + 1) % n, cj),
                       (ci, (cj + 1) % n), ((ci + 1) % n, (cj + 1) % n)]
        else:
            corners = [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)]
        rows = np.concatenate([cell] * 4)
        cols = np.concatenate([a * nc1 + b for a, b in corners])
        data = np.full(rows.size, 0.25)
        return sp.csr_matrix((data, (rows, cols)),
                             shape=(self.npore, nc0 * nc1))

    def strain(self, ux, uy):
        """Mandel strain components at pore cells, shape (3, npore)."""
        e = self.Dmat @ self.gather_faces(ux, uy)
        return e.reshape(3, self.npore)

    # ------------------------------------------------------------------
    # viscosity blocks
    # ------------------------------------------------------------------
    def block_tensor(self, A_cells):
        """Block-diagonal sparse matrix from per-cell 3x3 Mandel blocks.

        A_cells: (npore, 3, 3) or a single (3, 3) applied everywhere.
        Returns a (3*npore x 3*npore) matrix acting on component-blocked
        strain vectors.
        """
        A_cells = np.asarray(A_cells, dtype=float)
        if A_cells.shape == (3, 3):
            A_cells = np.broadcast_to(A_cells, (self.npore, 3, 3))
        blocks = []
        for a in range(3):
            row = []
            for b in range(3):
                row.append(sp.diags(np.ascontiguousarray(A_cells[:, a, b])))
            blocks.append(row)
        return sp.bmat(blocks, format="csr")

    def viscous_matrix(self, A_cells):
        """K = D^T A D: SPSD operator with <K u, v> h^2 the viscous form."""
        Abig = self.block_tensor(A_cells)
        return (self.Dmat.T @ Abig @ self.Dmat).tocsr()

    # ------------------------------------------------------------------
    # convection (divergence form; antisymmetrized by the caller)
    # ------------------------------------------------------------------
    def convection_matrix(self, ux, uy):
        """Divergence-form convection: B(u) with (B v) ~ div(u (x) v)."""
        n, h = self.n, self.h
        ux = np.asarray(ux, dtype=float)
        uy = np.asarray(uy, dtype=float)
        rows, cols, vals = [], [], []

        def add(r, c, v):
            keep = c >= 0
            rows.append(r[keep])
            cols.append(c[keep])
            vals.append(v[keep])

        if self.periodic:
            uxc = 0.5 * (ux + np.roll(ux, -1, axis=0))          # cell centered
            uyc_x = 0.5 * (uy + np.roll(uy, 1, axis=0))         # at corners (i,j)
            i, j = np.nonzero(self.fx_active)
            r = self.uxid[i, j]
            im1, ip1 = (i - 1) % n, (i + 1) % n
            jm1, jp1 = (j - 1) % n, (j + 1) % n
            a_hi = uxc[i, j] / (2 * h)
            a_lo = uxc[im1, j] / (2 * h)
            c_up = uyc_x[i, jp1] / (2 * h)
            c_dn = uyc_x[i, j] / (2 * h)
            add(r, self.uxid[i, j], a_hi - a_lo + c_up - c_dn)
            add(r, self.uxid[ip1, j], a_hi)
            add(r, self.uxid[im1, j], -a_lo)
            add(r, self.uxid[i, jp1], c_up)
            add(r, self.uxid[i, jm1], -c_dn)

            uyc = 0.5 * (uy + np.roll(uy, -1, axis=1))
            uxc_y = 0.5 * (ux + np.roll(ux, 1, axis=1))         # at corners
            i, j = np.nonzero(self.fy_active)
            r = self.uyid[i, j]
            im1, ip1 = (i - 1) % n, (i + 1) % n
            jm1, jp1 = (j - 1) % n, (j + 1) % n
            a_hi = uyc[i, j] / (2 * h)
            a_lo = uyc[i, jm1] / (2 * h)
            c_up = uxc_y[ip1, j] / (2 * h)
            c_dn = uxc_y[i, j] / (2 * h)
            add(r, self.uyid[i, j], a_hi - a_lo + c_up - c_dn)
            add(r, self.uyid[i, jp1], a_hi)
            add(r, self.uyid[i, jm1], -a_lo)
            add(r, self.uyid[ip1, j], c_up)
            add(r, self.uyid[im1, j], -c_dn)
        else:
            uxc = 0.5 * (ux[:-1] + ux[1:])                      # (n, n)
            uyc_x = np.zeros((n + 1, n + 1))                    # uy avg at corners
            uyc_x[1:-1, :] = 0.5 * (uy[:-1] + uy[1:])
            i, j = np.nonzero(self.fx_active)                   # 1 <= i <= n-1
            r = self.uxid[i, j]

            def uxcol(a, b):
                out = np.full(a.shape, -1, dtype=np.int64)
                ok = (a >= 0) & (a <= n) & (b >= 0) & (b < n)
                out[ok] = self.uxid[a[ok], b[ok]]
                return out

            a_hi = uxc[i, j] / (2 * h)
            a_lo = uxc[i - 1, j] / (2 * h)
            c_up = uyc_x[i, j + 1] / (2 * h)
            c_dn = uyc_x[i, j] / (2 * h)
            add(r, uxcol(i, j), a_hi - a_lo + c_up - c_dn)
            add(r, uxcol(i + 1, j), a_hi)
            add(r, uxcol(i - 1, j), -a_lo)
            add(r, uxcol(i, j + 1), c_up)
            add(r, uxcol(i, j - 1), -c_dn)

            uyc = 0.5 * (uy[:, :-1] + uy[:, 1:])                # (n, n)
            uxc_y = np.zeros((n + 1, n + 1))
            uxc_y[:, 1:-1] = 0.5 * (ux[:, :-1] + ux[:, 1:])
            i, j = np.nonzero(self.fy_active)                   # 1 <= j <= n-1
            r = self.uyid[i, j]

            def uycol(a, b):
                out = np.full(a.shape, -1, dtype=np.int64)
                ok = (a >= 0) & (a < n) & (b >= 0) & (b <= n)
                out[ok] = self.uyid[a[ok], b[ok]]
                return out

            a_hi = uyc[i, j] / (2 * h)
            a_lo = uyc[i, j - 1] / (2 * h)
            c_up = uxc_y[i + 1, j] / (2 * h)
            c_dn = uxc_y[i, j] / (2 * h)
            add(r, uycol(i, j), a_hi - a_lo + c_up - c_dn)
            add(r, uycol(i, j + 1), a_hi)
            add(r, uycol(i, j - 1), -a_lo)
            add(r, uycol(i + 1, j), c_up)
            add(r, uycol(i - 1, j), -c_dn)

        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.nu, self.nu),
        )

    # ------------------------------------------------------------------
    # phase advection (upwind) and capillary face force
    # ------------------------------------------------------------------
    def advect_upwind(self, ux, uy, phi):
        """div(u * phi) with upwinded face values; zero boundary flux."""
        n = self.n
        flux_x = np.zeros(self.xface_shape)
        flux_y = np.zeros(self.yface_shape)
        if self.periodic:
            i, j = np.nonzero(self.fx_active)
            up = ux[i, j]
            flux_x[i, j] = up * np.where(up > 0, phi[(i - 1) % n, j], phi[i, j])
            i, j = np.nonzero(self.fy_active)
            vp = uy[i, j]
            flux_y[i, j] = vp * np.where(vp > 0, phi[i, (j - 1) % n], phi[i, j])
        else:
            i, j = np.nonzero(self.fx_active)
            up = ux[i, j]
            flux_x[i, j] = up * np.where(up > 0, phi[i - 1, j], phi[i, j])
            i, j = np.nonzero(self.fy_active)
            vp = uy[i, j]
            flux_y[i, j] = vp * np.where(vp > 0, phi[i, j - 1], phi[i, j])
        return self.div(flux_x, flux_y)

    def phi_face_average(self, phi):
        """Arithmetic face averages of a cell field on active faces."""
        n = self.n
        px = np.zeros(self.xface_shape)
        py = np.zeros(self.yface_shape)
        if self.periodic:
            i, j = np.nonzero(self.fx_active)
            px[i, j] = 0.5 * (phi[(i - 1) % n, j] + phi[i, j])
            i, j = np.nonzero(self.fy_active)
            py[i, j] = 0.5 * (phi[i, (j - 1) % n] + phi[i, j])
        else:
            i, j = np.nonzero(self.fx_active)
            px[i, j] = 0.5 * (phi[i - 1, j] + phi[i, j])
            i, j = np.nonzero(self.fy_active)
            py[i, j] = 0.5 * (phi[i, j - 1] + phi[i, j])
        return px, py

    def capillary_force(self, phi, mu, C=None):
        """Face force (phi averaged to faces) * (C grad mu); returns a vector."""
        mu_vec = self.gather_cells(mu)
        gx = self.Gx @ mu_vec
        gy = self.Gy @ mu_vec
        if C is not None:
            C = np.asarray(C, dtype=float)
            fx = C[0, 0] * gx + C[0, 1] * (self.Axy @ gy)
            fy = C[1, 0] * (self.Axy.T @ gx) + C[1, 1] * gy
        else:
            fx, fy = gx, gy
        px, py = self.phi_face_average(phi)
        pvec = np.concatenate([px[self.fx_active], py[self.fy_active]])
        return pvec * np.concatenate([fx, fy])

    # ------------------------------------------------------------------
    # misc
    # ------------------------------------------------------------------
    def cell_velocity(self, ux, uy):
        """Velocity components averaged to cell centers (full arrays)."""
        if self.periodic:
            ucx = 0.5 * (ux + np.roll(ux, -1, axis=0))
            ucy = 0.5 * (uy + np.roll(uy, -1, axis=1))
        else:
            ucx = 0.5 * (ux[:-1] + ux[1:])
            ucy = 0.5 * (uy[:, :-1] + uy[:, 1:])
        ucx = np.where(self.mask, ucx, 0.0)
        ucy = np.where(self.mask, ucy, 0.0)
        return ucx, ucy
