"""Sparse linear algebra helpers: CG iteration and pinned pure-Neumann solves."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CompatibilityError, SolverError


def cg(A, b, tol=1e-10, maxiter=None, matvec=None):
    """Conjugate gradients for an SPD (or consistent SPSD) operator.

    `A` may be a sparse matrix or None if `matvec` is given.  Terminates on
    relative residual ||r|| <= tol * ||b||; raises SolverError otherwise.
    """
    if matvec is None:
        matvec = lambda x: A @ x
    n = b.shape[0]
    if maxiter is None:
        maxiter = max(20 * n, 1000)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr = r @ r
    target = tol * bnorm
    for _ in range(maxiter):
        if np.sqrt(rr) <= target:
            return x
        Ap = matvec(p)
        alpha = rr / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
    if np.sqrt(rr) <= target:
        return x
    raise SolverError(
        f"CG did not converge: residual {np.sqrt(rr):.3e} > {target:.3e}"
    )


class PinnedNeumannSolver:
    """Direct solver for a singular pure-Neumann Poisson matrix.

    The matrix L (SPSD with kernel = constants) is pinned by replacing the
    first row with the identity; for a compatible right-hand side the pinned
    solution differs from a true solution only by a constant, which is
    removed by mean subtraction.
    """

    def __init__(self, L):
        self.n = L.shape[0]
        Lp = L.tolil(copy=True)
        Lp.rows[0] = [0]
        Lp.data[0] = [1.0]
        self.lu = spla.splu(Lp.tocsc())

    def solve(self, b, weights=None):
        b = np.asarray(b, dtype=float)
        bb = b - b.mean()
        bb[0] = 0.0
        x = self.lu.solve(bb)
        return x - x.mean()


def check_neumann_compatible(rhs, cell_volume, tol):
    """Raise unless the discrete mean of rhs vanishes within tol."""
    total = float(np.sum(rhs) * cell_volume)
    scale = float(np.sum(np.abs(rhs)) * cell_volume) + 1.0
    if abs(total) > tol * scale:
        raise CompatibilityError(
            f"pure-Neumann right-hand side has mean {total:.3e} (tol {tol:.1e})"
        )


def factorized(A):
    """LU-factorize a sparse matrix once; returns a solve closure."""
    lu = spla.splu(sp.csc_matrix(A))
    return lu.solve
