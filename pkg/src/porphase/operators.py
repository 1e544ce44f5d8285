"""Field-level spatial operators of the weak formulation.

Thin wrappers around the sparse machinery in `grid`, operating on
ScalarField/VectorField values.  Gradients use centered face differences
with a homogeneous Neumann closure on walls and obstacle faces; divergence
is the exact negative adjoint.  The viscous operator is the adjoint-
consistent divergence of A D(u) with traction-free tangential closure on
obstacles; convection is the exactly antisymmetrized divergence form.
"""

import numpy as np

from .fields import ScalarField, VectorField, ViscosityModel
from .linsolve import PinnedNeumannSolver, cg, check_neumann_compatible


def grad(s: ScalarField) -> VectorField:
    gx, gy = s.grid.grad(s.values)
    return VectorField(s.grid, gx, gy, t=s.t)


def div(u: VectorField) -> ScalarField:
    d = u.grid.div(u.ux, u.uy)
    return ScalarField(u.grid, d, role="div", t=u.t)


def laplace_neumann_solve(rhs: ScalarField, tol=1e-10, maxiter=None):
    """Zero-mean solution of -Lap(s) = rhs with Neumann pore boundaries."""
    g = rhs.grid
    b = g.gather_cells(rhs.values)
    check_neumann_compatible(b, g.cell_volume(), max(tol, 1e-8))
    b = b - b.mean()
    x = cg(g.L, b, tol=tol, maxiter=maxiter)
    x -= x.mean()
    return ScalarField(g, g.scatter_cells(x), role="potential", t=rhs.t)


def strain(u: VectorField):
    """Mandel strain components at pore cells, shape (3, npore)."""
    return u.grid.strain(u.ux, u.uy)


def viscous_apply(A: ViscosityModel, u: VectorField, t=0.0, eps=1.0):
    """div(A D(u)) as a face force field (negative of the stiffness action)."""
    g = u.grid
    K = g.viscous_matrix(A.at_cells(g, t=t, eps=eps))
    return VectorField.from_vec(g, -(K @ u.vec()), t=u.t)


def convect_skew(u: VectorField, v: VectorField) -> VectorField:
    """Skew-symmetric convection 0.5*[div(u x v) + (u . grad) v].

    Built as the exact antisymmetrization of the divergence form, so the
    kinetic contribution <convect_skew(u, v), v> vanishes to round-off
    regardless of the divergence residual of u.
    """
    g = u.grid
    B = g.convection_matrix(u.ux, u.uy)
    w = 0.5 * (B @ v.vec() - B.T @ v.vec())
    return VectorField.from_vec(g, w, t=v.t)


def korteweg_force(phi: ScalarField, mu: ScalarField, C=None) -> VectorField:
    """Capillary face force (face-averaged phi) * (C grad mu); C defaults to I."""
    g = phi.grid
    f = g.capillary_force(phi.values, mu.values, C=C)
    return VectorField.from_vec(g, f, t=phi.t)


def neumann_solver(grid):
    """Prefactorized pinned direct solver for the pure-Neumann Poisson matrix."""
    return PinnedNeumannSolver(grid.L)
